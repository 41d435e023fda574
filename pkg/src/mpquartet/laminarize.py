"""Choosing representatives of cut classes so that they form a laminar family.

A representative of a class is one of its sides plus any union of blocks the
class does not straddle.  Laminarity up to complement is split compatibility,
and complementing a representative stays inside the class, so the search only
picks the extra blocks; orientation is fixed afterwards by making every set
avoid one common taxon.

Blocks straddled by at most one class are removed before the search and put
back afterwards (see :func:`_reinsert`); this keeps gadget blocks, and most
blocks of small instances, out of the search entirely.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import CutClass, TaxonPartition, bits, cut_class, is_laminar, lowest, popcount
from .errors import DuplicateClass, NotLaminarizable

FULL_OCCUPANCY = 15


def _as_classes(family, partition, weak):
    classes = []
    for x in family:
        c = cut_class(x, partition, weak)
        if c is None:
            kind = "weak cut" if weak else "cut"
            raise ValueError(f"{x!r} is not a {kind} of the partition")
        classes.append(c)
    if len(set(classes)) != len(classes):
        raise DuplicateClass("family contains two members of one equivalence class")
    return classes


@dataclass
class _Core:
    classes: list
    partition: TaxonPartition
    core_blocks: list          # block indices kept in the search
    peeled: list               # (block, straddling class index or None) in peel order
    active: list               # class indices taking part in the search
    free: dict                 # class -> list of core blocks it may add
    allowed: dict              # (k, l) -> list over values of k: bitmask of allowed values of l
    neighbors: dict


def _prepare(classes, partition):
    r = partition.r
    straddlers = [[] for _ in range(r)]
    for k, c in enumerate(classes):
        for b in c.footprint:
            straddlers[b].append(k)
    peeled = []
    core_blocks = []
    for b in range(r):
        if len(straddlers[b]) <= 1:
            peeled.append((b, straddlers[b][0] if straddlers[b] else None))
        else:
            core_blocks.append(b)
    core_set = set(core_blocks)
    active = [k for k, c in enumerate(classes) if c.footprint & core_set]
    free = {k: [b for b in core_blocks if b not in classes[k].footprint] for k in active}
    allowed = {}
    neighbors = {k: [] for k in active}
    for k, l in itertools.combinations(active, 2):
        ok = _pair_table(classes[k], classes[l], free[k], free[l], core_blocks, partition)
        if ok.all():
            continue
        allowed[k, l] = [_row_mask(ok[v]) for v in range(ok.shape[0])]
        allowed[l, k] = [_row_mask(ok[:, v]) for v in range(ok.shape[1])]
        neighbors[k].append(l)
        neighbors[l].append(k)
    return _Core(classes, partition, core_blocks, peeled, active, free, allowed, neighbors)


def _row_mask(row):
    m = 0
    for v in np.flatnonzero(row):
        m |= 1 << int(v)
    return m


def _pair_table(ck, cl, free_k, free_l, core_blocks, partition):
    """``ok[u, v]``: choices ``u`` of k and ``v`` of l give compatible splits.

    Occupancy bit ``1 << (2x + y)`` records that some taxon lies inside
    (x=1) or outside (x=0) the set of k and inside/outside that of l.
    """
    dk = np.arange(1 << len(free_k))
    dl = np.arange(1 << len(free_l))
    occ = np.zeros((len(dk), len(dl)), dtype=np.int64)
    pos_k = {b: e for e, b in enumerate(free_k)}
    pos_l = {b: e for e, b in enumerate(free_l)}
    sk, sl = ck.rep, cl.rep
    fixed = 0
    for b in core_blocks:
        in_k = b in ck.footprint
        in_l = b in cl.footprint
        if in_k and in_l:
            for t in bits(partition.blocks[b]):
                x = (sk >> t) & 1
                y = (sl >> t) & 1
                fixed |= 1 << (2 * x + y)
        elif in_k:
            y = (dl >> pos_l[b]) & 1
            occ |= np.where(y, 0b1010, 0b0101)[None, :]
        elif in_l:
            x = (dk >> pos_k[b]) & 1
            occ |= np.where(x, 0b1100, 0b0011)[:, None]
        else:
            x = (dk >> pos_k[b]) & 1
            y = (dl >> pos_l[b]) & 1
            occ |= 1 << (2 * x[:, None] + y[None, :])
    return (occ | fixed) != FULL_OCCUPANCY


def _search(core: _Core, subset=None):
    """Backtracking with forward checking and smallest-domain-first order."""
    active = core.active if subset is None else [k for k in core.active if k in subset]
    aset = set(active)
    domains = {k: (1 << (1 << len(core.free[k]))) - 1 for k in active}
    assign = {}

    def revise(dom):
        # arc consistency, one pass per changed variable
        queue = [(k, l) for k in active for l in core.neighbors[k] if l in aset]
        while queue:
            k, l = queue.pop()
            table = core.allowed[k, l]
            keep = 0
            dl = dom[l]
            for v in bits(dom[k]):
                if table[v] & dl:
                    keep |= 1 << v
            if keep != dom[k]:
                if not keep:
                    return False
                dom[k] = keep
                queue.extend((m, k) for m in core.neighbors[k] if m in aset and m != l)
        return True

    if not revise(domains):
        return None

    def rec(dom):
        if len(assign) == len(active):
            return True
        k = min((k for k in active if k not in assign), key=lambda k: (popcount(dom[k]), k))
        for v in bits(dom[k]):
            new = dict(dom)
            new[k] = 1 << v
            dead = False
            for l in core.neighbors[k]:
                if l in aset and l not in assign:
                    new[l] &= core.allowed[k, l][v]
                    if not new[l]:
                        dead = True
                        break
            if dead:
                continue
            assign[k] = v
            if rec(new):
                return True
            del assign[k]
        return False

    import sys

    limit = sys.getrecursionlimit()
    if limit < len(active) + 100:
        sys.setrecursionlimit(len(active) + 100)
    if rec(domains):
        return dict(assign)
    return None


def _reinsert(core: _Core, assign):
    """Turn a search solution into laminar representatives over all blocks."""
    P = core.partition
    classes = core.classes
    core_universe = P.union(core.core_blocks)
    sets = {}
    orient = {}
    for k, c in enumerate(classes):
        if k in assign:
            y = c.rep & core_universe
            for e, b in enumerate(core.free[k]):
                if (assign[k] >> e) & 1:
                    y |= P.blocks[b]
            orient[k] = 0
            if core_universe and (y >> lowest(core_universe)) & 1:
                y = core_universe & ~y
                orient[k] = 1
            sets[k] = y
        else:
            sets[k] = 0
            orient[k] = 0
    for b, z in reversed(core.peeled):
        block = P.blocks[b]
        if z is None:
            continue
        yz = sets[z]
        part = classes[z].sides[orient[z]] & block
        if yz:
            for k in sets:
                if k != z and sets[k] & yz == yz:
                    sets[k] |= block
        sets[z] = yz | part
    return [sets[k] for k in range(len(classes))]


def laminarize(family, partition: TaxonPartition, *, weak: bool = False, witness: bool = False) -> list:
    """Laminar representatives, one per class, in input order.

    ``family`` holds cut classes or plain sets.  A list of sets that is already
    laminar is returned unchanged.  Raises :class:`NotLaminarizable`; with
    ``witness=True`` the exception carries an inclusion-minimal
    non-laminarizable sub-family.
    """
    family = list(family)
    if family and all(isinstance(x, int) for x in family) and is_laminar(family):
        _as_classes(family, partition, weak)
        return family
    classes = _as_classes(family, partition, weak)
    core = _prepare(classes, partition)
    assign = _search(core)
    if assign is None:
        wit = _minimal_failure(core) if witness else None
        raise NotLaminarizable("no laminar choice of representatives exists", witness=wit)
    out = _reinsert(core, assign)
    assert is_laminar(out)
    assert all(cut_class(y, partition, True) == c for y, c in zip(out, classes))
    return out


def _minimal_failure(core: _Core) -> list:
    keep = set(core.active)
    for k in list(core.active):
        trial = keep - {k}
        if _search(core, trial) is None:
            keep = trial
    return [core.classes[k] for k in sorted(keep)]


def is_laminarizable(family, partition: TaxonPartition, weak: bool = False) -> bool:
    try:
        laminarize(family, partition, weak=weak)
    except NotLaminarizable:
        return False
    return True


def gadget_extension(classes, partition: TaxonPartition):
    """Extended partition with one fresh 2-taxon block per class, and the lifted sets."""
    n = partition.n
    names = list(partition.names)
    blocks = list(partition.blocks)
    lifted = []
    for k, c in enumerate(classes):
        u, v = n + 2 * k, n + 2 * k + 1
        names += [f"__gadget{k}_0", f"__gadget{k}_1"]
        blocks.append((1 << u) | (1 << v))
        lifted.append(c.rep | (1 << u))
    full = partition.universe == (1 << n) - 1
    ext = TaxonPartition(names, blocks, partial=not full)
    return ext, lifted


def full_laminarize(family, partition: TaxonPartition, *, witness: bool = False) -> list:
    """Laminar representatives for weak cut classes via the gadget reduction.

    Each class gets a private two-taxon block and one of its taxa, which makes
    it a strict cut; the strict laminarizer runs on the extended instance and
    the gadget taxa are stripped from the answer.
    """
    classes = _as_classes(list(family), partition, True)
    n = partition.n
    if len(classes) > 2 * popcount(partition.universe):
        raise NotLaminarizable(f"{len(classes)} classes exceed the laminar bound")
    ext, lifted = gadget_extension(classes, partition)
    try:
        wide = laminarize(lifted, ext, witness=witness)
    except NotLaminarizable as exc:
        wit = None
        if exc.witness is not None:
            index = {c: k for k, c in enumerate(cut_class(x, ext) for x in lifted)}
            wit = [classes[index[c]] for c in exc.witness]
        raise NotLaminarizable(str(exc), witness=wit) from None
    keep = (1 << n) - 1
    out = [y & keep for y in wide]
    assert is_laminar(out)
    assert all(cut_class(y, partition, True) == c for y, c in zip(out, classes))
    return out

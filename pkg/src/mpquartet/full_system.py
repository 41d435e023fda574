"""Full quartet systems: single-block reconstruction and the multipartite combination.

Reconstruction of one block contracts sibling classes: leaves no strict
quartet separates.  A class is only contracted when it hangs off the rest of
the current tree by a single edge (every ``xy || pz`` with x, y inside and
p, z outside is strict); a class of siblings around a multifurcation would
otherwise gain a spurious edge.
"""

from __future__ import annotations

import numpy as np

from .core import CutClass, QuartetSystem, bits, cut_class, dedup_classes, popcount, to_mask
from .errors import Incompatible, MalformedSystem
from .multipartite import display_family
from .tree import within_codes_of_family


def siblings(Q: QuartetSystem, a: int, b: int) -> bool:
    """No strict quartet of the block separates ``a`` from ``b``."""
    P = Q.partition
    i = P.block_of[a]
    if P.block_of[b] != i or a == b:
        raise ValueError("siblings needs two distinct taxa of one block")
    W = Q.within_array(i)
    x, y = P.local[a], P.local[b]
    return not W[x, :, y, :].any()


def _components(sib):
    k = sib.shape[0]
    seen = [False] * k
    comps = []
    for s in range(k):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        for u in comp:
            for v in np.flatnonzero(sib[u]):
                if not seen[v]:
                    seen[v] = True
                    comp.append(int(v))
        comps.append(sorted(comp))
    return comps


def reconstruct_full(Q: QuartetSystem, block: int = 0) -> list:
    """Laminar family of weak cuts inside one block displaying its full system.

    Members avoid the smallest taxon of the block.  Raises
    :class:`Incompatible` when no tree displays the block's quartets.
    """
    if not Q.is_full:
        raise MalformedSystem("reconstruct_full needs a full system")
    P = Q.partition
    members = P.members(block)
    W = Q.within_array(block)
    m = len(members)
    items = [1 << k for k in range(m)]   # local-index masks
    reps = list(range(m))
    recorded = []
    while len(items) > 3:
        idx = np.array(reps)
        sub = W[np.ix_(idx, idx, idx, idx)]
        sib = ~sub.any(axis=(1, 3))
        comps = _components(sib)
        for comp in comps:
            block_sib = sib[np.ix_(comp, comp)]
            if not block_sib.all():
                raise Incompatible(
                    "sibling relation is not transitive", phase="FullReconstruction",
                    witness=tuple(members[reps[c]] for c in comp[:4]),
                )
        if len(comps) == 1:
            break
        k = len(items)
        chosen = []
        for comp in comps:
            if len(comp) < 2 or k - len(comp) < 2:
                continue
            inside = np.array(comp)
            outside = np.array([c for c in range(k) if c not in comp])
            block4 = sub[np.ix_(inside, inside, outside, outside)]
            ii = np.arange(len(inside))
            oo = np.arange(len(outside))
            need = np.ones(block4.shape, dtype=bool)
            need[ii, ii, :, :] = False
            need[:, :, oo, oo] = False
            if (block4[need] == 1).all():
                chosen.append(comp)
        if not chosen:
            raise Incompatible(
                "no sibling class can be contracted", phase="FullReconstruction",
                witness=tuple(members[r] for r in reps[:4]),
            )
        union_all = set()
        for comp in chosen:
            union_all.update(comp)
        if len(union_all) == k:
            chosen = chosen[:1]
        drop = set()
        for comp in chosen:
            merged = 0
            for c in comp:
                merged |= items[c]
            recorded.append(merged)
            head = min(comp, key=lambda c: reps[c])
            items[head] = merged
            drop.update(c for c in comp if c != head)
        items = [x for c, x in enumerate(items) if c not in drop]
        reps = [x for c, x in enumerate(reps) if c not in drop]
    full_local = (1 << m) - 1
    fam = []
    for x in recorded:
        if x & 1:
            x = full_local & ~x
        g = to_mask(members[t] for t in bits(x))
        fam.append(g)
    got = within_codes_of_family(fam, P, block)
    bad = np.argwhere(got != W)
    if len(bad):
        raise Incompatible(
            "reconstructed tree does not display the block's quartets",
            phase="FullReconstruction",
            witness=tuple(members[x] for x in bad[0]),
        )
    return fam


def full_display_family(Q: QuartetSystem, chooser=None, order=None, executor=None) -> list:
    """Weak cut-class family displaying a full multipartite system.

    Combines the displaying family of the cross-block part with the
    reconstructed family of every block; raises :class:`Incompatible`.
    """
    if not Q.is_full:
        raise MalformedSystem("full_display_family needs a full system")
    P = Q.partition
    if P.r == 1:
        return dedup_classes(reconstruct_full(Q, 0), P, weak=True)
    F0 = display_family(Q.complete_part(), chooser=chooser, order=order, executor=executor)
    out = list(F0)
    for i in range(P.r):
        Ai = P.blocks[i]
        Li = set(dedup_classes(reconstruct_full(Q, i), P, weak=True))
        Fi = set()
        for X in F0:
            if i in X.footprint:
                c = cut_class(X.rep & Ai, P, weak=True)
                if c is not None:
                    Fi.add(c)
        extra = Fi - Li
        if extra:
            raise Incompatible(
                "cross-block family splits a block in a way its own quartets forbid",
                phase="FullDisplaying/Step2",
                witness=sorted(extra, key=CutClass.sort_key),
            )
        out.extend(sorted(Li - Fi, key=CutClass.sort_key))
    if len(out) > 2 * popcount(P.universe):
        raise Incompatible(f"{len(out)} classes exceed the laminar bound", phase="FullDisplaying/Step3")
    return out

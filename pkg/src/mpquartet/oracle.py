"""Exhaustive ground truth for small instances.

Everything here is exponential and guarded by caps; pass
``allow_exponential=True`` to go beyond them knowingly.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterator, Sequence

import numpy as np

from .core import CutClass, QuartetSystem, TaxonPartition, bits, cut_class, is_laminar, popcount
from .errors import CapExceeded, NotLaminarizable
from .tree import PhyloTree

MAX_TREE_LEAVES = 9
MAX_REPRESENTATIVE_BITS = 24


def _names(n, names):
    return list(names) if names is not None else [f"t{k}" for k in range(n)]


def _insertion_edges(n: int) -> Iterator[list]:
    """Edge lists of every tree on leaves ``0..n-1`` (internal nodes from ``n``).

    Leaf ``k`` is added either on a new edge to an internal node or in the
    middle of an existing edge.  Internal nodes are relabelled at the end.
    """
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(0, 1)]
        return
    # internal nodes get provisional ids starting at 100 to stay clear of leaves
    base = 100

    def grow(edges, k, next_internal):
        if k == n:
            yield edges
            return
        internals = sorted({v for e in edges for v in e if v >= base})
        for v in internals:
            yield from grow(edges + [(v, k)], k + 1, next_internal)
        for idx, (u, v) in enumerate(edges):
            w = next_internal
            new = edges[:idx] + edges[idx + 1:] + [(u, w), (w, v), (w, k)]
            yield from grow(new, k + 1, next_internal + 1)

    yield from grow([(base, 0), (base, 1), (base, 2)], 3, base + 1)


def _relabel(edges, n):
    mapping = {}
    nxt = n
    out = []
    for u, v in edges:
        for x in (u, v):
            if x >= n and x not in mapping:
                mapping[x] = nxt
                nxt += 1
        out.append((mapping.get(u, u), mapping.get(v, v)))
    return out


def _check_cap(n, allow_exponential):
    if n < 1:
        raise ValueError("need at least one taxon")
    if n > MAX_TREE_LEAVES and not allow_exponential:
        raise CapExceeded(f"{n} taxa exceed the oracle cap of {MAX_TREE_LEAVES}")


def enumerate_trees(
    n: int, names: Sequence[str] | None = None, method: str = "insertion", allow_exponential: bool = False
) -> Iterator[PhyloTree]:
    """Every unrooted tree on ``n`` labelled leaves, each exactly once.

    ``method`` is ``"insertion"`` (leaf-by-leaf growth) or ``"splits"``
    (all pairwise compatible sets of nontrivial splits).
    """
    _check_cap(n, allow_exponential)
    names = _names(n, names)
    if method == "insertion":
        for edges in _insertion_edges(n):
            yield PhyloTree(names, _relabel(edges, n), validate=False)
    elif method == "splits":
        from .tree import tree_from_laminar

        for fam in _split_families(n):
            yield tree_from_laminar(fam, n, names)
    else:
        raise ValueError(f"unknown method {method!r}")


def _split_families(n):
    every = (1 << n) - 1
    cands = [s for s in range(2, every + 1, 2) if 2 <= popcount(s) <= n - 2]

    def compatible(x, y):
        z = x & y
        return not z or z == x or z == y

    def rec(start, chosen):
        yield list(chosen)
        for k in range(start, len(cands)):
            s = cands[k]
            if all(compatible(s, c) for c in chosen):
                chosen.append(s)
                yield from rec(k + 1, chosen)
                chosen.pop()

    yield from rec(0, [])


# ---------------------------------------------------------------------------
# compatibility by pruned leaf insertion


def _interleaved_order(P: TaxonPartition) -> list:
    queues = [P.members(i) for i in range(P.r)]
    order = []
    # two taxa of each of the first two blocks first, so that cross quartets
    # constrain the search as early as possible
    while any(queues):
        for q in queues:
            for _ in range(2):
                if q:
                    order.append(q.pop(0))
    return order


def _constraints(Q: QuartetSystem, order):
    """Per insertion step: arrays of 4-tuples involving that taxon and their expected topology.

    Expected value 0, 1, 2 means the first/second/third pairing
    ``(ab|cd, ac|bd, ad|bc)`` is strict; 3 means no strict quartet; for cross
    tuples written ``(a, a2, b, b2)``, the weak ``aa2|bb2`` is the first
    pairing and means "not 1 and not 2".
    """
    P = Q.partition
    pos = {t: k for k, t in enumerate(order)}
    steps = [[] for _ in order]
    bo = P.block_of
    for i, j in itertools.combinations(range(P.r), 2):
        T = Q.cross_array(i, j)
        mi, mj = P.members(i), P.members(j)
        for al, al2 in itertools.combinations(range(len(mi)), 2):
            for be, be2 in itertools.combinations(range(len(mj)), 2):
                a, a2, b, b2 = mi[al], mi[al2], mj[be], mj[be2]
                c = int(T[al, al2, be, be2])
                # pairings of (a, a2, b, b2): (a a2|b b2), (a b|a2 b2), (a b2|a2 b)
                exp = {0: 4, 1: 1, -1: 2}[c]
                last = max(pos[a], pos[a2], pos[b], pos[b2])
                steps[last].append((a, a2, b, b2, exp))
    if Q.is_full:
        for i in range(P.r):
            for combo in itertools.combinations(P.members(i), 4):
                s = Q.strict_pairing(*combo)
                a, b, c, d = combo
                if s is None:
                    exp = 3
                else:
                    pair = s.left if a in s.left else s.right
                    other = pair[0] if pair[1] == a else pair[1]
                    exp = {b: 0, c: 1, d: 2}[other]
                last = max(pos[t] for t in combo)
                steps[last].append((a, b, c, d, exp))
    out = []
    for rows in steps:
        if rows:
            arr = np.array(rows, dtype=np.int64)
            out.append((arr[:, :4], arr[:, 4]))
        else:
            out.append(None)
    return out


def _topology_codes(D, quad):
    a, b, c, d = quad.T
    s = np.stack([D[a, b] + D[c, d], D[a, c] + D[b, d], D[a, d] + D[b, c]], axis=1)
    smin = s.min(axis=1)
    is_min = s == smin[:, None]
    unique = is_min.sum(axis=1) == 1
    return np.where(unique, np.argmax(is_min, axis=1), 3)


def _matches(got, exp):
    # 4 = weak cross quartet: anything but the two mixed pairings
    weak = exp == 4
    ok = np.where(weak, (got == 0) | (got == 3), got == exp)
    return bool(ok.all())


def compatible_oracle(Q: QuartetSystem, allow_exponential: bool = False):
    """A tree displaying every quartet of ``Q``, or ``None`` when none exists."""
    P = Q.partition
    n = popcount(P.universe)
    _check_cap(n, allow_exponential)
    order = _interleaved_order(P)
    cons = _constraints(Q, order)
    k_total = len(order)
    # tree over positions 0..k-1 of ``order``; internal ids start at 100
    base = 100

    def distances(edges, k):
        adj = {}
        for u, v in edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        D = np.zeros((k, k), dtype=np.int64)
        for s in range(k):
            dist = {s: 0}
            dq = deque([s])
            while dq:
                u = dq.popleft()
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        dq.append(v)
            for t in range(k):
                D[s, t] = dist[t]
        return D

    # constraints in position space
    pos_cons = []
    posmap = np.zeros(P.n, dtype=np.int64)
    for k, t in enumerate(order):
        posmap[t] = k
    for c in cons:
        pos_cons.append(None if c is None else (posmap[c[0]], c[1]))

    def ok(edges, k):
        c = pos_cons[k - 1]
        if c is None:
            return True
        D = distances(edges, k)
        return _matches(_topology_codes(D, c[0]), c[1])

    def grow(edges, k, nxt):
        if k == k_total:
            return edges
        internals = sorted({v for e in edges for v in e if v >= base})
        cands = [edges + [(v, k)] for v in internals]
        for idx, (u, v) in enumerate(edges):
            cands.append(edges[:idx] + edges[idx + 1:] + [(u, nxt), (nxt, v), (nxt, k)])
        for cand in cands:
            step_next = nxt + (1 if cand[-1] == (nxt, k) else 0)
            if ok(cand, k + 1):
                found = grow(cand, k + 1, step_next)
                if found is not None:
                    return found
        return None

    if k_total <= 2:
        edges = [] if k_total == 1 else [(0, 1)]
    else:
        start = [(base, 0), (base, 1), (base, 2)]
        if not ok(start, 3):
            return None
        edges = grow(start, 3, base + 1)
        if edges is None:
            return None
    # map positions back to taxon ids
    def back(x):
        return order[x] if x < base else x

    mapped = [(back(u), back(v)) for u, v in edges]
    tree = PhyloTree(P.names, _relabel(mapped, P.n))
    return tree


# ---------------------------------------------------------------------------
# laminarizability by exhaustive representative choice


def representative_bits(classes, partition: TaxonPartition) -> int:
    return sum(1 + partition.r - len(c.footprint) for c in classes)


def laminarizable_oracle(family, partition: TaxonPartition, weak: bool = False, allow_exponential: bool = False):
    """Laminar representatives found by trying every orientation and block choice.

    Returns the list of sets, or raises :class:`NotLaminarizable`.
    """
    classes = [cut_class(x, partition, weak) for x in family]
    if any(c is None for c in classes):
        raise ValueError("family contains a set that is not a cut")
    nbits = representative_bits(classes, partition)
    if nbits > MAX_REPRESENTATIVE_BITS and not allow_exponential:
        raise CapExceeded(f"{nbits} representative bits exceed the cap of {MAX_REPRESENTATIVE_BITS}")
    options = []
    for c in classes:
        free = [b for b in range(partition.r) if b not in c.footprint]
        reps = []
        for side in c.sides:
            for choice in range(1 << len(free)):
                y = side
                for e, b in enumerate(free):
                    if (choice >> e) & 1:
                        y |= partition.blocks[b]
                reps.append(y)
        options.append(reps)

    chosen = []

    def fits(y):
        for x in chosen:
            z = x & y
            if z and z != x and z != y:
                return False
        return True

    def rec(k):
        if k == len(options):
            return True
        for y in options[k]:
            if fits(y):
                chosen.append(y)
                if rec(k + 1):
                    return True
                chosen.pop()
        return False

    if rec(0):
        assert is_laminar(chosen)
        return list(chosen)
    raise NotLaminarizable("exhaustive search found no laminar representatives")

"""Quartet systems from distance data.

Sums of two distances are compared with a tolerance: they count as equal when
``|s1 - s2| <= eps * max(1, s1, s2)``.  Integer tables are compared exactly.
"""

from __future__ import annotations

import itertools
from typing import Mapping

import numpy as np

from .core import QuartetSystem, TaxonPartition
from .errors import DistanceError, MissingTable

DEFAULT_EPS = 1e-9


def _is_exact(arr, exact):
    if exact is None:
        return np.issubdtype(arr.dtype, np.integer)
    return bool(exact)


def compare(s1, s2, eps: float = DEFAULT_EPS, exact: bool = False):
    """Elementwise sign of ``s1 - s2`` with ties inside the tolerance set to 0."""
    s1 = np.asarray(s1)
    s2 = np.asarray(s2)
    diff = s1 - s2
    if exact:
        return np.sign(diff).astype(np.int8)
    tol = eps * np.maximum(1.0, np.maximum(np.abs(s1), np.abs(s2)))
    return np.where(np.abs(diff) <= tol, 0, np.sign(diff)).astype(np.int8)


def _check_table(D, name, square, eps, exact):
    D = np.asarray(D)
    if D.ndim != 2:
        raise DistanceError(f"{name}: table must be two-dimensional")
    if not np.issubdtype(D.dtype, np.number):
        raise DistanceError(f"{name}: table must be numeric")
    if not np.all(np.isfinite(D)):
        raise DistanceError(f"{name}: non-finite entries")
    if (D < 0).any():
        raise DistanceError(f"{name}: negative entries")
    if square:
        if D.shape[0] != D.shape[1]:
            raise DistanceError(f"{name}: table must be square")
        if compare(D, D.T, eps, exact).any():
            raise DistanceError(f"{name}: table is not symmetric")
        diag = np.diag(D)
        if compare(diag, np.zeros_like(diag), eps, exact).any():
            raise DistanceError(f"{name}: nonzero diagonal")
    return D


def cross_codes(D, eps: float = DEFAULT_EPS, exact: bool | None = None) -> np.ndarray:
    """Code array from a rectangular table between two blocks.

    ``T[a, a2, b, b2] = +1`` when ``D[a,b] + D[a2,b2] < D[a,b2] + D[a2,b]``,
    ``-1`` for ``>`` and ``0`` for equality.
    """
    ex = _is_exact(D, exact)
    s1 = D[:, None, :, None] + D[None, :, None, :]
    s2 = D[:, None, None, :] + D[None, :, :, None]
    return -compare(s1, s2, eps, ex)


def within_codes(D, eps: float = DEFAULT_EPS, exact: bool | None = None) -> np.ndarray:
    """Strict-quartet indicator for a square table (one block)."""
    m = D.shape[0]
    W = np.zeros((m, m, m, m), dtype=np.int8)
    if m < 4:
        return W
    ex = _is_exact(D, exact)
    a, b, c, d = np.array(list(itertools.combinations(range(m), 4))).T
    s_ab = D[a, b] + D[c, d]
    s_ac = D[a, c] + D[b, d]
    s_ad = D[a, d] + D[b, c]
    lt = lambda x, y: compare(x, y, eps, ex) < 0  # noqa: E731
    pick = (
        (lt(s_ab, s_ac) & lt(s_ab, s_ad), (a, b, c, d)),
        (lt(s_ac, s_ab) & lt(s_ac, s_ad), (a, c, b, d)),
        (lt(s_ad, s_ab) & lt(s_ad, s_ac), (a, d, b, c)),
    )
    for mask, (p, q, r, s) in pick:
        p, q, r, s = p[mask], q[mask], r[mask], s[mask]
        for x, y in ((p, q), (q, p)):
            for u, w in ((r, s), (s, r)):
                W[x, y, u, w] = 1
                W[u, w, x, y] = 1
    return W


def system_from_metric(
    D, partition: TaxonPartition, full: bool = False, eps: float = DEFAULT_EPS, exact: bool | None = None
) -> QuartetSystem:
    """Extract the system of a distance matrix over all taxa of ``partition``."""
    D = np.asarray(D)
    ex = _is_exact(D, exact)
    D = _check_table(D, "distance matrix", True, eps, ex)
    if D.shape[0] != partition.n:
        raise DistanceError(f"matrix has {D.shape[0]} rows for {partition.n} taxa")
    cross = {}
    for i, j in itertools.combinations(range(partition.r), 2):
        mi, mj = partition.members(i), partition.members(j)
        cross[i, j] = cross_codes(D[np.ix_(mi, mj)], eps, ex)
    within = None
    if full:
        within = {}
        for i in range(partition.r):
            mi = partition.members(i)
            within[i] = within_codes(D[np.ix_(mi, mi)], eps, ex)
    return QuartetSystem(partition, cross, within)


def quartets_from_full_distance(
    D, names=None, eps: float = DEFAULT_EPS, exact: bool | None = None
) -> QuartetSystem:
    """Full system on all taxa of a square table (one block)."""
    D = _check_table(D, "distance matrix", True, eps, _is_exact(np.asarray(D), exact))
    n = D.shape[0]
    if names is None:
        names = [f"t{k}" for k in range(n)]
    P = TaxonPartition(names, [(1 << n) - 1])
    return system_from_metric(D, P, full=True, eps=eps, exact=exact)


def _lookup(tables, i, j):
    if (i, j) in tables:
        return np.asarray(tables[i, j])
    if (j, i) in tables:
        return np.asarray(tables[j, i]).T
    raise MissingTable(i, j)


def quartets_from_block_distances(
    tables: Mapping, partition: TaxonPartition, eps: float = DEFAULT_EPS, exact: bool | None = None
) -> QuartetSystem:
    """Complete multipartite system from one table per block pair.

    ``tables[(i, j)]`` has rows in the id order of block ``i`` and columns in
    the id order of block ``j``; a table stored under ``(j, i)`` is transposed.
    """
    cross = {}
    sizes = [len(partition.members(i)) for i in range(partition.r)]
    for i, j in itertools.combinations(range(partition.r), 2):
        D = _lookup(tables, i, j)
        ex = _is_exact(D, exact)
        D = _check_table(D, f"table {i},{j}", False, eps, ex)
        if D.shape != (sizes[i], sizes[j]):
            raise DistanceError(f"table {i},{j}: expected shape {(sizes[i], sizes[j])}, got {D.shape}")
        cross[i, j] = cross_codes(D, eps, ex)
    return QuartetSystem(partition, cross)


def quartets_from_all_distances(
    tables: Mapping,
    within_tables: Mapping,
    partition: TaxonPartition,
    eps: float = DEFAULT_EPS,
    exact: bool | None = None,
) -> QuartetSystem:
    """Full multipartite system: cross tables plus one square table per block.

    Blocks with fewer than four taxa carry no within-block quartets and may
    omit their table.
    """
    complete = quartets_from_block_distances(tables, partition, eps, exact)
    within = {}
    for i in range(partition.r):
        m = len(partition.members(i))
        if i not in within_tables:
            if m >= 4:
                raise MissingTable(i)
            continue
        D = np.asarray(within_tables[i])
        ex = _is_exact(D, exact)
        D = _check_table(D, f"table {i}", True, eps, ex)
        if D.shape != (m, m):
            raise DistanceError(f"table {i}: expected shape {(m, m)}, got {D.shape}")
        within[i] = within_codes(D, eps, ex)
    cross = {(i, j): complete.cross_array(i, j) for i, j in itertools.combinations(range(partition.r), 2)}
    return QuartetSystem(partition, cross, within)


def four_point_holds(D, eps: float = DEFAULT_EPS, exact: bool | None = None):
    """``(True, None)`` when every 4-set has its two largest pair sums equal.

    Otherwise ``(False, (a, b, c, d))`` for the first violating 4-set in
    lexicographic order.
    """
    D = np.asarray(D)
    ex = _is_exact(D, exact)
    D = _check_table(D, "distance matrix", True, eps, ex)
    n = D.shape[0]
    if n < 4:
        return True, None
    combos = np.array(list(itertools.combinations(range(n), 4)))
    a, b, c, d = combos.T
    sums = np.stack([D[a, b] + D[c, d], D[a, c] + D[b, d], D[a, d] + D[b, c]], axis=1)
    sums.sort(axis=1)
    bad = compare(sums[:, 2], sums[:, 1], eps, ex) != 0
    if bad.any():
        k = int(np.argmax(bad))
        return False, tuple(int(x) for x in combos[k])
    return True, None


def path_metric(tree, weights=None) -> np.ndarray:
    """Leaf-to-leaf path lengths; ``weights[k]`` is the length of ``tree.edges[k]``."""
    if weights is None:
        return np.array(tree.leaf_distances())
    n = tree.n
    size = tree.node_count
    wt = {}
    for (u, v), w in zip(tree.edges, weights):
        if w <= 0:
            raise DistanceError("edge lengths must be positive")
        wt[u, v] = wt[v, u] = float(w)
    D = np.zeros((n, n))
    for s in range(n):
        dist = [None] * size
        dist[s] = 0.0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in tree.adj[u]:
                if dist[v] is None:
                    dist[v] = dist[u] + wt[u, v]
                    stack.append(v)
        D[s] = dist[:n]
    return D

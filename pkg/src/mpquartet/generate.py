"""Random instances: trees, partitions, derived systems, noise and scaled metrics.

All randomness flows through a ``numpy.random.Generator``; ``QMS_SEED`` in
the environment overrides the seed handed to :func:`resolve_seed`.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np

from .core import QuartetSystem, TaxonPartition
from .errors import InvalidParams
from .ingest import path_metric, quartets_from_block_distances, quartets_from_all_distances
from .tree import PhyloTree, displayed_system


def resolve_seed(seed: int | None) -> int:
    env = os.environ.get("QMS_SEED")
    if env is not None:
        return int(env)
    if seed is None:
        return int(np.random.SeedSequence().entropy % (2**32))
    return int(seed)


def taxon_names(n: int) -> list:
    """``a, b, ..., z, t26, t27, ...``"""
    letters = "abcdefghijklmnopqrstuvwxyz"
    return [letters[k] if k < 26 else f"t{k}" for k in range(n)]


def random_tree(n: int, rng: np.random.Generator, names=None, resolution: float = 0.7) -> PhyloTree:
    """Random topology by refining a star.

    Each step picks an internal node of degree >= 4 and moves a random subset
    of its neighbours (between 2 and degree - 2 of them) behind a new node.
    A refinement is attempted with probability ``resolution`` each time, so
    values below 1 leave some multifurcations.
    """
    names = list(names) if names is not None else taxon_names(n)
    if n <= 3:
        from .tree import star_tree

        return star_tree(names)
    adj = {n: set(range(n))}
    for t in range(n):
        adj[t] = {n}
    nxt = n + 1
    while True:
        cands = [v for v in adj if v >= n and len(adj[v]) >= 4]
        if not cands or rng.random() > resolution:
            break
        v = cands[rng.integers(len(cands))]
        nb = sorted(adj[v])
        k = int(rng.integers(2, len(nb) - 1))
        moved = [nb[x] for x in rng.choice(len(nb), size=k, replace=False)]
        w = nxt
        nxt += 1
        adj[w] = set()
        for u in moved:
            adj[v].discard(u)
            adj[u].discard(v)
            adj[u].add(w)
            adj[w].add(u)
        adj[v].add(w)
        adj[w].add(v)
    edges = sorted({(min(u, v), max(u, v)) for u in adj for v in adj[u]})
    mapping = {}
    for v in sorted(x for x in adj if x >= n):
        mapping[v] = n + len(mapping)
    edges = [(mapping.get(u, u), mapping.get(v, v)) for u, v in edges]
    return PhyloTree(names, edges)


def random_partition(n: int, r: int, rng: np.random.Generator, names=None) -> TaxonPartition:
    """Taxa shuffled into ``r`` blocks of size at least two."""
    if r < 1 or n < 2 * r:
        raise InvalidParams(f"cannot split {n} taxa into {r} blocks of size >= 2")
    names = list(names) if names is not None else taxon_names(n)
    sizes = [2] * r
    for _ in range(n - 2 * r):
        sizes[rng.integers(r)] += 1
    perm = rng.permutation(n)
    blocks = []
    k = 0
    for s in sizes:
        m = 0
        for t in perm[k:k + s]:
            m |= 1 << int(t)
        blocks.append(m)
        k += s
    return TaxonPartition(names, blocks)


def add_noise(Q: QuartetSystem, flips: int, rng: np.random.Generator) -> QuartetSystem:
    """Change ``flips`` randomly chosen 4-tuples to a different allowed answer.

    Cross tuples move among the three options of a complete system; in full
    systems a within-block 4-set may also move among its three strict
    quartets and the star.
    """
    P = Q.partition
    cross = {key: np.array(Q.cross_array(*key)) for key in itertools.combinations(range(P.r), 2)}
    within = {i: np.array(Q.within_array(i)) for i in range(P.r)} if Q.is_full else None
    slots = []
    for (i, j) in cross:
        slots.append(("x", (i, j), len(P.members(i)), len(P.members(j))))
    if within is not None:
        for i in range(P.r):
            if len(P.members(i)) >= 4:
                slots.append(("w", i, len(P.members(i)), 0))
    weights = []
    for kind, _, p, q in slots:
        weights.append(p * (p - 1) // 2 * q * (q - 1) // 2 if kind == "x" else p * (p - 1) * (p - 2) * (p - 3) // 24)
    weights = np.array(weights, dtype=float)
    if not len(slots) or weights.sum() == 0:
        return Q
    weights /= weights.sum()
    for _ in range(flips):
        kind, key, p, q = slots[rng.choice(len(slots), p=weights)]
        if kind == "x":
            T = cross[key]
            al, al2 = sorted(rng.choice(p, 2, replace=False))
            be, be2 = sorted(rng.choice(q, 2, replace=False))
            cur = T[al, al2, be, be2]
            new = rng.choice([c for c in (-1, 0, 1) if c != cur])
            for x, y, s1 in ((al, al2, 1), (al2, al, -1)):
                for u, v, s2 in ((be, be2, 1), (be2, be, -1)):
                    T[x, y, u, v] = new * s1 * s2
        else:
            W = within[key]
            a, b, c, d = sorted(rng.choice(p, 4, replace=False))
            options = [(a, b, c, d), (a, c, b, d), (a, d, b, c), None]
            cur = None
            for opt in options[:3]:
                if W[opt]:
                    cur = opt
            new = options[rng.choice([k for k, o in enumerate(options) if o != cur])]
            for x, y, u, v in itertools.permutations((a, b, c, d)):
                W[x, y, u, v] = 0
            if new is not None:
                x, y, u, v = new
                for p1 in ((x, y), (y, x)):
                    for p2 in ((u, v), (v, u)):
                        W[p1 + p2] = 1
                        W[p2 + p1] = 1
    return QuartetSystem(P, cross, within)


def random_lengths(tree: PhyloTree, rng: np.random.Generator, low: float = 0.5, high: float = 2.0):
    return rng.uniform(low, high, size=len(tree.edges))


def scaled_tables(D, partition: TaxonPartition, rng: np.random.Generator | None, low=0.1, high=10.0):
    """Block-pair tables of ``D``, each multiplied by a log-uniform factor.

    With ``rng=None`` every factor is 1.  Returns ``(tables, within, alphas)``.
    """
    tables = {}
    within = {}
    alphas = {}
    for i, j in itertools.combinations(range(partition.r), 2):
        alpha = 1.0 if rng is None else float(np.exp(rng.uniform(np.log(low), np.log(high))))
        alphas[i, j] = alpha
        tables[i, j] = alpha * D[np.ix_(partition.members(i), partition.members(j))]
    for i in range(partition.r):
        alpha = 1.0 if rng is None else float(np.exp(rng.uniform(np.log(low), np.log(high))))
        alphas[i, i] = alpha
        mi = partition.members(i)
        within[i] = alpha * D[np.ix_(mi, mi)]
    return tables, within, alphas


@dataclass
class Instance:
    partition: TaxonPartition
    system: QuartetSystem
    tree: PhyloTree
    seed: int
    noise: int
    alphas: dict | None = None
    tables: tuple | None = None    # (cross tables, within tables) when built from distances


def generate(
    seed: int | None,
    n: int,
    r: int,
    mode: str = "complete",
    noise: int = 0,
    via_distances: bool = False,
    resolution: float = 0.7,
) -> Instance:
    """A random instance with its source tree.

    ``mode`` is ``"complete"`` or ``"full"``.  With ``via_distances`` the
    system is extracted from a weighted path metric whose block tables carry
    random per-pair scalings, which must not change the result.
    """
    if mode not in ("complete", "full"):
        raise InvalidParams(f"unknown mode {mode!r}")
    if n < 4:
        raise InvalidParams("need at least four taxa")
    if mode == "complete" and r < 2:
        raise InvalidParams("complete systems need at least two blocks")
    if noise < 0:
        raise InvalidParams("noise must be nonnegative")
    seed = resolve_seed(seed)
    rng = np.random.default_rng(seed)
    P = random_partition(n, r, rng)
    T = random_tree(n, rng, P.names, resolution)
    alphas = None
    dist = None
    if via_distances:
        D = path_metric(T, random_lengths(T, rng))
        tables, within, alphas = scaled_tables(D, P, rng)
        dist = (tables, within)
        if mode == "full":
            Q = quartets_from_all_distances(tables, within, P)
        else:
            Q = quartets_from_block_distances(tables, P)
    else:
        Q = displayed_system(T, P, full=(mode == "full"))
    if noise:
        Q = add_noise(Q, noise, rng)
    return Instance(P, Q, T, seed, noise, alphas, dist)

"""Displaying for complete multipartite systems, one block at a time.

Cut classes always carry block indices of the full partition, so a family
over a prefix of the blocks is directly a family over the whole partition.
"""

from __future__ import annotations

from typing import Sequence

from .bipartite import Chooser, bipartite_family
from .core import (
    CutClass,
    QuartetSystem,
    TaxonPartition,
    cut_class,
    dedup_classes,
    equiv_restricted,
    nonlaminar_witness,
    popcount,
    precedes,
)
from .errors import Incompatible, MalformedSystem

__all__ = [
    "restrict_system",
    "restrict_family",
    "extend_family",
    "display_family",
    "block_order",
    "nonlaminar_witness",
]


def restrict_system(Q: QuartetSystem, block_ids: Sequence[int]) -> QuartetSystem:
    if len(block_ids) < 2:
        raise ValueError("restriction needs at least two blocks")
    return Q.restrict(block_ids)


def restrict_family(family, partition: TaxonPartition, block_ids: Sequence[int]) -> list:
    """``X & A_R`` for every member whose restriction is still a cut of those blocks."""
    region = partition.union(block_ids)
    sub = partition.restrict(list(block_ids))
    out = []
    seen = set()
    for X in family:
        # every representative of a class restricts to the same restricted class
        x = (X.rep if isinstance(X, CutClass) else X) & region
        if cut_class(x, sub) is not None and x not in seen:
            seen.add(x)
            out.append(x)
    return out


def _maximal(classes: list) -> list:
    return [c for c in classes if not any(precedes(c, d) for d in classes if d is not c)]


def extend_family(
    Q: QuartetSystem,
    prior: list,
    done: Sequence[int],
    t: int,
    chooser: Chooser | None = None,
    pair_families: dict | None = None,
) -> list:
    """Extend a family displaying the blocks ``done`` by the block ``t``.

    ``prior`` holds cut classes over the blocks in ``done``.  Returns cut
    classes over ``done + [t]``; raises :class:`Incompatible`.
    """
    P = Q.partition
    G = {}
    for p in done:
        if pair_families is not None and (p, t) in pair_families:
            fam = pair_families[p, t]
        else:
            fam = bipartite_family(Q, p, t, chooser)
        G[p] = dedup_classes(fam, P)
    At = P.blocks[t]
    out = list(prior)
    for Xp in prior:
        side = Xp.rep
        groups: dict[int, list] = {}
        for p in sorted(Xp.footprint):
            Ap = P.blocks[p]
            target = side & Ap
            for Y in G.get(p, ()):
                for s in Y.sides:
                    if s & Ap == target:
                        groups.setdefault(s & At, []).append(p)
                        break
        for F, R in groups.items():
            if len(R) >= 2:
                Y = cut_class((side & P.union(R)) | F, P)
                if Y is not None:
                    out.append(Y)
    for p in done:
        out.extend(G[p])
    fam = _maximal(dedup_classes(out, P))
    limit = 2 * popcount(P.union(list(done) + [t]))
    if len(fam) > limit:
        raise Incompatible(
            f"extension produced {len(fam)} classes (limit {limit})", phase="Extend/Step3"
        )
    return fam


def block_order(partition: TaxonPartition) -> list:
    """Block indices by decreasing size; ties keep input order."""
    return sorted(range(partition.r), key=lambda i: -popcount(partition.blocks[i]))


def display_family(
    Q: QuartetSystem,
    chooser: Chooser | None = None,
    order: Sequence[int] | None = None,
    executor=None,
) -> list:
    """A cut-class family displaying a complete multipartite system.

    When the system is compatible the result is the minimal laminarizable
    family, unique up to equivalence.  Raises :class:`Incompatible` when a
    stage detects incompatibility; an incompatible system may still return a
    family, which the laminarization stage then rejects.
    """
    P = Q.partition
    if P.r < 2:
        raise MalformedSystem("a complete multipartite system needs at least two blocks")
    order = list(order) if order is not None else block_order(P)
    if sorted(order) != list(range(P.r)):
        raise ValueError("order must be a permutation of the block indices")
    pair_families = None
    if executor is not None:
        jobs = {}
        for k in range(1, P.r):
            for p in order[:k]:
                jobs[p, order[k]] = executor.submit(bipartite_family, Q, p, order[k], chooser)
        pair_families = {key: fut.result() for key, fut in jobs.items()}
    first, second = order[0], order[1]
    if pair_families is not None:
        fam = pair_families[first, second]
    else:
        fam = bipartite_family(Q, first, second, chooser)
    classes = dedup_classes(fam, P)
    for k in range(2, P.r):
        classes = extend_family(Q, classes, order[:k], order[k], chooser, pair_families)
    return classes

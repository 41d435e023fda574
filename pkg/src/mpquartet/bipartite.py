"""Compatibility for complete bipartite quartet systems.

Two routines, both working on one block pair of a (possibly larger) system:

* :func:`pivot_chain` handles the case where one side has two taxa ``p0, p``.
  The answer is a chain of subsets of the other side; adding ``p`` to each
  gives the unique laminar family that displays the quartets and never
  contains ``p0``.
* :func:`bipartite_family` handles arbitrary blocks by running the chain
  routine once per taxon of one side and merging the chains.
"""

from __future__ import annotations

import random
from typing import Callable

import numpy as np

from .core import QuartetSystem, bits, is_laminar, lowest, popcount
from .errors import Incompatible
from .tree import _separation, _membership

Chooser = Callable[[int], int]


def first_choice(mask: int) -> int:
    return lowest(mask)


def random_chooser(rng: random.Random) -> Chooser:
    """A chooser that picks uniformly at random; used to test uniqueness."""

    def choose(mask: int) -> int:
        return rng.choice(list(bits(mask)))

    return choose


def pivot_chain(
    Q: QuartetSystem, p0: int, p: int, big: int, chooser: Chooser | None = None
) -> list:
    """Chain ``B_1 < ... < B_m`` of proper nonempty subsets of ``big``.

    ``p0`` and ``p`` share a block and ``big`` lies inside another block.  The
    family ``{B_k + p}`` displays the quartets on ``{p0, p} x big``; raises
    :class:`Incompatible` when no family does.
    """
    choose = chooser or first_choice
    P = Q.partition
    chain = []
    work = [(big, 0)]
    while work:
        sub, offset = work.pop()
        if popcount(sub) <= 1:
            continue
        b = choose(sub)
        minus = equal = plus = 0
        for b2 in bits(sub):
            if b2 == b:
                equal |= 1 << b2
                continue
            c = Q.code(p0, p, b, b2)
            if c == 1:
                minus |= 1 << b2
            elif c == -1:
                plus |= 1 << b2
            else:
                equal |= 1 << b2
        if minus:
            chain.append(offset | minus)
        if (minus | equal) != sub:
            chain.append(offset | minus | equal)
        work.append((minus, offset))
        work.append((plus, offset | minus | equal))
    chain.sort(key=popcount)
    _verify_chain(Q, p0, p, big, chain)
    return chain


def _verify_chain(Q, p0, p, big, chain):
    """Every quartet on ``{p0, p} x big`` must match the chain positions."""
    for lo_set, hi_set in zip(chain, chain[1:]):
        if lo_set & ~hi_set or lo_set == hi_set:
            raise Incompatible("chain is not strictly nested", phase="PivotChain", witness=(p0, p))
    members = list(bits(big))
    if len(members) < 2:
        return
    P = Q.partition
    i, j = P.block_of[p0], P.block_of[members[0]]
    T = Q.cross_array(i, j)
    row = T[P.local[p0], P.local[p]]
    idx = [P.local[t] for t in members]
    sub = row[np.ix_(idx, idx)]
    pos = np.full(len(members), len(chain))
    for k in range(len(chain) - 1, -1, -1):
        for c, t in enumerate(members):
            if (chain[k] >> t) & 1:
                pos[c] = k
    expected = np.sign(pos[:, None] - pos[None, :])
    bad = np.argwhere(sub != expected)
    if len(bad):
        x, y = bad[0]
        raise Incompatible(
            "pivot chain does not display its quartets",
            phase="PivotChain",
            witness=(p0, p, members[x], members[y]),
        )


def _displays_pair(Q: QuartetSystem, family, i: int, j: int):
    P = Q.partition
    mi, mj = P.members(i), P.members(j)
    S = _separation(_membership(family, mi), _membership(family, mj))
    T = Q.cross_array(i, j)
    bad = np.argwhere(S != (T == 1))
    if len(bad):
        al, al2, be, be2 = bad[0]
        return (mi[al], mi[al2], mj[be], mj[be2])
    return None


def bipartite_family(
    Q: QuartetSystem, i: int, j: int, chooser: Chooser | None = None
) -> list:
    """Laminar family of cuts displaying the quartets between blocks ``i`` and ``j``.

    Every member meets both blocks properly and avoids one fixed taxon of
    block ``i``.  Raises :class:`Incompatible` when the block pair alone is
    already incompatible.
    """
    choose = chooser or first_choice
    P = Q.partition
    A, B = P.blocks[i], P.blocks[j]
    n_pair = popcount(A | B)
    a0 = choose(A)

    # one chain per a != a0, merged by their B-parts
    groups: dict[int, int] = {}
    for a in bits(A & ~(1 << a0)):
        for S in pivot_chain(Q, a0, a, B, chooser):
            groups[S] = groups.get(S, 0) | (1 << a)
            if len(groups) > 2 * n_pair:
                raise Incompatible(
                    "too many B-parts for a laminar family", phase="Bipartite/Step2"
                )
    G = [apart | bpart for bpart, apart in groups.items()]
    if not is_laminar(G):
        for k, x in enumerate(G):
            for y in G[k + 1:]:
                z = x & y
                if z and z != x and z != y:
                    raise Incompatible(
                        "merged chains cross", phase="Bipartite/Step3", witness=[x, y]
                    )
    F = list(G)
    for X in G:
        below = [Y for Y in G if Y != X and Y & X == Y]
        Xm = 0
        for Y in below:
            Xm |= Y
        b0 = choose(B & ~X)
        b = choose(X & B)
        big = X & ~Xm & A
        H = [c | Xm | (X & B) for c in pivot_chain(Q, b0, b, big, chooser)]
        if Xm:
            a = choose(Xm & A)
            Xp = max((Y for Y in below if (Y >> a) & 1), key=popcount)
            b = choose(X & ~Xp & B)
            if not any(Q.code(a, a2, b0, b) == 0 for a2 in bits(big)):
                H.append(Xm | (X & B))
        F.extend(H)
    seen = set()
    out = []
    for X in F:
        if X not in seen:
            seen.add(X)
            out.append(X)
    bad = _displays_pair(Q, out, i, j)
    if bad is not None:
        raise Incompatible(
            "merged family does not display the block pair", phase="Bipartite/Step4", witness=bad
        )
    return out

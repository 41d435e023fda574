"""Taxa, partitions, quartets, quartet systems and cut classes.

Taxon sets are plain Python ints used as bitmasks: bit ``t`` is set when taxon
``t`` belongs to the set.  Every algorithm in the package is set algebra on
these masks.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidPartition, MalformedSystem

# ---------------------------------------------------------------------------
# bitmask helpers


def bits(mask: int) -> Iterator[int]:
    """Yield the members of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(items: Iterable[int]) -> int:
    m = 0
    for t in items:
        m |= 1 << t
    return m


def popcount(mask: int) -> int:
    return mask.bit_count()


def lowest(mask: int) -> int:
    """Smallest member of a nonempty mask."""
    return (mask & -mask).bit_length() - 1


def is_laminar(family: Sequence[int]) -> bool:
    fam = list(family)
    for k, x in enumerate(fam):
        for y in fam[k + 1:]:
            z = x & y
            if z and z != x and z != y:
                return False
    return True


# ---------------------------------------------------------------------------
# partitions


class TaxonPartition:
    """Taxa ``0..n-1`` with display names, split into blocks of size >= 2.

    Blocks are bitmasks.  A partition produced by :meth:`restrict` keeps the
    parent's id space, so its blocks need not cover every id; everything else
    (disjointness, block size) is always enforced.
    """

    __slots__ = ("names", "blocks", "block_of", "local", "universe", "_index")

    def __init__(self, names: Sequence[str], blocks: Sequence[int], *, partial: bool = False):
        names = tuple(str(x) for x in names)
        blocks = tuple(int(b) for b in blocks)
        if len(set(names)) != len(names):
            raise InvalidPartition("taxon names must be distinct")
        if not blocks:
            raise InvalidPartition("a partition needs at least one block")
        n = len(names)
        every = (1 << n) - 1
        block_of = [-1] * n
        local = [-1] * n
        seen = 0
        for i, b in enumerate(blocks):
            if b & ~every or b < 0:
                raise InvalidPartition(f"block {i} refers to unknown taxa")
            if b & seen:
                raise InvalidPartition(f"block {i} overlaps an earlier block")
            if popcount(b) < 2:
                members = [names[t] for t in bits(b)]
                raise InvalidPartition(f"block {i} {members} has fewer than two taxa")
            seen |= b
            for k, t in enumerate(bits(b)):
                block_of[t] = i
                local[t] = k
        if not partial and seen != every:
            missing = [names[t] for t in bits(every & ~seen)]
            raise InvalidPartition(f"taxa {missing} are in no block")
        self.names = names
        self.blocks = blocks
        self.block_of = tuple(block_of)
        self.local = tuple(local)
        self.universe = seen
        self._index = {name: t for t, name in enumerate(names)}

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[str]]) -> "TaxonPartition":
        """Build from lists of names; ids follow the order the names appear."""
        names = [name for block in blocks for name in block]
        masks = []
        t = 0
        for block in blocks:
            masks.append(((1 << len(block)) - 1) << t)
            t += len(block)
        return cls(names, masks)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def r(self) -> int:
        return len(self.blocks)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InvalidPartition(f"unknown taxon {name!r}") from None

    def mask(self, names: Iterable[str]) -> int:
        return to_mask(self.index(x) for x in names)

    def names_of(self, mask: int) -> list[str]:
        return [self.names[t] for t in bits(mask)]

    def members(self, i: int) -> list[int]:
        return list(bits(self.blocks[i]))

    def union(self, block_ids: Iterable[int]) -> int:
        m = 0
        for i in block_ids:
            m |= self.blocks[i]
        return m

    def restrict(self, block_ids: Sequence[int]) -> "TaxonPartition":
        """Sub-partition on the listed blocks (renumbered in the given order)."""
        return TaxonPartition(self.names, [self.blocks[i] for i in block_ids], partial=True)

    def __eq__(self, other):
        return (
            isinstance(other, TaxonPartition)
            and self.names == other.names
            and self.blocks == other.blocks
        )

    def __hash__(self):
        return hash((self.names, self.blocks))

    def __repr__(self):
        inner = "; ".join(" ".join(self.names_of(b)) for b in self.blocks)
        return f"TaxonPartition({inner})"


# ---------------------------------------------------------------------------
# cuts and their equivalence classes


def avg(x: int, partition: TaxonPartition) -> int:
    """Union of the blocks that ``x`` straddles (meets without containing)."""
    out = 0
    for b in partition.blocks:
        m = x & b
        if m and m != b:
            out |= b
    return out


def footprint(x: int, partition: TaxonPartition) -> frozenset:
    return frozenset(
        i for i, b in enumerate(partition.blocks) if (x & b) and (x & b) != b
    )


@dataclass(frozen=True)
class CutClass:
    """An equivalence class of cuts.

    ``footprint`` holds the indices of the straddled blocks and ``sides`` the
    two halves of their union; the half holding the smallest taxon comes first.
    Any set equal to one side plus a union of non-straddled blocks belongs to
    the class.
    """

    footprint: frozenset
    sides: tuple

    @property
    def span(self) -> int:
        return self.sides[0] | self.sides[1]

    @property
    def rep(self) -> int:
        return self.sides[0]

    @property
    def is_strict(self) -> bool:
        return len(self.footprint) >= 2

    def pair_on(self, mask: int) -> frozenset:
        """Unordered side pair restricted to ``mask``."""
        return frozenset((self.sides[0] & mask, self.sides[1] & mask))

    def sort_key(self):
        return (sorted(self.footprint), self.sides)

    def format(self, partition: TaxonPartition) -> str:
        a, b = (partition.names_of(s) for s in self.sides)
        return "{" + ",".join(a) + "}|{" + ",".join(b) + "}"


def _make_class(fp: frozenset, span: int, side: int) -> CutClass:
    other = span & ~side
    if not (side >> lowest(span)) & 1:
        side, other = other, side
    return CutClass(fp, (side, other))


def cut_class(x, partition: TaxonPartition, weak: bool = False):
    """Canonical class of ``x``, or ``None`` when ``x`` is not a (weak) cut."""
    if isinstance(x, CutClass):
        return x
    span = avg(x, partition)
    if not span:
        return None
    fp = footprint(x, partition)
    if len(fp) < 2:
        if not weak:
            return None
        if min(popcount(x & span), popcount(span & ~x)) < 2:
            return None
    return _make_class(fp, span, x & span)


def is_cut(x: int, partition: TaxonPartition, weak: bool = False) -> bool:
    return cut_class(x, partition, weak) is not None


def _span_and_rep(x, partition):
    if isinstance(x, CutClass):
        return x.span, x.rep
    return avg(x, partition), x


def equiv_restricted(x, y, block_ids: Iterable[int], partition: TaxonPartition) -> bool:
    """Equivalence of two cuts after restricting both to the blocks ``block_ids``."""
    region = partition.union(block_ids)
    sx, rx = _span_and_rep(x, partition)
    sy, ry = _span_and_rep(y, partition)
    sx &= region
    sy &= region
    return frozenset((rx & sx, sx & ~rx)) == frozenset((ry & sy, sy & ~ry))


def equivalent(x, y, partition: TaxonPartition) -> bool:
    sx, rx = _span_and_rep(x, partition)
    sy, ry = _span_and_rep(y, partition)
    return frozenset((rx & sx, sx & ~rx)) == frozenset((ry & sy, sy & ~ry))


def precedes(x: CutClass, y: CutClass) -> bool:
    """Strict order: smaller footprint and the same side pair on it."""
    sx, sy = x.span, y.span
    if sx == sy or sx & ~sy:
        return False
    return frozenset(x.sides) == frozenset((y.rep & sx, sx & ~y.rep))


def precedes_eq(x: CutClass, y: CutClass) -> bool:
    return x == y or precedes(x, y)


def dedup_classes(family: Iterable, partition: TaxonPartition, weak: bool = False) -> list:
    """One class per equivalence class, first-occurrence order; non-cuts dropped."""
    seen = set()
    out = []
    for x in family:
        c = cut_class(x, partition, weak)
        if c is None or c in seen:
            continue
        seen.add(c)
        out.append(c)
    return out


def nonlaminar_witness(x, y, z, w, i: int, j: int, k: int, partition: TaxonPartition) -> bool:
    """Certificate that ``{x, y, z}`` cannot be made laminar.

    True when x, y, z agree with ``w`` on blocks ij, ik and jk respectively
    while none of them agrees with ``w`` on all three blocks.
    """
    eq = lambda a, R: equiv_restricted(a, w, R, partition)  # noqa: E731
    if not (eq(x, (i, j)) and eq(y, (i, k)) and eq(z, (j, k))):
        return False
    return not any(eq(a, (i, j, k)) for a in (x, y, z))


# ---------------------------------------------------------------------------
# quartets


@dataclass(frozen=True)
class Quartet:
    """``left || right`` when strict, ``left | right`` when weak.

    Pairs are stored sorted and ordered by their smaller member, so value
    equality ignores the order in which the taxa were written.
    """

    left: tuple
    right: tuple
    strict: bool = True

    @classmethod
    def of(cls, a: int, b: int, c: int, d: int, strict: bool = True) -> "Quartet":
        if len({a, b, c, d}) != 4:
            raise ValueError(f"quartet taxa must be distinct: {(a, b, c, d)}")
        p = (a, b) if a < b else (b, a)
        q = (c, d) if c < d else (d, c)
        if q[0] < p[0]:
            p, q = q, p
        return cls(p, q, strict)

    @property
    def taxa(self) -> tuple:
        return tuple(sorted(self.left + self.right))

    def weak(self) -> "Quartet":
        return Quartet(self.left, self.right, False)

    def format(self, names: Sequence[str]) -> str:
        sep = "||" if self.strict else "|"
        a, b = self.left
        c, d = self.right
        return f"{names[a]} {names[b]} {sep} {names[c]} {names[d]}"


class SystemKind(enum.Enum):
    COMPLETE_BIPARTITE = "complete-bipartite"
    COMPLETE_MULTIPARTITE = "complete-multipartite"
    FULL = "full"
    FULL_MULTIPARTITE = "full-multipartite"


def _set_code(arr, al, al2, be, be2, c):
    arr[al, al2, be, be2] = c
    arr[al2, al, be, be2] = -c
    arr[al, al2, be2, be] = -c
    arr[al2, al, be2, be] = c


def _set_strict(arr, a, b, c, d, v=1):
    for p, q in (((a, b), (c, d)), ((c, d), (a, b))):
        for x, y in (p, p[::-1]):
            for u, w in (q, q[::-1]):
                arr[x, y, u, w] = v


class QuartetSystem:
    """A complete or full multipartite quartet system.

    ``cross[(i, j)]`` (``i < j``) is an int8 array ``T`` indexed by local taxon
    positions inside blocks ``i`` and ``j``: ``T[a, a2, b, b2]`` is ``+1`` when
    ``ab || a2b2`` is in the system, ``-1`` for ``ab2 || a2b`` and ``0`` for the
    weak ``aa2 | bb2``.  Missing pairs are all weak.

    ``within[i]`` (full systems only) is a 0/1 array with ``W[a, b, c, d] == 1``
    exactly when ``ab || cd`` is in the system; a 4-set with no strict
    quartet carries all three weak quartets.
    """

    def __init__(self, partition: TaxonPartition, cross=None, within=None):
        self.partition = partition
        sizes = [popcount(b) for b in partition.blocks]
        cross = dict(cross or {})
        self._cross = {}
        for i, j in itertools.combinations(range(partition.r), 2):
            arr = cross.pop((i, j), None)
            shape = (sizes[i], sizes[i], sizes[j], sizes[j])
            if arr is None:
                arr = np.zeros(shape, dtype=np.int8)
            else:
                arr = np.array(arr, dtype=np.int8)
                if arr.shape != shape:
                    raise MalformedSystem(f"block pair {(i, j)}: expected shape {shape}")
                if not np.array_equal(arr, -arr.transpose(1, 0, 2, 3)) or not np.array_equal(
                    arr, -arr.transpose(0, 1, 3, 2)
                ):
                    raise MalformedSystem(f"block pair {(i, j)}: code array is not antisymmetric")
            arr.setflags(write=False)
            self._cross[i, j] = arr
        if cross:
            raise MalformedSystem(f"unexpected block pairs {sorted(cross)}")
        self._within = None
        if within is not None:
            self._within = {}
            for i in range(partition.r):
                m = sizes[i]
                arr = within.get(i)
                if arr is None:
                    arr = np.zeros((m, m, m, m), dtype=np.int8)
                else:
                    arr = np.array(arr, dtype=np.int8)
                    if arr.shape != (m, m, m, m):
                        raise MalformedSystem(f"block {i}: expected shape {(m,) * 4}")
                arr.setflags(write=False)
                self._within[i] = arr
            self._check_within()
        self._lists = {}

    # -- construction -------------------------------------------------------

    @classmethod
    def from_quartets(
        cls,
        partition: TaxonPartition,
        quartets: Iterable[Quartet],
        full: bool | None = None,
        fill_weak: bool = False,
    ) -> "QuartetSystem":
        """Validate and pack a quartet collection.

        ``full=None`` infers the class: any within-block quartet makes it full.
        With ``fill_weak`` a cross tuple without a listed quartet gets its weak
        ``aa'|bb'`` and a within-block 4-set without one becomes a star.
        """
        P = partition
        bo, lo = P.block_of, P.local
        sizes = [popcount(b) for b in P.blocks]
        quartets = list(quartets)
        cross = {}
        within = {}
        unset = 2
        for i, j in itertools.combinations(range(P.r), 2):
            cross[i, j] = np.full((sizes[i], sizes[i], sizes[j], sizes[j]), unset, dtype=np.int8)
        weak_seen = {}
        strict_seen = {}
        any_within = False
        for q in quartets:
            a, b = q.left
            c, d = q.right
            for t in (a, b, c, d):
                if t < 0 or t >= P.n or bo[t] < 0:
                    raise MalformedSystem(f"quartet {q} uses a taxon outside the partition")
            blocks = sorted({bo[a], bo[b], bo[c], bo[d]})
            if len(blocks) == 1:
                any_within = True
                key = q.taxa
                if q.strict:
                    prev = strict_seen.setdefault(key, q)
                    if prev != q:
                        raise MalformedSystem(
                            f"two strict quartets on {P.names_of(to_mask(key))}"
                        )
                else:
                    weak_seen.setdefault(key, set()).add(q)
                continue
            if len(blocks) != 2:
                raise MalformedSystem(f"quartet {q.format(P.names)} spans {len(blocks)} blocks")
            i, j = blocks
            tx = [a, b, c, d]
            side_i = [t for t in tx if bo[t] == i]
            side_j = [t for t in tx if bo[t] == j]
            if len(side_i) != 2:
                raise MalformedSystem(f"quartet {q.format(P.names)} is not of the cross form")
            arr = cross[i, j]
            al, al2 = lo[side_i[0]], lo[side_i[1]]
            be, be2 = lo[side_j[0]], lo[side_j[1]]
            pure = bo[a] == bo[b]
            if q.strict:
                if pure:
                    raise MalformedSystem(
                        f"strict quartet {q.format(P.names)} pairs taxa of the same block"
                    )
                # left pair holds one taxon of each block
                x_i = a if bo[a] == i else b
                x_j = b if bo[a] == i else a
                c_new = 1 if (lo[x_i], lo[x_j]) in ((al, be), (al2, be2)) else -1
            else:
                if not pure:
                    raise MalformedSystem(
                        f"weak cross quartet {q.format(P.names)} must pair taxa of the same block"
                    )
                c_new = 0
            old = arr[al, al2, be, be2]
            if old != unset and old != c_new:
                raise MalformedSystem(
                    f"conflicting quartets on {P.names_of(to_mask(tx))}"
                )
            _set_code(arr, al, al2, be, be2, c_new)
        for (i, j), arr in cross.items():
            for al, al2 in itertools.combinations(range(sizes[i]), 2):
                for be, be2 in itertools.combinations(range(sizes[j]), 2):
                    if arr[al, al2, be, be2] == unset:
                        if not fill_weak:
                            raise MalformedSystem(
                                "no quartet for "
                                + " ".join(
                                    P.names[t]
                                    for t in (
                                        P.members(i)[al], P.members(i)[al2],
                                        P.members(j)[be], P.members(j)[be2],
                                    )
                                )
                            )
                        _set_code(arr, al, al2, be, be2, 0)
            arr[arr == unset] = 0
        if full is None:
            full = any_within
        if any_within and not full:
            raise MalformedSystem("within-block quartets in a complete system")
        if full:
            for i in range(P.r):
                members = P.members(i)
                m = len(members)
                arr = np.zeros((m, m, m, m), dtype=np.int8)
                for combo in itertools.combinations(members, 4):
                    s = strict_seen.get(combo)
                    w = weak_seen.get(combo, set())
                    if s is not None:
                        if w:
                            raise MalformedSystem(
                                f"both strict and weak quartets on {P.names_of(to_mask(combo))}"
                            )
                        _set_strict(arr, *(lo[t] for t in s.left + s.right))
                    elif len(w) != 3 and not (fill_weak and not w):
                        raise MalformedSystem(
                            f"4-set {P.names_of(to_mask(combo))} needs one strict or all three weak quartets"
                        )
                within[i] = arr
        return cls(P, cross, within if full else None)

    def _check_within(self):
        for i, arr in self._within.items():
            m = arr.shape[0]
            if m < 4:
                if arr.any():
                    raise MalformedSystem(f"block {i}: strict quartets on fewer than four taxa")
                continue
            combos = np.array(list(itertools.combinations(range(m), 4)))
            a, b, c, d = combos.T
            total = arr[a, b, c, d].astype(int) + arr[a, c, b, d] + arr[a, d, b, c]
            if total.max() > 1:
                raise MalformedSystem(f"block {i}: a 4-set carries two strict quartets")
            for perm in itertools.permutations(range(4)):
                if not np.array_equal(arr, arr.transpose(perm)) and perm in (
                    (1, 0, 2, 3), (2, 3, 0, 1), (0, 1, 3, 2),
                ):
                    raise MalformedSystem(f"block {i}: strict indicator is not symmetric")

    # -- queries --------------------------------------------------------------

    @property
    def is_full(self) -> bool:
        return self._within is not None

    @property
    def kind(self) -> SystemKind:
        r = self.partition.r
        if self.is_full:
            return SystemKind.FULL if r == 1 else SystemKind.FULL_MULTIPARTITE
        return SystemKind.COMPLETE_BIPARTITE if r == 2 else SystemKind.COMPLETE_MULTIPARTITE

    def cross_array(self, i: int, j: int) -> np.ndarray:
        if i < j:
            return self._cross[i, j]
        return self._cross[j, i].transpose(2, 3, 0, 1)

    def within_array(self, i: int) -> np.ndarray:
        if self._within is None:
            raise MalformedSystem("complete systems carry no within-block quartets")
        return self._within[i]

    def _list(self, key):
        out = self._lists.get(key)
        if out is None:
            arr = self._cross[key] if key in self._cross else self._within[key[1]]
            out = self._lists[key] = arr.tolist()
        return out

    def code(self, a: int, a2: int, b: int, b2: int) -> int:
        """+1 for ``ab || a2b2``, -1 for ``ab2 || a2b``, 0 for ``aa2 | bb2``.

        ``a, a2`` must share a block and ``b, b2`` must share a different one.
        """
        P = self.partition
        i, j = P.block_of[a], P.block_of[b]
        lo = P.local
        if i < j:
            return self._list((i, j))[lo[a]][lo[a2]][lo[b]][lo[b2]]
        return self._list((j, i))[lo[b]][lo[b2]][lo[a]][lo[a2]]

    def strict_pairing(self, a: int, b: int, c: int, d: int):
        """The strict quartet on these taxa, ``None`` if only weak ones are present.

        Raises ``KeyError`` when the system says nothing about the 4-set.
        """
        P = self.partition
        bo = P.block_of
        tx = (a, b, c, d)
        blocks = {bo[t] for t in tx}
        if len(blocks) == 1:
            if self._within is None:
                raise KeyError(tx)
            i = blocks.pop()
            lo = P.local
            arr = self._list(("w", i))
            for p, q in (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))):
                if arr[lo[p[0]]][lo[p[1]]][lo[q[0]]][lo[q[1]]]:
                    return Quartet.of(*p, *q)
            return None
        if len(blocks) != 2:
            raise KeyError(tx)
        i = bo[a]
        same = [t for t in tx if bo[t] == i]
        other = [t for t in tx if bo[t] != i]
        if len(same) != 2:
            raise KeyError(tx)
        x, x2 = same
        y, y2 = other
        c_ = self.code(x, x2, y, y2)
        if c_ == 1:
            return Quartet.of(x, y, x2, y2)
        if c_ == -1:
            return Quartet.of(x, y2, x2, y)
        return None

    def __contains__(self, q: Quartet) -> bool:
        a, b = q.left
        c, d = q.right
        try:
            s = self.strict_pairing(a, b, c, d)
        except KeyError:
            return False
        if q.strict:
            return s == q
        if s is None:
            bo = self.partition.block_of
            if len({bo[a], bo[b], bo[c], bo[d]}) == 1:
                return True
            return bo[a] == bo[b]
        return False

    def quartets(self) -> Iterator[Quartet]:
        P = self.partition
        for (i, j), arr in self._cross.items():
            mi, mj = P.members(i), P.members(j)
            lst = arr.tolist()
            for al, al2 in itertools.combinations(range(len(mi)), 2):
                for be, be2 in itertools.combinations(range(len(mj)), 2):
                    a, a2, b, b2 = mi[al], mi[al2], mj[be], mj[be2]
                    c = lst[al][al2][be][be2]
                    if c == 1:
                        yield Quartet.of(a, b, a2, b2)
                    elif c == -1:
                        yield Quartet.of(a, b2, a2, b)
                    else:
                        yield Quartet.of(a, a2, b, b2, strict=False)
        if self._within is not None:
            for i in range(P.r):
                for combo in itertools.combinations(P.members(i), 4):
                    s = self.strict_pairing(*combo)
                    if s is not None:
                        yield s
                    else:
                        a, b, c, d = combo
                        yield Quartet.of(a, b, c, d, False)
                        yield Quartet.of(a, c, b, d, False)
                        yield Quartet.of(a, d, b, c, False)

    def strict_quartets(self) -> Iterator[Quartet]:
        return (q for q in self.quartets() if q.strict)

    def __len__(self):
        return sum(1 for _ in self.quartets())

    def restrict(self, block_ids: Sequence[int]) -> "QuartetSystem":
        """Sub-system on the listed blocks; blocks are renumbered in that order."""
        block_ids = list(block_ids)
        sub = self.partition.restrict(block_ids)
        cross = {}
        for u, v in itertools.combinations(range(len(block_ids)), 2):
            i, j = block_ids[u], block_ids[v]
            arr = self.cross_array(i, j)
            if u < v:
                cross[u, v] = arr
        within = None
        if self._within is not None:
            within = {u: self._within[i] for u, i in enumerate(block_ids)}
        return QuartetSystem(sub, cross, within)

    def complete_part(self) -> "QuartetSystem":
        """The cross-block quartets alone, as a complete system."""
        return QuartetSystem(self.partition, self._cross, None)

    def __eq__(self, other):
        if not isinstance(other, QuartetSystem) or other.partition != self.partition:
            return False
        if self.is_full != other.is_full:
            return False
        if any(not np.array_equal(a, other._cross[k]) for k, a in self._cross.items()):
            return False
        if self._within is not None:
            return all(np.array_equal(a, other._within[k]) for k, a in self._within.items())
        return True

    __hash__ = None

    def to_text(self, weak: bool = True) -> str:
        """Deterministic one-quartet-per-line rendering."""
        names = self.partition.names
        lines = [q.format(names) for q in self.quartets() if weak or q.strict]
        return "\n".join(lines) + ("\n" if lines else "")

    def __repr__(self):
        return f"QuartetSystem({self.kind.value}, n={self.partition.n}, r={self.partition.r})"

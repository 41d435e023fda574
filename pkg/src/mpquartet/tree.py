"""Unrooted phylogenetic trees, their split families, quartet display and Newick I/O."""

from __future__ import annotations

import itertools
import re
from collections import deque
from typing import Iterable, Sequence

import numpy as np

from .core import (
    CutClass,
    Quartet,
    QuartetSystem,
    TaxonPartition,
    bits,
    is_laminar,
    popcount,
)
from .errors import DuplicateBipartition, InvalidTree, NewickError, NotLaminar, TrivialSplit


class PhyloTree:
    """Leaves are nodes ``0..n-1`` (taxon ids); internal nodes are ``n..``.

    Equality compares names and split sets, so two trees are equal exactly
    when they have the same unrooted topology.
    """

    __slots__ = ("names", "edges", "adj", "_dist", "_splits")

    def __init__(self, names: Sequence[str], edges: Iterable[tuple], *, validate: bool = True):
        self.names = tuple(str(x) for x in names)
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        n = len(self.names)
        size = max([n - 1] + [max(e) for e in self.edges]) + 1 if (self.edges or n) else 0
        adj = [[] for _ in range(size)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        self.adj = tuple(tuple(a) for a in adj)
        self._dist = None
        self._splits = None
        if validate:
            self._validate()

    def _validate(self):
        n = len(self.names)
        if n == 0:
            raise InvalidTree("a tree needs at least one leaf")
        if len(set(self.names)) != n:
            raise InvalidTree("leaf names must be distinct")
        size = len(self.adj)
        if len(self.edges) != size - 1:
            raise InvalidTree("edge count does not match a tree")
        if any(u == v for u, v in self.edges):
            raise InvalidTree("self loop")
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != size:
            raise InvalidTree("tree is not connected")
        if n >= 2:
            for t in range(n):
                if len(self.adj[t]) != 1:
                    raise InvalidTree(f"leaf {self.names[t]!r} has degree {len(self.adj[t])}")
        for v in range(n, size):
            if len(self.adj[v]) < 3:
                raise InvalidTree(f"internal node {v} has degree {len(self.adj[v])}")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def node_count(self) -> int:
        return len(self.adj)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidTree(f"unknown leaf {name!r}") from None

    def _parents(self):
        """Parent array and preorder for the tree rooted at leaf 0."""
        size = len(self.adj)
        parent = [-1] * size
        order = [0]
        parent[0] = 0
        for u in order:
            for v in self.adj[u]:
                if parent[v] < 0:
                    parent[v] = u
                    order.append(v)
        parent[0] = -1
        return parent, order

    def splits(self) -> frozenset:
        """Internal-edge bipartitions, each as the side avoiding leaf 0."""
        if self._splits is None:
            n = self.n
            out = set()
            if n >= 4:
                parent, order = self._parents()
                below = [0] * len(self.adj)
                for t in range(n):
                    below[t] = 1 << t
                for v in reversed(order):
                    p = parent[v]
                    if p >= 0:
                        below[p] |= below[v]
                for v in order:
                    if v >= n and parent[v] >= n:
                        out.add(below[v])
            self._splits = frozenset(out)
        return self._splits

    def leaf_distances(self) -> np.ndarray:
        """Unit-edge path lengths between leaves (int64, read-only)."""
        if self._dist is None:
            n = self.n
            size = len(self.adj)
            D = np.zeros((n, n), dtype=np.int64)
            for s in range(n):
                dist = [-1] * size
                dist[s] = 0
                q = deque([s])
                while q:
                    u = q.popleft()
                    for v in self.adj[u]:
                        if dist[v] < 0:
                            dist[v] = dist[u] + 1
                            q.append(v)
                D[s] = dist[:n]
            D.setflags(write=False)
            self._dist = D
        return self._dist

    def __eq__(self, other):
        return (
            isinstance(other, PhyloTree)
            and self.names == other.names
            and self.splits() == other.splits()
        )

    def __hash__(self):
        return hash((self.names, self.splits()))

    def __repr__(self):
        return f"PhyloTree({to_newick(self)})"


def same_topology(t1: PhyloTree, t2: PhyloTree) -> bool:
    return t1 == t2


def star_tree(names: Sequence[str]) -> PhyloTree:
    return tree_from_laminar([], len(names), names)


# ---------------------------------------------------------------------------
# laminar families <-> trees


def _default_names(n):
    return [f"t{k}" for k in range(n)]


def tree_from_laminar(family: Iterable[int], n: int, names: Sequence[str] | None = None) -> PhyloTree:
    """The tree whose internal edges induce exactly the bipartitions of ``family``."""
    names = list(names) if names is not None else _default_names(n)
    if len(names) != n:
        raise InvalidTree("need one name per taxon")
    fam = [int(x) for x in family]
    every = (1 << n) - 1
    for x in fam:
        if x & ~every or x < 0:
            raise InvalidTree("set refers to taxa outside the tree")
        if min(popcount(x), n - popcount(x)) < 2:
            raise TrivialSplit(f"set {x:#x} does not induce an internal edge")
    if not is_laminar(fam):
        raise NotLaminar("family is not laminar")
    sides = []
    seen = set()
    for x in fam:
        s = every & ~x if x & 1 else x
        if s in seen:
            raise DuplicateBipartition(f"two members induce the bipartition of {s:#x}")
        seen.add(s)
        sides.append(s)
    if n == 1:
        return PhyloTree(names, [], validate=False)
    if n == 2:
        return PhyloTree(names, [(0, 1)], validate=False)
    sides.sort(key=popcount, reverse=True)
    root = n
    node_of = {s: n + 1 + k for k, s in enumerate(sides)}
    edges = []
    # parent of a set is the smallest earlier set containing it
    for k, s in enumerate(sides):
        parent = root
        for s2 in reversed(sides[:k]):
            if s & s2 == s:
                parent = node_of[s2]
                break
        edges.append((parent, node_of[s]))
    for t in range(n):
        parent = root
        for s in reversed(sides):
            if (s >> t) & 1:
                parent = node_of[s]
                break
        edges.append((parent, t))
    return PhyloTree(names, edges, validate=False)


def laminar_from_tree(tree: PhyloTree) -> list:
    """One side of every internal edge (the side avoiding leaf 0), sorted."""
    return sorted(tree.splits(), key=lambda s: (popcount(s), s))


# ---------------------------------------------------------------------------
# quartet display


def _four_point_topology(D, a, b, c, d):
    s_ab = D[a, b] + D[c, d]
    s_ac = D[a, c] + D[b, d]
    s_ad = D[a, d] + D[b, c]
    if s_ab < s_ac and s_ab < s_ad:
        return (a, b, c, d)
    if s_ac < s_ab and s_ac < s_ad:
        return (a, c, b, d)
    if s_ad < s_ab and s_ad < s_ac:
        return (a, d, b, c)
    return None


def restrict_to_four(tree: PhyloTree, a: int, b: int, c: int, d: int):
    """The strict quartet ``tree`` induces on four leaves, ``None`` for a star.

    Two leaf paths are vertex-disjoint exactly when their pair sum of unit
    path lengths is strictly the smallest of the three.
    """
    if len({a, b, c, d}) != 4:
        raise ValueError("four distinct leaves required")
    top = _four_point_topology(tree.leaf_distances(), a, b, c, d)
    return None if top is None else Quartet.of(*top)


def tree_displays(tree: PhyloTree, q: Quartet) -> bool:
    a, b = q.left
    c, d = q.right
    got = restrict_to_four(tree, a, b, c, d)
    if q.strict:
        return got == q
    return got is None or got == Quartet.of(a, b, c, d)


def displayed_system(tree: PhyloTree, partition: TaxonPartition, full: bool = False) -> QuartetSystem:
    """The complete (or full) multipartite system that ``tree`` displays."""
    from .ingest import system_from_metric

    return system_from_metric(tree.leaf_distances(), partition, full=full, exact=True)


# ---------------------------------------------------------------------------
# family display (set-separation condition)


def _masks(family):
    return [x.rep if isinstance(x, CutClass) else int(x) for x in family]


def _membership(family, members):
    fam = _masks(family)
    M = np.zeros((len(fam), len(members)), dtype=bool)
    for k, x in enumerate(fam):
        for c, t in enumerate(members):
            M[k, c] = (x >> t) & 1
    return M


def _separation(Ma, Mb):
    """``S[a, a2, b, b2]``: some member holds a,b and avoids a2,b2 (or the reverse)."""
    k, p = Ma.shape
    q = Mb.shape[1]
    if k == 0:
        return np.zeros((p, p, q, q), dtype=bool)
    P1 = (Ma[:, :, None] & Mb[:, None, :]).reshape(k, p * q).astype(np.float32)
    P0 = (~Ma[:, :, None] & ~Mb[:, None, :]).reshape(k, p * q).astype(np.float32)
    C = P1.T @ P0
    sep = (C + C.T) > 0
    return sep.reshape(p, q, p, q).transpose(0, 2, 1, 3)


def cross_codes_of_family(family, partition: TaxonPartition, i: int, j: int):
    """Code array the family induces on blocks ``i, j``; ``None`` if it displays no system."""
    mi, mj = partition.members(i), partition.members(j)
    S = _separation(_membership(family, mi), _membership(family, mj))
    Sf = S.transpose(0, 1, 3, 2)
    if (S & Sf).any():
        return None
    return S.astype(np.int8) - Sf.astype(np.int8)


def within_codes_of_family(family, partition: TaxonPartition, i: int):
    mi = partition.members(i)
    M = _membership(family, mi)
    S = _separation(M, M)
    m = len(mi)
    idx = np.arange(m)
    S[idx, idx, :, :] = False
    S[:, :, idx, idx] = False
    S[idx, :, idx, :] = False
    S[idx, :, :, idx] = False
    S[:, idx, idx, :] = False
    S[:, idx, :, idx] = False
    # S pairs (0, 2) against (1, 3); within arrays pair (0, 1) against (2, 3)
    return np.ascontiguousarray(S.transpose(0, 2, 1, 3)).astype(np.int8)


def system_of_family(family, partition: TaxonPartition, full: bool = False):
    """The system displayed by ``family``, or ``None`` when it displays none.

    For full systems a 4-set separated in two ways also yields ``None``.
    """
    cross = {}
    for i, j in itertools.combinations(range(partition.r), 2):
        arr = cross_codes_of_family(family, partition, i, j)
        if arr is None:
            return None
        cross[i, j] = arr
    within = None
    if full:
        within = {}
        for i in range(partition.r):
            W = within_codes_of_family(family, partition, i)
            if W.shape[0] >= 4:
                a, b, c, d = np.array(list(itertools.combinations(range(W.shape[0]), 4))).T
                total = W[a, b, c, d].astype(int) + W[a, c, b, d] + W[a, d, b, c]
                if total.max() > 1:
                    return None
            within[i] = W
    return QuartetSystem(partition, cross, within)


def family_displays(family, system: QuartetSystem) -> bool:
    """Whether (i) membership and (ii) separation agree on every relevant 4-tuple."""
    P = system.partition
    for i, j in itertools.combinations(range(P.r), 2):
        S = _separation(
            _membership(family, P.members(i)), _membership(family, P.members(j))
        )
        T = system.cross_array(i, j)
        if not np.array_equal(S, T == 1):
            # diagonal entries are never separated and never strict
            return False
    if system.is_full:
        for i in range(P.r):
            if not np.array_equal(within_codes_of_family(family, P, i), system.within_array(i)):
                return False
    return True


def first_mismatch(a: QuartetSystem, b: QuartetSystem):
    """First 4-tuple (taxon ids) on which two systems over one partition differ."""
    P = a.partition
    for i, j in itertools.combinations(range(P.r), 2):
        diff = np.argwhere(a.cross_array(i, j) != b.cross_array(i, j))
        if len(diff):
            al, al2, be, be2 = diff[0]
            mi, mj = P.members(i), P.members(j)
            return (mi[al], mi[al2], mj[be], mj[be2])
    if a.is_full and b.is_full:
        for i in range(P.r):
            diff = np.argwhere(a.within_array(i) != b.within_array(i))
            if len(diff):
                mi = P.members(i)
                return tuple(mi[x] for x in diff[0])
    return None


# ---------------------------------------------------------------------------
# Newick


_NAME = re.compile(r"[A-Za-z0-9_]+")


def to_newick(tree: PhyloTree) -> str:
    """Deterministic Newick text without branch lengths.

    Rooted at the internal node next to the leaf with the smallest name;
    children are ordered by the smallest leaf name below them.
    """
    n = tree.n
    names = tree.names
    if n == 1:
        return f"{names[0]};"
    if n == 2:
        return "(" + ",".join(sorted(names)) + ");"
    first = min(range(n), key=lambda t: names[t])
    root = tree.adj[first][0]
    parent = {root: None}
    order = [root]
    for u in order:
        for v in tree.adj[u]:
            if v not in parent:
                parent[v] = u
                order.append(v)
    key = {}
    text = {}
    for v in reversed(order):
        if v < n:
            key[v] = names[v]
            text[v] = names[v]
            continue
        kids = sorted((c for c in tree.adj[v] if c != parent[v]), key=lambda c: key[c])
        key[v] = key[kids[0]]
        text[v] = "(" + ",".join(text[c] for c in kids) + ")"
    return text[root] + ";"


def _tokens(text):
    k = 0
    while k < len(text):
        ch = text[k]
        if ch.isspace():
            k += 1
        elif ch in "(),;":
            yield ch, k
            k += 1
        else:
            m = _NAME.match(text, k)
            if not m:
                raise NewickError(f"unexpected character {ch!r} at offset {k}")
            yield m.group(), k
            k = m.end()


def parse_newick(text: str, names: Sequence[str] | None = None) -> PhyloTree:
    """Parse unrooted, unweighted Newick; nodes of degree two are suppressed.

    With ``names`` given, leaf ids follow that order and the leaf set must
    match it exactly; otherwise ids follow order of appearance.
    """
    toks = list(_tokens(text))
    if not toks or toks[-1][0] != ";":
        raise NewickError("Newick text must end with ';'")
    toks = toks[:-1]
    if any(t == ";" for t, _ in toks):
        raise NewickError("';' before the end of input")
    adj = {}
    labels = {}
    counter = itertools.count()

    def new_node():
        v = next(counter)
        adj[v] = []
        return v

    def link(u, v):
        adj[u].append(v)
        adj[v].append(u)

    stack = []
    root = None
    expect_item = True
    last = None
    for tok, pos in toks:
        if tok == "(":
            if not expect_item:
                raise NewickError(f"unexpected '(' at offset {pos}")
            v = new_node()
            if stack:
                link(stack[-1], v)
            elif root is not None:
                raise NewickError("more than one top-level tree")
            else:
                root = v
            stack.append(v)
            expect_item = True
        elif tok == ",":
            if expect_item or not stack:
                raise NewickError(f"unexpected ',' at offset {pos}")
            expect_item = True
        elif tok == ")":
            if expect_item or not stack:
                raise NewickError(f"unexpected ')' at offset {pos}")
            last = stack.pop()
            expect_item = False
        else:
            if not expect_item:
                if last is not None and last not in labels:
                    raise NewickError(f"internal node labels are not supported (offset {pos})")
                raise NewickError(f"unexpected name at offset {pos}")
            v = new_node()
            labels[v] = tok
            if stack:
                link(stack[-1], v)
            elif root is not None:
                raise NewickError("more than one top-level tree")
            else:
                root = v
            last = v
            expect_item = False
    if stack or root is None:
        raise NewickError("unbalanced parentheses")
    found = list(labels.values())
    if len(set(found)) != len(found):
        raise NewickError("duplicate leaf names")
    # suppress unlabeled nodes of degree <= 2
    changed = True
    while changed:
        changed = False
        for v in list(adj):
            if v in labels or v not in adj:
                continue
            nb = adj[v]
            if len(nb) == 2:
                x, y = nb
                adj[x].remove(v)
                adj[y].remove(v)
                link(x, y)
                del adj[v]
                changed = True
            elif len(nb) <= 1:
                for x in nb:
                    adj[x].remove(v)
                del adj[v]
                changed = True
    if names is None:
        names = found
    else:
        names = list(names)
        if sorted(names) != sorted(found):
            raise NewickError("leaf set does not match the expected taxa")
    n = len(names)
    ids = {}
    pos_of = {name: k for k, name in enumerate(names)}
    for v, name in labels.items():
        ids[v] = pos_of[name]
    nxt = n
    for v in sorted(adj):
        if v not in labels:
            ids[v] = nxt
            nxt += 1
    edges = set()
    for u, nb in adj.items():
        for v in nb:
            a, b = ids[u], ids[v]
            edges.add((min(a, b), max(a, b)))
    try:
        return PhyloTree(names, sorted(edges))
    except InvalidTree as exc:
        raise NewickError(str(exc)) from exc

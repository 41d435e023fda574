"""Plain-text formats for partitions, quartet systems and distance tables.

Partition file::

    # comment
    Block1: a b c
    Block2: d e

Taxon ids follow the order in which names first appear.

Quartet file, one quartet per line, ``a b || c d`` (strict) or ``a b | c d``
(weak).  Missing weak quartets are filled in: a cross 4-tuple with no listed
strict quartet is ``aa' | bb'`` and a within-block 4-set with none is a star.
Any within-block quartet marks the system as full.

Square matrix (PHYLIP style)::

    4
    a 0 1 2 3
    b 1 0 3 2
    ...

Table file: one or more rectangular tables, each a ``rows cols`` line, a
line of column names, then ``rows`` lines ``name v1 ... v_cols``.  A table
whose rows and columns are the same block is that block's square table.
"""

from __future__ import annotations

import itertools
import re

import numpy as np

from .core import Quartet, QuartetSystem, TaxonPartition
from .errors import DistanceError, InvalidPartition, MalformedSystem

_BLOCK_LINE = re.compile(r"^Block\s*(\d+)\s*:(.*)$")
_QUARTET_LINE = re.compile(r"^([^\s|]+)\s+([^\s|]+)\s*(\|\|?)\s*([^\s|]+)\s+([^\s|]+)$")


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


# ---------------------------------------------------------------------------
# partitions


def parse_partition(text: str) -> TaxonPartition:
    blocks = []
    for lineno, line in _content_lines(text):
        m = _BLOCK_LINE.match(line)
        if m is None:
            raise InvalidPartition(f"line {lineno}: expected 'Block<i>: names'")
        names = m.group(2).split()
        if not names:
            raise InvalidPartition(f"line {lineno}: empty block")
        blocks.append(names)
    if not blocks:
        raise InvalidPartition("no blocks found")
    return TaxonPartition.from_blocks(blocks)


def format_partition(P: TaxonPartition) -> str:
    return "".join(f"Block{i + 1}: {' '.join(P.names_of(b))}\n" for i, b in enumerate(P.blocks))


# ---------------------------------------------------------------------------
# quartet systems


def parse_quartets(text: str, P: TaxonPartition, full: bool | None = None) -> QuartetSystem:
    """Read a quartet file against a partition.

    ``full=None`` decides the class from the content.
    """
    quartets = []
    for lineno, line in _content_lines(text):
        m = _QUARTET_LINE.match(line)
        if m is None:
            raise MalformedSystem(f"line {lineno}: expected 'a b || c d' or 'a b | c d'")
        a, b, sep, c, d = m.groups()
        try:
            ids = [P.index(x) for x in (a, b, c, d)]
        except InvalidPartition as exc:
            raise MalformedSystem(f"line {lineno}: {exc}") from None
        if len(set(ids)) != 4:
            raise MalformedSystem(f"line {lineno}: quartet taxa must be distinct")
        quartets.append(Quartet.of(*ids, strict=(sep == "||")))
    return QuartetSystem.from_quartets(P, quartets, full=full, fill_weak=True)


def format_quartets(Q: QuartetSystem, weak: bool = False) -> str:
    """Strict quartets only by default, sorted by taxon name.

    Full systems always mark themselves.

    A full system without any strict within-block quartet gets the three
    weak quartets of one within-block 4-set so that reading it back keeps it
    full.
    """
    names = Q.partition.names
    lines = []
    for q in Q.quartets():
        if weak or q.strict:
            p1 = sorted(names[t] for t in q.left)
            p2 = sorted(names[t] for t in q.right)
            if p2 < p1:
                p1, p2 = p2, p1
            lines.append(f"{p1[0]} {p1[1]} {'||' if q.strict else '|'} {p2[0]} {p2[1]}")
    text = "".join(line + "\n" for line in sorted(lines))
    if Q.is_full and not weak:
        P = Q.partition
        marked = any(Q.within_array(i).any() for i in range(P.r))
        if not marked:
            for i in range(P.r):
                mem = P.members(i)
                if len(mem) >= 4:
                    a, b, c, d = mem[:4]
                    for x, y, u, v in ((a, b, c, d), (a, c, b, d), (a, d, b, c)):
                        text += f"{names[x]} {names[y]} | {names[u]} {names[v]}\n"
                    break
    return text


# ---------------------------------------------------------------------------
# distance tables


def _floats(tokens, lineno):
    try:
        return [float(x) for x in tokens]
    except ValueError:
        raise DistanceError(f"line {lineno}: non-numeric entry") from None


def parse_phylip(text: str):
    """``(names, matrix)`` from a square PHYLIP-style matrix."""
    lines = list(_content_lines(text))
    if not lines:
        raise DistanceError("empty matrix file")
    try:
        n = int(lines[0][1].split()[0])
    except ValueError:
        raise DistanceError("first line must hold the taxon count") from None
    rows = lines[1:]
    if len(rows) != n:
        raise DistanceError(f"expected {n} rows, found {len(rows)}")
    names = []
    D = np.zeros((n, n))
    for k, (lineno, line) in enumerate(rows):
        parts = line.split()
        if len(parts) != n + 1:
            raise DistanceError(f"line {lineno}: expected a name and {n} values")
        names.append(parts[0])
        D[k] = _floats(parts[1:], lineno)
    if len(set(names)) != n:
        raise DistanceError("duplicate taxon names in matrix")
    return names, D


def format_phylip(names, D) -> str:
    out = [f"{len(names)}"]
    for name, row in zip(names, np.asarray(D)):
        out.append(name + " " + " ".join(_num(v) for v in row))
    return "\n".join(out) + "\n"


def _num(v) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def parse_tables(text: str):
    """List of ``(row_names, col_names, values)``."""
    lines = list(_content_lines(text))
    tables = []
    k = 0
    while k < len(lines):
        lineno, head = lines[k]
        try:
            nr, nc = (int(x) for x in head.split())
        except ValueError:
            raise DistanceError(f"line {lineno}: expected 'rows cols'") from None
        if k + 2 + nr > len(lines):
            raise DistanceError(f"line {lineno}: table is truncated")
        cols = lines[k + 1][1].split()
        if len(cols) != nc:
            raise DistanceError(f"line {lines[k + 1][0]}: expected {nc} column names")
        rows = []
        vals = np.zeros((nr, nc))
        for e in range(nr):
            ln, line = lines[k + 2 + e]
            parts = line.split()
            if len(parts) != nc + 1:
                raise DistanceError(f"line {ln}: expected a name and {nc} values")
            rows.append(parts[0])
            vals[e] = _floats(parts[1:], ln)
        tables.append((rows, cols, vals))
        k += 2 + nr
    return tables


def format_tables(tables) -> str:
    out = []
    for rows, cols, vals in tables:
        out.append(f"{len(rows)} {len(cols)}")
        out.append(" ".join(cols))
        for name, row in zip(rows, np.asarray(vals)):
            out.append(name + " " + " ".join(_num(v) for v in row))
    return "\n".join(out) + "\n"


def tables_by_block(tables, P: TaxonPartition):
    """Sort parsed tables into cross tables ``{(i, j): D}`` and square ones ``{i: D}``.

    Rows and columns are reordered into the id order of their blocks.
    """
    cross = {}
    within = {}
    for rows, cols, vals in tables:
        try:
            rid = [P.index(x) for x in rows]
            cid = [P.index(x) for x in cols]
        except InvalidPartition as exc:
            raise DistanceError(str(exc)) from None
        bi = {P.block_of[t] for t in rid}
        bj = {P.block_of[t] for t in cid}
        if len(bi) != 1 or len(bj) != 1:
            raise DistanceError("each table must have the rows of one block and the columns of one block")
        i, j = bi.pop(), bj.pop()
        if sorted(rid) != P.members(i) or sorted(cid) != P.members(j):
            raise DistanceError(f"table for blocks {i + 1},{j + 1} must list every member of both blocks")
        D = vals[np.ix_(np.argsort(rid), np.argsort(cid))]
        if i == j:
            key, store = i, within
        else:
            if i > j:
                i, j, D = j, i, D.T
            key, store = (i, j), cross
        if key in store:
            raise DistanceError(f"two tables for blocks {key}")
        store[key] = D
    return cross, within


def block_tables(D, P: TaxonPartition, full: bool = False):
    """Split a square matrix into the table list :func:`format_tables` writes."""
    out = []
    pairs = list(itertools.combinations(range(P.r), 2))
    if full:
        pairs = [(i, i) for i in range(P.r)] + pairs
    for i, j in pairs:
        mi, mj = P.members(i), P.members(j)
        out.append(([P.names[t] for t in mi], [P.names[t] for t in mj], np.asarray(D)[np.ix_(mi, mj)]))
    return out

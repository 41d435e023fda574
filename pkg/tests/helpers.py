"""Shared fixtures and strategies for the test suite."""

import numpy as np
from hypothesis import strategies as st

from mpquartet.core import Quartet, QuartetSystem, TaxonPartition, dedup_classes
from mpquartet.generate import random_partition, random_tree

# nine taxa in four blocks, with twelve listed quartets
WORKED_BLOCKS = [list("abc"), list("de"), list("fg"), list("hi")]
WORKED_QUARTETS = "ab|de ad||ce bd||ce ag||bf ag||cf bg||cf ab|hi ac|hi bc|hi dg||ef di||eh fi||gh".split()
WORKED_DISPLAY = ["abdg", "ag", "di", "gh"]
WORKED_LAMINAR = ["abdg", "ag", "abcdfgi", "fi"]


def worked_partition():
    return TaxonPartition.from_blocks(WORKED_BLOCKS)


def parse_short(text, P):
    """``"ab||cd"`` or ``"ab|cd"`` with one-letter names."""
    strict = "||" in text
    left, right = text.split("||") if strict else text.split("|")
    ix = P.index
    return Quartet.of(ix(left[0]), ix(left[1]), ix(right[0]), ix(right[1]), strict)


def worked_quartets(P=None):
    P = P or worked_partition()
    return [parse_short(s, P) for s in WORKED_QUARTETS]


def worked_system():
    P = worked_partition()
    return QuartetSystem.from_quartets(P, worked_quartets(P), fill_weak=True)


def masks(P, words):
    return [P.mask(w) for w in words]


def classes_of(P, words, weak=False):
    return set(dedup_classes(masks(P, words), P, weak=weak))


@st.composite
def tree_instances(draw, n_min=4, n_max=8, r_min=2, r_max=4, resolution=(0.3, 1.0)):
    """A random partition and tree, driven by a hypothesis-drawn seed."""
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    r = draw(st.integers(r_min, r_max))
    n = draw(st.integers(max(n_min, 2 * r), max(n_max, 2 * r)))
    res = draw(st.floats(*resolution))
    P = random_partition(n, r, rng)
    T = random_tree(n, rng, P.names, res)
    return P, T, rng


def random_cut_family(rng, weak=False, max_bits=20, n_max=8):
    """A random partition and a family of pairwise distinct (weak) cut classes.

    Half of the draws start from the splits of a random tree, which are
    usually laminarizable, and replace some members by random cuts.
    """
    from mpquartet.core import cut_class, popcount
    from mpquartet.oracle import representative_bits
    from mpquartet.tree import laminar_from_tree

    while True:
        r = int(rng.integers(1 if weak else 2, 5))
        n = int(rng.integers(max(4, 2 * r), max(n_max, 2 * r) + 1))
        P = random_partition(n, r, rng)
        pool = []
        if rng.random() < 0.5:
            pool = list(laminar_from_tree(random_tree(n, rng, P.names, 0.8)))
            rng.shuffle(pool)
        k = int(rng.integers(1, 6))
        out = []
        seen = set()
        tries = 0
        while len(out) < k and tries < 200:
            tries += 1
            if pool and rng.random() < 0.7:
                x = pool.pop()
            else:
                x = int(rng.integers(1, 1 << n))
            c = cut_class(x, P, weak)
            if c is None or c in seen or popcount(c.span) == 0:
                continue
            seen.add(c)
            out.append(c)
        if out and representative_bits(out, P) <= max_bits:
            return P, out

import itertools

import numpy as np
import pytest
from hypothesis import given

from mpquartet.core import Quartet, TaxonPartition, dedup_classes, is_laminar
from mpquartet.errors import DuplicateBipartition, InvalidTree, NewickError, NotLaminar, TrivialSplit
from mpquartet.oracle import enumerate_trees
from mpquartet.tree import (
    PhyloTree,
    displayed_system,
    family_displays,
    laminar_from_tree,
    parse_newick,
    restrict_to_four,
    same_topology,
    star_tree,
    system_of_family,
    to_newick,
    tree_displays,
    tree_from_laminar,
)

from helpers import WORKED_DISPLAY, WORKED_LAMINAR, masks, tree_instances

TEN = list("abcdefghij")
# a ten-leaf tree in which a, c, d, f meet at one node and {a, c} is cut off
# from {g, i}; used for the restriction examples below
FIG_TREE = "(a,c,d,f,((b,e),(g,h),(i,j)));"


def q(P, word, strict=True):
    ix = P.index
    return Quartet.of(ix(word[0]), ix(word[1]), ix(word[2]), ix(word[3]), strict)


# -- construction ------------------------------------------------------------


def test_star_from_empty_family():
    T = tree_from_laminar([], 5, list("abcde"))
    assert T == star_tree(list("abcde"))
    assert laminar_from_tree(T) == []
    assert to_newick(T) == "(a,b,c,d,e);"


def test_worked_laminar_tree(wp):
    L = masks(wp, WORKED_LAMINAR)
    T = tree_from_laminar(L, wp.n, wp.names)
    assert to_newick(T) == "(a,(b,(c,(e,h),(f,i)),d),g);"
    got = {frozenset(wp.names_of(s)) for s in laminar_from_tree(T)}
    every = frozenset(wp.names)
    want = set()
    for w in WORKED_LAMINAR:
        s = frozenset(w)
        want.add(s if "a" not in s else every - s)
    assert got == want


def test_caterpillar_from_chain():
    names = list("abcdef")
    L = [0b000011, 0b000111, 0b001111]
    T = tree_from_laminar(L, 6, names)
    assert to_newick(T) == "(a,b,(c,(d,(e,f))));"
    matches = [S for S in enumerate_trees(6, names) if S == T]
    assert len(matches) == 1


def test_construction_errors():
    names = list("abcde")
    with pytest.raises(TrivialSplit):
        tree_from_laminar([0b1], 5, names)
    with pytest.raises(NotLaminar):
        tree_from_laminar([0b00011, 0b00110], 5, names)
    with pytest.raises(DuplicateBipartition):
        tree_from_laminar([0b00011, 0b11100], 5, names)
    with pytest.raises(InvalidTree):
        PhyloTree(list("abc"), [(0, 1), (1, 2), (2, 0)])


@pytest.mark.parametrize("n", range(1, 8))
def test_laminar_round_trip_and_newick_round_trip(n):
    names = [chr(ord("a") + k) for k in range(n)]
    seen = set()
    for T in enumerate_trees(n, names):
        L = laminar_from_tree(T)
        assert is_laminar(L)
        again = tree_from_laminar(L, n, names)
        assert again == T
        text = to_newick(T)
        assert parse_newick(text, names) == T
        seen.add(text)
    assert len(seen) == [1, 1, 1, 4, 26, 236, 2752][n - 1]


def test_same_topology_ignores_internal_ids():
    a = PhyloTree(list("abcd"), [(0, 4), (1, 4), (4, 5), (2, 5), (3, 5)])
    b = PhyloTree(list("abcd"), [(0, 5), (1, 5), (5, 4), (2, 4), (3, 4)])
    assert same_topology(a, b) and hash(a) == hash(b)


# -- restriction and display ---------------------------------------------------


def test_figure_style_restrictions():
    T = parse_newick(FIG_TREE, TEN)
    P = TaxonPartition.from_blocks([TEN])
    assert restrict_to_four(T, *[P.index(x) for x in "acgi"]) == q(P, "acgi")
    assert restrict_to_four(T, *[P.index(x) for x in "acdf"]) is None
    assert tree_displays(T, q(P, "acgi"))
    assert tree_displays(T, q(P, "acgi", False))
    for w in ("acdf", "adcf", "afcd"):
        assert tree_displays(T, q(P, w, False))
        assert not tree_displays(T, q(P, w))


def test_quartet_tree_display():
    T = parse_newick("((a,b),(c,d));", list("abcd"))
    assert to_newick(T) == "(a,b,(c,d));"
    assert laminar_from_tree(T) == [0b1100]
    assert restrict_to_four(T, 0, 1, 2, 3) == Quartet.of(0, 1, 2, 3)
    assert not tree_displays(T, Quartet.of(0, 2, 1, 3, strict=False))
    assert tree_displays(T, Quartet.of(0, 1, 2, 3, strict=False))
    star = star_tree(list("abcd"))
    for quad in itertools.permutations(range(4)):
        assert restrict_to_four(star, *quad) is None


def test_worked_family_displays(wp, wq):
    F = masks(wp, WORKED_DISPLAY)
    assert family_displays(F, wq)
    assert family_displays(masks(wp, WORKED_LAMINAR), wq)
    for k in range(len(F)):
        assert not family_displays(F[:k] + F[k + 1:], wq)


def test_empty_family_displays_all_weak():
    P = TaxonPartition.from_blocks([list("abc"), list("de")])
    from mpquartet.core import QuartetSystem

    assert family_displays([], QuartetSystem(P))


@pytest.mark.parametrize("n", range(4, 8))
def test_tree_display_agrees_with_family_display(n):
    names = [chr(ord("a") + k) for k in range(n)]
    rng = np.random.default_rng(n)
    for T in itertools.islice(enumerate_trees(n, names), 0, None, 7):
        L = laminar_from_tree(T)
        D = T.leaf_distances()
        for quad in itertools.combinations(range(n), 4):
            a, b, c, d = (int(x) for x in rng.permutation(quad))
            qq = Quartet.of(a, b, c, d)
            separated = any(
                ((x >> a) & 1) == ((x >> b) & 1) != ((x >> c) & 1) == ((x >> d) & 1) for x in L
            )
            assert tree_displays(T, qq) == separated
            # at most one of the three strict quartets
            shown = sum(tree_displays(T, Quartet.of(*p)) for p in ((a, b, c, d), (a, c, b, d), (a, d, b, c)))
            assert shown <= 1
            if tree_displays(T, qq.weak()):
                assert not tree_displays(T, Quartet.of(a, c, b, d))
                assert not tree_displays(T, Quartet.of(a, d, b, c))
        assert D.shape == (n, n)


@given(tree_instances(n_max=9))
def test_laminar_family_displays_its_tree_system(inst):
    P, T, _ = inst
    L = laminar_from_tree(T)
    for full in (False, True):
        Q = displayed_system(T, P, full=full)
        assert family_displays(L, Q)
        assert system_of_family(L, P, full=full) == Q


@given(tree_instances(n_max=9))
def test_every_cross_tuple_gets_exactly_one_answer(inst):
    P, T, _ = inst
    Q = displayed_system(T, P)
    for i, j in itertools.combinations(range(P.r), 2):
        A = Q.cross_array(i, j)
        assert set(np.unique(A)) <= {-1, 0, 1}
        assert np.array_equal(A, -A.transpose(1, 0, 2, 3))


@given(tree_instances(n_max=9))
def test_classes_of_tree_splits_display(inst):
    P, T, _ = inst
    classes = dedup_classes(laminar_from_tree(T), P)
    assert family_displays(classes, displayed_system(T, P))


# -- Newick --------------------------------------------------------------------


def test_newick_small_cases():
    assert to_newick(star_tree(["a"])) == "a;"
    assert to_newick(star_tree(["b", "a"])) == "(a,b);"
    assert to_newick(parse_newick("(d,(c,b),a);")) == "(a,(b,c),d);"
    # a rooted binary root is suppressed
    assert parse_newick("((a,b),(c,(d,e)));") == parse_newick("(a,b,(c,(d,e)));")


@pytest.mark.parametrize(
    "text",
    ["(a,b", "(a,b);x;", "(a,a,b);", "(a,(b,c)", "(a,b,c)", "(a,b,$);", ""],
)
def test_newick_errors(text):
    with pytest.raises((NewickError, InvalidTree)):
        parse_newick(text)


def test_newick_name_mismatch():
    with pytest.raises((NewickError, InvalidTree)):
        parse_newick("(a,b,c);", ["a", "b", "d"])

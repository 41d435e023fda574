"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the terminal summary.
"""

import itertools
import random
import statistics
import time

import numpy as np

from mpquartet.bipartite import random_chooser
from mpquartet.core import TaxonPartition, cut_class, dedup_classes, nonlaminar_witness
from mpquartet.errors import NotLaminarizable
from mpquartet.full_system import full_display_family
from mpquartet.generate import generate, random_lengths, random_partition, random_tree, scaled_tables
from mpquartet.ingest import path_metric, quartets_from_all_distances, quartets_from_block_distances
from mpquartet.io import format_quartets
from mpquartet.laminarize import full_laminarize, laminarize
from mpquartet.multipartite import block_order, display_family
from mpquartet.oracle import compatible_oracle, enumerate_trees, laminarizable_oracle
from mpquartet.pipeline import solve, solve_complete
from mpquartet.tree import displayed_system, parse_newick, to_newick, tree_displays

from helpers import WORKED_DISPLAY, WORKED_LAMINAR, classes_of, random_cut_family, worked_quartets, worked_system

RESULTS = []


def report(capsys, name, ok, detail):
    line = f"[acceptance] {'PASS' if ok else 'FAIL'}  {name}: {detail}"
    RESULTS.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def name_key(c, P):
    """A class as an unordered pair of name sets, independent of taxon ids."""
    return frozenset(frozenset(P.names_of(s)) for s in c.sides)


def shuffled_order(P, rng):
    """A decreasing-size block order with ties shuffled."""
    order = block_order(P)
    out = []
    for _, grp in itertools.groupby(order, key=lambda i: bin(P.blocks[i]).count("1")):
        ids = list(grp)
        rng.shuffle(ids)
        out.extend(ids)
    return out


def relabel(P, T, rng):
    """The same partition and tree with taxa renumbered at random."""
    names = list(P.names)
    rng.shuffle(names)
    blocks = [sum(1 << names.index(x) for x in P.names_of(b)) for b in P.blocks]
    P2 = TaxonPartition(names, blocks)
    return P2, parse_newick(to_newick(T), names)


# -- worked example ------------------------------------------------------------


def test_worked_example_end_to_end(capsys):
    t0 = time.perf_counter()
    Q = worked_system()
    P = Q.partition
    rep = solve_complete(Q)
    elapsed = time.perf_counter() - t0
    display_ok = set(rep.display_family) == classes_of(P, WORKED_DISPLAY)
    laminar_ok = set(dedup_classes(rep.laminar, P)) == classes_of(P, WORKED_LAMINAR)
    shown = sum(tree_displays(rep.tree, q) for q in worked_quartets(P)) if rep.compatible else 0
    ok = rep.compatible and display_ok and laminar_ok and shown == 12 and elapsed < 1.0
    report(
        capsys,
        "worked example",
        ok,
        f"compatible={rep.compatible} display={display_ok} laminar={laminar_ok} "
        f"quartets shown={shown}/12 time={elapsed:.3f}s tree={rep.newick}",
    )


# -- verdicts against the exhaustive oracle --------------------------------------

CLASSES = [
    ("complete bipartite", "complete", 2),
    ("complete r=3", "complete", 3),
    ("complete r=4", "complete", 4),
    ("full r=1", "full", 1),
    ("full r=2", "full", 2),
    ("full r=3", "full", 3),
]


def test_oracle_verdict_equivalence(capsys):
    per_class = 500
    t0 = time.perf_counter()
    parts = []
    bad = []
    for label, mode, r in CLASSES:
        agree = compatible = 0
        for s in range(per_class):
            rng = np.random.default_rng([r, s, mode == "full"])
            n = int(rng.integers(max(4, 2 * r), 9))
            noise = int(rng.choice([0, 0, 1, 2, 4]))
            inst = generate(int(rng.integers(2**31)), n, r, mode, noise, via_distances=bool(s % 2))
            truth = compatible_oracle(inst.system) is not None
            compatible += truth
            if solve(inst.system).compatible == truth:
                agree += 1
            else:
                bad.append((label, inst.seed))
        parts.append(f"{label} {agree}/{per_class} ({compatible} compatible)")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 600
    report(capsys, "oracle verdicts", ok, "; ".join(parts) + f"; time={elapsed:.1f}s; mismatches={bad[:5]}")


# -- round trip over enumerated trees ---------------------------------------------


def test_round_trip_on_enumerated_trees(capsys):
    rng = np.random.default_rng(2024)
    cases = failures = 0
    for n in range(4, 8):
        names = [chr(ord("a") + k) for k in range(n)]
        stride = 1 if n < 7 else 9
        for T in itertools.islice(enumerate_trees(n, names), 0, None, stride):
            for r in (2, 3):
                if n < 2 * r:
                    continue
                P = random_partition(n, r, rng, names)
                Q = displayed_system(T, P)
                rep = solve_complete(Q)
                cases += 1
                if not (rep.compatible and displayed_system(rep.tree, P) == Q):
                    failures += 1
    ok = cases >= 200 and failures == 0
    report(capsys, "round trip", ok, f"{cases - failures}/{cases} trees re-solved to the same system")


# -- uniqueness of the displaying family -------------------------------------------


def test_uniqueness_under_choices_and_relabelling(capsys):
    seeds = 200
    strict_fail = weak_fail = 0
    for s in range(seeds):
        rng = np.random.default_rng([7, s])
        prng = random.Random(s)
        r = int(rng.integers(2, 5))
        n = int(rng.integers(2 * r, max(2 * r, 9) + 1))
        P = random_partition(n, r, rng)
        T = random_tree(n, rng, P.names, float(rng.uniform(0.3, 1.0)))
        Q = displayed_system(T, P)
        base = {name_key(c, P) for c in display_family(Q)}
        P2, T2 = relabel(P, T, prng)
        Q2 = displayed_system(T2, P2)
        again = display_family(Q2, chooser=random_chooser(prng), order=shuffled_order(P2, prng))
        if {name_key(c, P2) for c in again} != base:
            strict_fail += 1
        # the weak-cut analogue on full systems
        Qf = displayed_system(T, P, full=True)
        fbase = {name_key(c, P) for c in full_display_family(Qf)}
        Qf2 = displayed_system(T2, P2, full=True)
        fagain = full_display_family(Qf2, chooser=random_chooser(prng), order=shuffled_order(P2, prng))
        if {name_key(c, P2) for c in fagain} != fbase:
            weak_fail += 1
    ok = strict_fail == 0 and weak_fail == 0
    report(
        capsys,
        "uniqueness",
        ok,
        f"complete {seeds - strict_fail}/{seeds}, full {seeds - weak_fail}/{seeds} families equal up to equivalence",
    )


# -- laminarizer against exhaustive search -------------------------------------------


def witness_triples(rng, count):
    """Three classes on blocks i, j, k built from one part of each block."""
    out = []
    while len(out) < count:
        r = int(rng.integers(3, 5))
        n = int(rng.integers(2 * r, 10))
        P = random_partition(n, r, rng)
        i, j, k = (int(x) for x in rng.permutation(r)[:3])
        part = {}
        for b in (i, j, k):
            members = P.members(b)
            size = int(rng.integers(1, len(members)))
            part[b] = sum(1 << int(t) for t in rng.permutation(members)[:size])
        X, Y, Z = part[i] | part[j], part[i] | part[k], part[j] | part[k]
        W = part[i] | part[j] | part[k]
        assert nonlaminar_witness(X, Y, Z, W, i, j, k, P)
        out.append((P, [X, Y, Z]))
    return out


def test_laminarizer_matches_exhaustive_search(capsys):
    rng = np.random.default_rng(31337)
    cases = mismatches = positives = 0
    for _ in range(300):
        P, fam = random_cut_family(rng, max_bits=20)
        try:
            laminarizable_oracle(fam, P)
            truth = True
        except NotLaminarizable:
            truth = False
        try:
            L = laminarize(fam, P)
            got = [cut_class(y, P) for y in L] == list(fam)
        except NotLaminarizable:
            got = False
        cases += 1
        positives += truth
        mismatches += got != truth
    triples = rejected = 0
    for P, fam in witness_triples(rng, 50):
        triples += 1
        try:
            laminarize(fam, P)
        except NotLaminarizable:
            try:
                laminarizable_oracle(fam, P)
            except NotLaminarizable:
                rejected += 1
    ok = mismatches == 0 and cases >= 300 and rejected == triples
    report(
        capsys,
        "laminarizer",
        ok,
        f"{cases - mismatches}/{cases} verdicts agree ({positives} laminarizable); "
        f"{rejected}/{triples} witness triples rejected",
    )


def test_gadget_reduction_matches_weak_search(capsys):
    rng = np.random.default_rng(4242)
    cases = mismatches = 0
    for _ in range(150):
        P, fam = random_cut_family(rng, weak=True, max_bits=20)
        try:
            laminarizable_oracle(fam, P, weak=True)
            truth = True
        except NotLaminarizable:
            truth = False
        try:
            L = full_laminarize(fam, P)
            got = [cut_class(y, P, True) for y in L] == list(fam)
        except NotLaminarizable:
            got = False
        cases += 1
        mismatches += got != truth
    ok = mismatches == 0 and cases >= 100
    report(capsys, "gadget reduction", ok, f"{cases - mismatches}/{cases} weak families agree")


# -- measurement invariance -------------------------------------------------------


def test_scaling_invariance_is_byte_identical(capsys):
    rng = np.random.default_rng(99)
    cases = diffs = 0
    for _ in range(120):
        r = int(rng.integers(2, 5))
        n = int(rng.integers(2 * r, 11))
        P = random_partition(n, r, rng)
        T = random_tree(n, rng, P.names, float(rng.uniform(0.3, 1.0)))
        D = path_metric(T, random_lengths(T, rng))
        plain, pw, _ = scaled_tables(D, P, None)
        scaled, sw, _ = scaled_tables(D, P, rng)
        a = format_quartets(quartets_from_block_distances(plain, P))
        b = format_quartets(quartets_from_block_distances(scaled, P))
        c = format_quartets(quartets_from_all_distances(plain, pw, P))
        d = format_quartets(quartets_from_all_distances(scaled, sw, P))
        cases += 1
        diffs += (a.encode() != b.encode()) or (c.encode() != d.encode())
    ok = diffs == 0 and cases >= 100
    report(capsys, "measurement invariance", ok, f"{cases - diffs}/{cases} metrics give identical text")


# -- growth of the running time ----------------------------------------------------


def test_running_time_growth(capsys):
    sizes = (20, 40, 80)
    medians = []
    for n in sizes:
        times = []
        for s in range(5):
            inst = generate(500 + s, n, 4, "complete")
            t0 = time.perf_counter()
            rep = solve_complete(inst.system)
            times.append(time.perf_counter() - t0)
            assert rep.compatible
        medians.append(statistics.median(times))
    slope = np.polyfit(np.log(sizes), np.log(medians), 1)[0]
    ok = slope <= 4.5
    detail = ", ".join(f"n={n}: {m * 1000:.1f}ms" for n, m in zip(sizes, medians))
    report(capsys, "running time growth", ok, f"{detail}; log-log slope={slope:.2f}")


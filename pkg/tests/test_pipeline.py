import json

import numpy as np
import pytest

from mpquartet.core import QuartetSystem, TaxonPartition
from mpquartet.errors import MalformedSystem
from mpquartet.generate import generate
from mpquartet.oracle import compatible_oracle
from mpquartet.pipeline import solve, solve_complete, solve_full
from mpquartet.tree import displayed_system, star_tree

from helpers import WORKED_LAMINAR, classes_of


def test_worked_example(wp, wq):
    rep = solve_complete(wq)
    assert rep.compatible
    assert rep.newick == "(a,(b,(c,(e,h),(f,i)),d),g);"
    assert set(rep.display_family) == classes_of(wp, ["abdg", "ag", "di", "gh"])
    assert {c for c in classes_of(wp, [])} == set()
    from mpquartet.core import dedup_classes

    assert set(dedup_classes(rep.laminar, wp)) == classes_of(wp, WORKED_LAMINAR)
    assert rep.phases == {"Displaying": "ok", "Laminarization": "ok", "Verification": "ok"}
    js = rep.to_json(wp.names)
    json.dumps(js)
    assert js["newick"] == rep.newick


def test_all_weak_pair_gives_star():
    P = TaxonPartition.from_blocks([list("abc"), list("de")])
    rep = solve_complete(QuartetSystem(P))
    assert rep.compatible and rep.tree == star_tree(P.names)


def test_class_mismatch_is_rejected(wq):
    with pytest.raises(MalformedSystem):
        solve_full(wq)
    P = TaxonPartition.from_blocks([list("abcd")])
    with pytest.raises(MalformedSystem):
        solve_complete(QuartetSystem(P, within={}))


def test_single_block_full_defers_to_reconstruction():
    inst = generate(2, 7, 1, "full")
    rep = solve(inst.system)
    assert rep.compatible and "FullReconstruction" in rep.phases


def test_incompatible_report_carries_phase_and_witness():
    seen = set()
    for seed in range(60):
        inst = generate(seed, 8, 3, "complete", noise=3)
        rep = solve(inst.system)
        assert rep.compatible == (compatible_oracle(inst.system) is not None)
        if not rep.compatible:
            assert rep.tree is None and rep.phase and rep.message
            seen.add(rep.phase)
            json.dumps(rep.to_json(inst.partition.names))
        else:
            assert displayed_system(rep.tree, inst.partition) == inst.system
    assert seen


def test_laminarization_failures_report_a_witness():
    # noisy three-block systems whose display family admits no laminar choice
    found = 0
    for seed in range(400):
        inst = generate(seed, 8, 3, "complete", noise=2)
        rep = solve(inst.system)
        if rep.phase != "Laminarization":
            continue
        found += 1
        assert compatible_oracle(inst.system) is None
        assert rep.witness and all(c in rep.display_family for c in rep.witness)
        js = rep.to_json(inst.partition.names)
        assert all(isinstance(s, list) for s in js["witness"])
    assert found


def test_verification_never_skipped(monkeypatch):
    import mpquartet.pipeline as pl

    inst = generate(0, 8, 2, "complete")
    real = pl.tree_from_laminar
    monkeypatch.setattr(pl, "tree_from_laminar", lambda L, n, names: star_tree(names))
    rep = pl.solve_complete(inst.system)
    if any(True for _ in inst.system.strict_quartets()):
        assert not rep.compatible and rep.phase == "Verification"
    monkeypatch.setattr(pl, "tree_from_laminar", real)

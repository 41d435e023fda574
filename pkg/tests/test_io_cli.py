import json

import numpy as np
import pytest

from mpquartet import io
from mpquartet.cli import main
from mpquartet.core import TaxonPartition, cut_class
from mpquartet.errors import DistanceError, InvalidPartition, MalformedSystem
from mpquartet.generate import generate
from mpquartet.ingest import path_metric
from mpquartet.tree import parse_newick

from helpers import WORKED_BLOCKS, WORKED_DISPLAY, WORKED_QUARTETS, classes_of

PARTITION = "".join(f"Block{k + 1}: {' '.join(b)}\n" for k, b in enumerate(WORKED_BLOCKS))


def quartet_text():
    lines = ["# worked example"]
    for w in WORKED_QUARTETS:
        strict = "||" in w
        left, right = w.split("||") if strict else w.split("|")
        lines.append(f"{left[0]} {left[1]} {'||' if strict else '|'} {right[0]} {right[1]}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def files(tmp_path):
    (tmp_path / "p.txt").write_text(PARTITION)
    (tmp_path / "q.txt").write_text(quartet_text())
    return tmp_path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out.strip()


# -- formats -------------------------------------------------------------------


def test_partition_round_trip():
    P = io.parse_partition(PARTITION)
    assert P == TaxonPartition.from_blocks(WORKED_BLOCKS)
    assert io.format_partition(P) == PARTITION
    with pytest.raises(InvalidPartition):
        io.parse_partition("Group1: a b\n")
    with pytest.raises(InvalidPartition):
        io.parse_partition("# nothing\n")


def test_quartet_round_trip(wq):
    P = wq.partition
    Q = io.parse_quartets(quartet_text(), P)
    assert Q == wq
    assert io.parse_quartets(io.format_quartets(Q), P) == Q
    assert io.parse_quartets(io.format_quartets(Q, weak=True), P) == Q


@pytest.mark.parametrize(
    "text",
    ["a b c d\n", "a b || d\n", "a b || c z\n", "a a || d e\n", "a d || c e\na c || d e\n"],
)
def test_bad_quartet_files(text, wp):
    with pytest.raises(MalformedSystem):
        io.parse_quartets(text, wp)


def test_full_marker_survives_round_trip():
    inst = generate(3, 7, 1, "full")
    P = inst.partition
    Q = inst.system
    assert io.parse_quartets(io.format_quartets(Q), P) == Q
    from mpquartet.core import QuartetSystem

    star = QuartetSystem(P, within={})
    assert io.parse_quartets(io.format_quartets(star), P).is_full


def test_phylip_and_tables_round_trip():
    P = TaxonPartition.from_blocks([list("abc"), list("de"), list("fg")])
    T = parse_newick("((a,d),(b,f),(c,(e,g)));", P.names)
    D = path_metric(T, np.linspace(0.5, 2.0, len(T.edges)))
    names, D2 = io.parse_phylip(io.format_phylip(P.names, D))
    assert names == list(P.names) and np.array_equal(D, D2)
    tabs = io.parse_tables(io.format_tables(io.block_tables(D, P, full=True)))
    cross, within = io.tables_by_block(tabs, P)
    assert sorted(cross) == [(0, 1), (0, 2), (1, 2)] and sorted(within) == [0, 1, 2]
    assert np.array_equal(cross[0, 2], D[np.ix_(P.members(0), P.members(2))])


def test_tables_reordered_and_transposed():
    P = TaxonPartition.from_blocks([list("ab"), list("cd")])
    text = "2 2\nb a\nd 1 2\nc 3 4\n"
    cross, _ = io.tables_by_block(io.parse_tables(text), P)
    # rows c, d; columns a, b after transposing
    assert cross[0, 1].tolist() == [[4, 2], [3, 1]]


@pytest.mark.parametrize(
    "text",
    ["2\na 0 1\n", "x\na 0\n", "2\na 0 1\na 1 0\n", "2\na 0 q\nb 1 0\n"],
)
def test_bad_phylip(text):
    with pytest.raises(DistanceError):
        io.parse_phylip(text)


def test_bad_tables():
    P = TaxonPartition.from_blocks([list("ab"), list("cd")])
    with pytest.raises(DistanceError):
        io.parse_tables("2 2\na b\nc 1 2\n")
    with pytest.raises(DistanceError):
        io.tables_by_block(io.parse_tables("1 2\nc d\na 1 2\n"), P)
    with pytest.raises(DistanceError):
        io.tables_by_block(io.parse_tables("2 2\na c\na 1 2\nb 1 2\n"), P)


# -- command line ----------------------------------------------------------------


def test_solve_worked_example(files, capsys):
    code, out = run(["solve", files / "q.txt", "-p", files / "p.txt", "--report", files / "r.json"], capsys)
    assert code == 0
    assert out == "(a,(b,(c,(e,h),(f,i)),d),g);"
    rep = json.loads((files / "r.json").read_text())
    assert rep["compatible"] and rep["phases"]["Verification"] == "ok"
    P = io.parse_partition(PARTITION)
    got = {cut_class(P.mask(x), P) for x in rep["display_family"]}
    assert got == classes_of(P, WORKED_DISPLAY)
    assert rep["newick"] == out


def test_parallel_flag(files, capsys):
    code, out = run(["solve", files / "q.txt", "-p", files / "p.txt", "--parallel", "3"], capsys)
    assert code == 0 and out == "(a,(b,(c,(e,h),(f,i)),d),g);"


def test_check_and_oracle(files, capsys):
    tree = "(a,(b,(c,(e,h),(f,i)),d),g);"
    assert run(["check", files / "q.txt", "-p", files / "p.txt", "--tree", tree], capsys) == (0, "displays")
    code, out = run(["check", files / "q.txt", "-p", files / "p.txt", "--tree", "(a,b,c,d,e,f,g,h,i);"], capsys)
    assert code == 1 and out.startswith("does not display")
    assert run(["oracle", files / "q.txt", "-p", files / "p.txt"], capsys) == (0, tree)


def test_incompatible_and_malformed_exit_codes(files, capsys):
    (files / "bad.txt").write_text("a d || c\n")
    assert run(["solve", files / "bad.txt", "-p", files / "p.txt"], capsys)[0] == 2
    # swapping ad||ce for ae||cd leaves no displaying tree
    (files / "q2.txt").write_text(quartet_text().replace("a d || c e", "a e || c d"))
    code, out = run(["solve", files / "q2.txt", "-p", files / "p.txt"], capsys)
    assert code == 1 and out.startswith("incompatible")
    assert run(["oracle", files / "q2.txt", "-p", files / "p.txt"], capsys)[0] == 1
    assert run(["solve", files / "missing.txt", "-p", files / "p.txt"], capsys)[0] == 2


def test_gen_and_from_dist(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("QMS_SEED", raising=False)
    for mode in ("complete", "full"):
        d = tmp_path / mode
        code, out = run(["gen", "--n", 8, "--r", 3, "--mode", mode, "--seed", 11, "--via-distances", "-o", d], capsys)
        assert code == 0 and "seed 11" in out
        meta = json.loads((d / "instance.json").read_text())
        assert meta["seed"] == 11
        extra = ["--full"] if mode == "full" else []
        code, out = run(
            ["from-dist", "-p", d / "partition.txt", "--tables", d / "tables.txt", "--emit-quartets", d / "e.txt"] + extra,
            capsys,
        )
        assert code == 0
        assert (d / "e.txt").read_text() == (d / "quartets.txt").read_text()
        code, out2 = run(["solve", d / "quartets.txt", "-p", d / "partition.txt"], capsys)
        assert code == 0 and out2 == out
        source = (d / "tree.nwk").read_text().strip()
        assert run(["check", d / "quartets.txt", "-p", d / "partition.txt", "--tree", d / "tree.nwk"], capsys)[0] == 0
        assert source.endswith(";")


def test_from_dist_matrix(tmp_path, capsys):
    P = TaxonPartition.from_blocks([list("abc"), list("de"), list("fg")])
    T = parse_newick("((a,d),(b,f),(c,(e,g)));", P.names)
    D = path_metric(T)
    (tmp_path / "p.txt").write_text(io.format_partition(P))
    # rows in a different order from the partition
    order = [6, 0, 5, 1, 4, 2, 3]
    (tmp_path / "m.phy").write_text(io.format_phylip([P.names[k] for k in order], D[np.ix_(order, order)]))
    code, out = run(["from-dist", "-p", tmp_path / "p.txt", "--matrix", tmp_path / "m.phy", "--exact", "--full"], capsys)
    assert code == 0
    # the solver's tree may be less resolved but must induce the same system
    from mpquartet.tree import displayed_system

    S = parse_newick(out, P.names)
    assert displayed_system(S, P, full=True) == displayed_system(T, P, full=True)


def test_seed_env_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QMS_SEED", "42")
    code, out = run(["gen", "--n", 6, "--r", 2, "--seed", 1, "-o", tmp_path / "g"], capsys)
    assert code == 0 and out.startswith("seed 42")

"""Command line front end.

Subcommands::

    mpquartet solve QUARTETS -p PARTITION [--full | --complete] [--report FILE] [--parallel N]
    mpquartet from-dist -p PARTITION (--matrix FILE | --tables FILE) [--full] [--eps E | --exact]
    mpquartet check QUARTETS -p PARTITION --tree NEWICK
    mpquartet gen --n N --r R [--mode complete|full] [--noise K] [--seed S] [--via-distances] -o DIR
    mpquartet oracle QUARTETS -p PARTITION [--allow-exponential]

File formats are described in :mod:`mpquartet.io`.  ``--tree`` takes a
Newick string or a file holding one.

Exit codes: 0 compatible (or the tree displays the system), 1 incompatible,
2 malformed input, 3 an exhaustive search cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .errors import CapExceeded, DistanceError, QuartetError
from .generate import generate
from .ingest import DEFAULT_EPS, quartets_from_all_distances, quartets_from_block_distances, system_from_metric
from .oracle import compatible_oracle
from .pipeline import solve
from .tree import displayed_system, first_mismatch, parse_newick, to_newick

EXIT_OK = 0
EXIT_INCOMPATIBLE = 1
EXIT_MALFORMED = 2
EXIT_CAP = 3


def _read(path) -> str:
    return Path(path).read_text()


def _full_flag(args):
    if getattr(args, "full", False):
        return True
    if getattr(args, "complete", False):
        return False
    return None


def _load_system(args):
    P = io.parse_partition(_read(args.partition))
    return io.parse_quartets(_read(args.quartets), P, full=_full_flag(args))


def _run_solve(Q, args, out) -> int:
    executor = ThreadPoolExecutor(args.parallel) if args.parallel else None
    try:
        report = solve(Q, executor=executor)
    finally:
        if executor is not None:
            executor.shutdown()
    names = Q.partition.names
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_json(names), indent=2) + "\n")
    if report.compatible:
        print(report.newick, file=out)
        return EXIT_OK
    print(f"incompatible ({report.phase}): {report.message}", file=out)
    return EXIT_INCOMPATIBLE


def cmd_solve(args, out) -> int:
    return _run_solve(_load_system(args), args, out)


def cmd_from_dist(args, out) -> int:
    P = io.parse_partition(_read(args.partition))
    exact = True if args.exact else None
    if args.matrix:
        names, D = io.parse_phylip(_read(args.matrix))
        if sorted(names) != sorted(P.names):
            raise DistanceError("matrix taxa differ from the partition's taxa")
        perm = [names.index(x) for x in P.names]
        D = D[np.ix_(perm, perm)]
        Q = system_from_metric(D, P, full=args.full, eps=args.eps, exact=exact)
    else:
        cross, within = io.tables_by_block(io.parse_tables(_read(args.tables)), P)
        if args.full:
            Q = quartets_from_all_distances(cross, within, P, eps=args.eps, exact=exact)
        else:
            Q = quartets_from_block_distances(cross, P, eps=args.eps, exact=exact)
    if args.emit_quartets:
        Path(args.emit_quartets).write_text(io.format_quartets(Q))
    return _run_solve(Q, args, out)


def _tree_arg(text, names):
    p = Path(text)
    if not text.rstrip().endswith(";") and p.exists():
        text = p.read_text()
    return parse_newick(text.strip(), names)


def cmd_check(args, out) -> int:
    Q = _load_system(args)
    tree = _tree_arg(args.tree, Q.partition.names)
    got = displayed_system(tree, Q.partition, full=Q.is_full)
    if got == Q:
        print("displays", file=out)
        return EXIT_OK
    bad = first_mismatch(got, Q)
    names = Q.partition.names
    where = " ".join(names[t] for t in bad) if bad else "?"
    print(f"does not display: first disagreement on {where}", file=out)
    return EXIT_INCOMPATIBLE


def cmd_gen(args, out) -> int:
    inst = generate(args.seed, args.n, args.r, args.mode, args.noise, via_distances=args.via_distances)
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    P = inst.partition
    (d / "partition.txt").write_text(io.format_partition(P))
    (d / "quartets.txt").write_text(io.format_quartets(inst.system))
    (d / "tree.nwk").write_text(to_newick(inst.tree) + "\n")
    if args.via_distances:
        tables, within = inst.tables
        rows = []
        for (i, j), T in tables.items():
            rows.append((P.names_of(P.blocks[i]), P.names_of(P.blocks[j]), T))
        if args.mode == "full":
            for i, T in within.items():
                rows.append((P.names_of(P.blocks[i]), P.names_of(P.blocks[i]), T))
        (d / "tables.txt").write_text(io.format_tables(rows))
    meta = {"seed": inst.seed, "n": args.n, "r": args.r, "mode": args.mode, "noise": args.noise}
    (d / "instance.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"seed {inst.seed}: wrote instance to {d}", file=out)
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    Q = _load_system(args)
    tree = compatible_oracle(Q, allow_exponential=args.allow_exponential)
    if tree is None:
        print("incompatible", file=out)
        return EXIT_INCOMPATIBLE
    print(to_newick(tree), file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpquartet", description="Multipartite quartet compatibility.")
    sub = ap.add_subparsers(dest="command", required=True)

    def system_args(p):
        p.add_argument("quartets", help="quartet file")
        p.add_argument("-p", "--partition", required=True, help="partition file")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--full", action="store_true", help="treat as a full system")
        g.add_argument("--complete", action="store_true", help="treat as a complete system")

    def solve_args(p):
        p.add_argument("--report", help="write a JSON report here")
        p.add_argument("--parallel", type=int, default=0, metavar="N",
                       help="compute block-pair families on N threads")

    p = sub.add_parser("solve", help="decide compatibility and print a tree")
    system_args(p)
    solve_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("from-dist", help="extract quartets from distance tables and solve")
    p.add_argument("-p", "--partition", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="square PHYLIP-style matrix over all taxa")
    src.add_argument("--tables", help="file of per-block-pair tables")
    p.add_argument("--full", action="store_true", help="also extract within-block quartets")
    tol = p.add_mutually_exclusive_group()
    tol.add_argument("--eps", type=float, default=DEFAULT_EPS, help="relative tie tolerance")
    tol.add_argument("--exact", action="store_true", help="compare sums exactly")
    p.add_argument("--emit-quartets", help="also write the extracted quartet file")
    solve_args(p)
    p.set_defaults(func=cmd_from_dist)

    p = sub.add_parser("check", help="test whether a tree displays a system")
    system_args(p)
    p.add_argument("--tree", required=True, help="Newick string or file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--mode", choices=("complete", "full"), default="complete")
    p.add_argument("--noise", type=int, default=0, help="number of random quartet changes")
    p.add_argument("--seed", type=int, default=None, help="overridden by QMS_SEED")
    p.add_argument("--via-distances", action="store_true",
                   help="extract the system from scaled tree-metric tables")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle", help="exhaustive compatibility check (small n)")
    system_args(p)
    p.add_argument("--allow-exponential", action="store_true", help="lift the size cap")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (QuartetError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())

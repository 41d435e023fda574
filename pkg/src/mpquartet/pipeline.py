"""End-to-end solving: displaying family, laminarization, tree, verification."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import CutClass, QuartetSystem, bits, dedup_classes, nonlaminar_witness
from .errors import Incompatible, MalformedSystem, NotLaminarizable
from .full_system import full_display_family, reconstruct_full
from .laminarize import full_laminarize, laminarize
from .multipartite import display_family
from .tree import PhyloTree, displayed_system, first_mismatch, to_newick, tree_from_laminar


@dataclass
class SolveReport:
    """Outcome of a solve; ``tree`` is set exactly when the system is compatible."""

    compatible: bool
    tree: PhyloTree | None = None
    display_family: list = field(default_factory=list)
    laminar: list = field(default_factory=list)
    phase: str | None = None
    message: str = ""
    witness: object = None
    phases: dict = field(default_factory=dict)

    @property
    def newick(self) -> str | None:
        return to_newick(self.tree) if self.tree is not None else None

    def to_json(self, names) -> dict:
        def sets(fam):
            out = []
            for x in fam:
                m = x.rep if isinstance(x, CutClass) else x
                out.append(sorted(names[t] for t in bits(m)))
            return out

        # lists hold sets (classes or masks), tuples hold taxa, (i, j, k) blocks
        wit = self.witness
        if isinstance(wit, list):
            wit = sets(wit)
        elif isinstance(wit, tuple) and all(isinstance(x, int) for x in wit):
            wit = [names[t] for t in wit]
        elif wit is not None and hasattr(wit, "format"):
            wit = wit.format(names)
        return {
            "compatible": self.compatible,
            "phases": self.phases,
            "failed_phase": self.phase,
            "message": self.message,
            "display_family": sets(self.display_family),
            "laminar_family": sorted(sets(self.laminar)),
            "newick": self.newick,
            "witness": wit,
        }


def _triple_witness(classes, P):
    """A certified three-class obstruction inside ``classes``, if one is found."""
    if len(classes) != 3:
        return None
    X, Y, Z = classes
    for i, j, k in itertools.permutations(range(P.r), 3):
        if {i, j} <= X.footprint and {i, k} <= Y.footprint and {j, k} <= Z.footprint:
            for W in (X, Y, Z):
                if nonlaminar_witness(X, Y, Z, W, i, j, k, P):
                    return (i, j, k)
    return None


def _verify(report, tree, Q, full):
    got = displayed_system(tree, Q.partition, full=full)
    if got != Q:
        bad = first_mismatch(got, Q)
        report.phases["Verification"] = "failed"
        report.compatible = False
        report.tree = None
        report.phase = "Verification"
        report.message = "tree does not display every quartet"
        report.witness = bad
        return report
    report.phases["Verification"] = "ok"
    report.compatible = True
    report.tree = tree
    return report


def solve_complete(Q: QuartetSystem, chooser=None, order=None, executor=None, witness: bool = True) -> SolveReport:
    """Decide a complete multipartite system and build a displaying tree."""
    if Q.is_full:
        raise MalformedSystem("solve_complete expects a complete system; use solve_full")
    P = Q.partition
    report = SolveReport(False)
    try:
        fam = display_family(Q, chooser=chooser, order=order, executor=executor)
    except Incompatible as exc:
        report.phases["Displaying"] = "incompatible"
        report.phase = exc.phase or "Displaying"
        report.message = str(exc)
        report.witness = exc.witness
        return report
    report.phases["Displaying"] = "ok"
    classes = dedup_classes(fam, P)
    report.display_family = classes
    try:
        lam = laminarize(classes, P, witness=witness)
    except NotLaminarizable as exc:
        report.phases["Laminarization"] = "not laminarizable"
        report.phase = "Laminarization"
        report.message = str(exc)
        report.witness = exc.witness
        blocks = _triple_witness(exc.witness or [], P)
        if blocks is not None:
            report.message += f"; three-class obstruction on blocks {list(blocks)}"
        return report
    report.phases["Laminarization"] = "ok"
    report.laminar = lam
    tree = tree_from_laminar(lam, P.n, P.names)
    return _verify(report, tree, Q, False)


def solve_full(Q: QuartetSystem, chooser=None, order=None, executor=None, witness: bool = True) -> SolveReport:
    """Decide a full (multipartite) system and build a displaying tree."""
    if not Q.is_full:
        raise MalformedSystem("solve_full expects a full system; use solve_complete")
    P = Q.partition
    report = SolveReport(False)
    if P.r == 1:
        try:
            lam = reconstruct_full(Q, 0)
        except Incompatible as exc:
            report.phases["FullReconstruction"] = "incompatible"
            report.phase = exc.phase or "FullReconstruction"
            report.message = str(exc)
            report.witness = exc.witness
            return report
        report.phases["FullReconstruction"] = "ok"
        report.display_family = dedup_classes(lam, P, weak=True)
        report.laminar = lam
        return _verify(report, tree_from_laminar(lam, P.n, P.names), Q, True)
    try:
        fam = full_display_family(Q, chooser=chooser, order=order, executor=executor)
    except Incompatible as exc:
        report.phases["FullDisplaying"] = "incompatible"
        report.phase = exc.phase or "FullDisplaying"
        report.message = str(exc)
        report.witness = exc.witness
        return report
    report.phases["FullDisplaying"] = "ok"
    classes = dedup_classes(fam, P, weak=True)
    report.display_family = classes
    try:
        lam = full_laminarize(classes, P, witness=witness)
    except NotLaminarizable as exc:
        report.phases["FullLaminarization"] = "not laminarizable"
        report.phase = "FullLaminarization"
        report.message = str(exc)
        report.witness = exc.witness
        return report
    report.phases["FullLaminarization"] = "ok"
    report.laminar = lam
    tree = tree_from_laminar(lam, P.n, P.names)
    return _verify(report, tree, Q, True)


def solve(Q: QuartetSystem, **kwargs) -> SolveReport:
    return solve_full(Q, **kwargs) if Q.is_full else solve_complete(Q, **kwargs)

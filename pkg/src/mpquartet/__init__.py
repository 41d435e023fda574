"""Compatibility of complete and full multipartite quartet systems.

Taxa are split into blocks; a system lists quartets across pairs of blocks
(and, for full systems, inside blocks).  :func:`solve` decides whether a
phylogenetic tree displays every quartet and returns one when it exists.
"""

from .core import CutClass, Quartet, QuartetSystem, TaxonPartition, cut_class, dedup_classes, equivalent
from .errors import (
    CapExceeded,
    Incompatible,
    InvalidPartition,
    MalformedSystem,
    NotLaminarizable,
    QuartetError,
)
from .bipartite import bipartite_family, pivot_chain
from .full_system import full_display_family, reconstruct_full
from .ingest import (
    four_point_holds,
    quartets_from_all_distances,
    quartets_from_block_distances,
    quartets_from_full_distance,
)
from .laminarize import full_laminarize, laminarize
from .multipartite import display_family
from .oracle import compatible_oracle, enumerate_trees, laminarizable_oracle
from .pipeline import SolveReport, solve, solve_complete, solve_full
from .tree import PhyloTree, displayed_system, parse_newick, to_newick, tree_displays, tree_from_laminar

__version__ = "0.1.0"

__all__ = [
    "CapExceeded", "CutClass", "Incompatible", "InvalidPartition", "MalformedSystem",
    "NotLaminarizable", "PhyloTree", "Quartet", "QuartetError", "QuartetSystem", "SolveReport",
    "TaxonPartition", "bipartite_family", "compatible_oracle", "cut_class", "dedup_classes",
    "display_family", "displayed_system", "enumerate_trees", "equivalent", "four_point_holds",
    "full_display_family", "full_laminarize", "laminarizable_oracle", "laminarize",
    "parse_newick", "pivot_chain", "quartets_from_all_distances", "quartets_from_block_distances",
    "quartets_from_full_distance", "reconstruct_full", "solve", "solve_complete", "solve_full",
    "to_newick", "tree_displays", "tree_from_laminar",
]

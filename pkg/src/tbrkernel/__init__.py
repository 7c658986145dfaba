"""TBR distance kernels: reductions, exact solvers, generators and tight families."""

from .errors import (
    BudgetExceeded,
    FormatError,
    LeafSetMismatch,
    NewickError,
    PreconditionError,
    VerificationError,
)
from .families import build_sc, build_scc, export_instance, load_instance, verify_instance
from .networks import (
    Attachment,
    Generator,
    UnrootedNetwork,
    attach,
    cut_counts,
    displays,
    embed,
    enumerate_generators,
    extract_generator,
    reticulation_number,
)
from .parsimony import Character, bipartition_character, fitch_score, mp_lower_bound
from .reductions import cluster_decompose, is_reduced, kernelize, reduce_chains, reduce_subtrees
from .rooted import (
    RootedNetwork,
    RootedTree,
    check_rooted_bound,
    parse_rooted_newick,
    rooted_displays,
    rooted_is_reduced,
    unroot,
    unroot_network,
    verify_rooted_family,
)
from .tbr import tbr_distance, tbr_distance_bfs, tbr_distance_maf
from .tree import UnrootedTree, parse_newick, serialize_newick
from .uhn import uhn_exact

__all__ = [
    "Attachment",
    "BudgetExceeded",
    "Character",
    "FormatError",
    "Generator",
    "LeafSetMismatch",
    "NewickError",
    "PreconditionError",
    "RootedNetwork",
    "RootedTree",
    "UnrootedNetwork",
    "UnrootedTree",
    "VerificationError",
    "attach",
    "bipartition_character",
    "build_sc",
    "build_scc",
    "check_rooted_bound",
    "cluster_decompose",
    "cut_counts",
    "displays",
    "embed",
    "enumerate_generators",
    "export_instance",
    "extract_generator",
    "fitch_score",
    "is_reduced",
    "kernelize",
    "load_instance",
    "mp_lower_bound",
    "parse_newick",
    "parse_rooted_newick",
    "reduce_chains",
    "reduce_subtrees",
    "reticulation_number",
    "rooted_displays",
    "rooted_is_reduced",
    "serialize_newick",
    "tbr_distance",
    "tbr_distance_bfs",
    "tbr_distance_maf",
    "uhn_exact",
    "unroot",
    "unroot_network",
    "verify_instance",
    "verify_rooted_family",
]

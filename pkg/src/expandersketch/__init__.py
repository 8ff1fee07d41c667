"""Model-based sparse recovery from expander sketches.

Sparse binary sketching operators (d-left-regular bipartite multigraphs),
exact l1 projections onto plain / tree / loopless-group sparsity models,
the SMP, EIHT and MEIHT decoders, and a reproducible experiment harness.
"""

from .expander import (
    ExpansionReport,
    NeighborCounts,
    SparseBinaryMatrix,
    generate_random_matrix,
    group_expander_params,
    raney_tree_count,
    tree_expander_params,
    unique_neighbor_check,
    verify_model_expansion,
)
from .models import (
    EnumerationLimitError,
    GroupModel,
    LooplessViolationError,
    ModelSpec,
    PlainSparseModel,
    TreeModel,
    ancestor_closure,
    enumerate_member_sets,
    enumerate_supports,
    is_member,
    nested_union,
    sample_model_signal,
    sample_support,
    with_budget,
)
from .projections import (
    ProjectionResult,
    brute_force_project,
    hard_threshold,
    model_sigma,
    project,
    project_group,
    project_tree,
)
from .recovery import (
    ConvergenceConstants,
    RecoveryConfig,
    RecoveryResult,
    SketchProblem,
    convergence_constants,
    eiht_recover,
    median_lemma_check,
    median_operator,
    meiht_recover,
    smp_recover,
)

__all__ = [
    "ExpansionReport",
    "NeighborCounts",
    "SparseBinaryMatrix",
    "generate_random_matrix",
    "group_expander_params",
    "raney_tree_count",
    "tree_expander_params",
    "unique_neighbor_check",
    "verify_model_expansion",
    "EnumerationLimitError",
    "GroupModel",
    "LooplessViolationError",
    "ModelSpec",
    "PlainSparseModel",
    "TreeModel",
    "ancestor_closure",
    "enumerate_member_sets",
    "enumerate_supports",
    "is_member",
    "nested_union",
    "sample_model_signal",
    "sample_support",
    "with_budget",
    "ProjectionResult",
    "brute_force_project",
    "hard_threshold",
    "model_sigma",
    "project",
    "project_group",
    "project_tree",
    "ConvergenceConstants",
    "RecoveryConfig",
    "RecoveryResult",
    "SketchProblem",
    "convergence_constants",
    "eiht_recover",
    "median_lemma_check",
    "median_operator",
    "meiht_recover",
    "smp_recover",
]

__version__ = "0.1.0"

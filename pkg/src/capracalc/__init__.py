"""Conjugacy calculus for functions of the support mapping.

A function of the support mapping (FSM) composes a set function F over
subsets of {1, ..., d} with the support of a vector; the l0 pseudonorm
is the special case F = cardinality.  This package implements the
ray-constant-coupling conjugacy calculus for FSMs over an arbitrary
source norm: local norm families, conjugates and biconjugates,
subdifferential certificates, the hidden-convexity function with exact
variational formulas, aggregate norms with sandwich bounds, and
brute-force oracles that independently validate every closed form at
small dimension (d <= 16 for exhaustive routines).
"""

from .capra import (
    CapraContext,
    ConjugateEstimate,
    SubdiffQueryResult,
    SubgradientSearchError,
    capra_biconjugate_fsm,
    capra_conjugate_fsm,
    capra_coupling,
    capra_reverse_conjugate,
    conditional_infimum,
    conjugate_of_indicator,
    construct_subgradient,
    fenchel_conjugate_fsm,
    normalize,
    subdiff_at_zero_membership,
    subdiff_membership,
)
from .localnorms import (
    AggregateNormSpec,
    LocalNormFamily,
    aggregate_support_dual_norm,
    aggregate_top_dual_norm,
)
from .norms import (
    CustomNorm,
    LpNorm,
    MonotonicityVerdict,
    MonotonicityWitness,
    NormSpec,
    TableNorm,
    check_orthant_monotonic,
    check_orthant_strictly_monotonic,
    norm_from_config,
    norm_to_config,
    restriction_norm,
    set_star_norm,
    star_set_norm,
)
from .oracle import (
    OracleBudget,
    direct_capra_conjugate,
    grid_decomposition_min,
    grid_fenchel_conjugate,
    sampled_sphere_sup,
    sampled_support_function,
)
from .setfunctions import SetFunction
from .subsets import (
    INF,
    MAX_DIM,
    complement,
    enumerate_submasks,
    enumerate_subsets,
    format_mask,
    level_set_membership,
    low_add,
    mask_from_indices,
    mask_size,
    project,
    support,
    support_with_tol,
    upp_add,
)
from .variational import (
    BoundsReport,
    Decomposition,
    L0FResult,
    SolverBudget,
    SolverState,
    VariationalResult,
    bounds,
    eval_L0F,
    solve_block_decomposition,
    solve_lambda_form,
    sparse_constrained_min,
    sparse_min_over_set,
    variational_value,
)
from .verify import run_suite

__version__ = "0.1.0"

"""Stable solution of ill-posed equations ``F(u) = f`` with monotone operators.

Given noisy data ``f_delta`` with ``||f - f_delta|| <= delta``, the package
solves the regularized equation ``F(V) + a V = f_delta`` (fixed-point
contraction for locally Lipschitz ``F``, conjugate gradients for symmetric
linear ``F``) and picks the regularization parameter by a residual-band
discrepancy rule with approximate inner solves throughout.
"""

from ._kernels import BACKEND_NAME
from .discrepancy import (
    Bracket,
    ConfigError,
    DiscrepancyConfig,
    DiscrepancyResult,
    MaxBracketSteps,
    NonMonotoneOperator,
    PreconditionOutcome,
    Status,
    bisect_discrepancy,
    find_alpha_low,
    find_alpha_up,
    phi_psi,
    precondition_check,
    recheck_acceptance,
    solve_discrepancy,
    solve_discrepancy_shifted,
)
from .problems import (
    CubicProblem,
    DiagonalProblem,
    FredholmProblem,
    RankOneProblem,
    build_cubic,
    build_diagonal,
    build_fredholm,
    build_rank_one,
    oracle_alpha,
    oracle_alpha_root,
    oracle_phi_psi,
    oracle_solution,
)
from .solve import (
    IndefinitenessDetected,
    IterationConfig,
    MaxIterExceeded,
    NonFinite,
    SolverError,
    SolveTrace,
    Stagnation,
    StepChoice,
    estimate_lipschitz,
    optimal_step,
    residual_norm,
    solve_regularized,
    solve_regularized_linear,
)
from .space import (
    KernelForm,
    MonotonicityReport,
    NoisyProblem,
    Operator,
    check_monotonicity,
    ensure_vector,
    inner,
    make_noisy,
    norm,
    shift_operator,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "__version__",
    # space
    "Operator",
    "KernelForm",
    "NoisyProblem",
    "MonotonicityReport",
    "ensure_vector",
    "inner",
    "norm",
    "make_noisy",
    "check_monotonicity",
    "shift_operator",
    # solvers
    "StepChoice",
    "IterationConfig",
    "SolveTrace",
    "SolverError",
    "MaxIterExceeded",
    "Stagnation",
    "NonFinite",
    "IndefinitenessDetected",
    "optimal_step",
    "estimate_lipschitz",
    "residual_norm",
    "solve_regularized",
    "solve_regularized_linear",
    # discrepancy principle
    "ConfigError",
    "MaxBracketSteps",
    "NonMonotoneOperator",
    "DiscrepancyConfig",
    "DiscrepancyResult",
    "Status",
    "PreconditionOutcome",
    "Bracket",
    "phi_psi",
    "precondition_check",
    "find_alpha_up",
    "find_alpha_low",
    "bisect_discrepancy",
    "solve_discrepancy",
    "solve_discrepancy_shifted",
    "recheck_acceptance",
    # problem suite
    "DiagonalProblem",
    "FredholmProblem",
    "CubicProblem",
    "RankOneProblem",
    "build_diagonal",
    "build_fredholm",
    "build_cubic",
    "build_rank_one",
    "oracle_solution",
    "oracle_phi_psi",
    "oracle_alpha",
    "oracle_alpha_root",
]

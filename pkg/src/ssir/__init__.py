"""Sparse sufficient dimension reduction via a convex, Fantope-constrained program."""

from .covariance import (
    BasisSpec,
    Dataset,
    conditional_cov,
    diff_estimator_T,
    fit_cov,
    sample_cov,
    slice_estimator_T,
)
from .exceptions import (
    AggregateInvalidError,
    CollinearBasisError,
    DivergenceError,
    NotPDError,
    NotPSDError,
    NumericalError,
)
from .fantope import ClipSolution, project_fantope, solve_gamma
from .metrics import (
    SupportEval,
    orthonormal_basis,
    score_correlation,
    subspace_distance,
    support_rates,
)
from .sdr import (
    SUPPORT_THRESHOLD,
    CVReport,
    FitResult,
    cross_validate,
    default_rho_grid,
    fit_pfc,
    fit_sir,
    predict_mean,
)
from .simulate import GroundTruth, ReplicateTable, SimSpec, ar1_sigma, generate, run_replicates
from .solver import SolveReport, SolverConfig, SolverState, initial_state, ladmm_solve

__version__ = "0.1.0"

__all__ = [
    "AggregateInvalidError",
    "BasisSpec",
    "ClipSolution",
    "CollinearBasisError",
    "CVReport",
    "Dataset",
    "DivergenceError",
    "FitResult",
    "GroundTruth",
    "NotPDError",
    "NotPSDError",
    "NumericalError",
    "ReplicateTable",
    "SimSpec",
    "SolveReport",
    "SolverConfig",
    "SolverState",
    "SUPPORT_THRESHOLD",
    "SupportEval",
    "ar1_sigma",
    "conditional_cov",
    "cross_validate",
    "default_rho_grid",
    "diff_estimator_T",
    "fit_cov",
    "fit_pfc",
    "fit_sir",
    "generate",
    "initial_state",
    "ladmm_solve",
    "orthonormal_basis",
    "predict_mean",
    "project_fantope",
    "run_replicates",
    "sample_cov",
    "score_correlation",
    "slice_estimator_T",
    "solve_gamma",
    "subspace_distance",
    "support_rates",
]

"""Numerical toolkit for rotationally symmetric soliton profile functions.

Construct a profile h(r) from its parameters, continue it to large radius,
verify its asymptotic behavior, and compute geometric quantities of the
warped metric it defines.
"""

from .asymptotics import (
    Check,
    LimitEstimate,
    Regime,
    VerificationReport,
    classify_regime,
    cross_consistency_b1,
    estimate_limit,
    verify,
)
from .geometry import (
    MetricProfile,
    completeness_diagnostic,
    curvature_profile,
    curvatures_at,
    geodesic_distance,
)
from .integrate import (
    IntegratorConfig,
    NegativeLambdaWindow,
    SeederMismatch,
    integrate,
    integrate_negative_lambda,
    make_seed,
    residual_integral_identity,
    solve_profile,
)
from .model import (
    Diagnostics,
    DomainError,
    Seed,
    SolitonParams,
    SolutionSample,
    Termination,
    TerminationKind,
    Trajectory,
    diagnostics_at,
    ode_residual_raw,
    ode_rhs,
)
from .picard import (
    CONTRACTION_FACTOR,
    GridFunctionPair,
    PicardReport,
    contraction_epsilon,
    empirical_contraction_ratio,
    picard_solve,
)
from .series import (
    SeriesSolution,
    compute_coefficients,
    eval_series,
    majorant_value,
    radius_lower_bound,
    seed_handoff,
    tail_bound,
)

__version__ = "0.1.0"

__all__ = [
    "Check",
    "CONTRACTION_FACTOR",
    "Diagnostics",
    "DomainError",
    "GridFunctionPair",
    "IntegratorConfig",
    "LimitEstimate",
    "MetricProfile",
    "NegativeLambdaWindow",
    "PicardReport",
    "Regime",
    "Seed",
    "SeederMismatch",
    "SeriesSolution",
    "SolitonParams",
    "SolutionSample",
    "Termination",
    "TerminationKind",
    "Trajectory",
    "VerificationReport",
    "classify_regime",
    "completeness_diagnostic",
    "compute_coefficients",
    "contraction_epsilon",
    "cross_consistency_b1",
    "curvature_profile",
    "curvatures_at",
    "diagnostics_at",
    "empirical_contraction_ratio",
    "estimate_limit",
    "eval_series",
    "geodesic_distance",
    "integrate",
    "integrate_negative_lambda",
    "majorant_value",
    "make_seed",
    "ode_residual_raw",
    "ode_rhs",
    "picard_solve",
    "radius_lower_bound",
    "residual_integral_identity",
    "seed_handoff",
    "solve_profile",
    "tail_bound",
    "verify",
]

"""Normalized ground states for a dipolar Gross-Pitaevskii model with
cubic, dipolar and quintic terms on a periodic spectral grid."""

from ._validation import GridMismatchError, NumericalError, ResolutionError
from .fibering import FiberCoefficients, ResolutionWarning, dilate, find_tstar, project_to_V
from .functionals import (
    CouplingPair,
    FunctionalReport,
    Regime,
    RegimeClass,
    classify,
    evaluate,
    gradient,
    rayleigh_beta,
    residual,
)
from .grid import Grid, forward_transform, inverse_transform
from .groundstate import (
    THRESHOLD,
    DivergenceError,
    GammaCurve,
    GroundStateResult,
    RegimeError,
    SolverConfig,
    estimate_beta,
    minimize,
    sobolev_threshold,
    sweep_gamma,
)
from .trialstates import (
    BubbleParams,
    GaussianParams,
    anisotropic_gaussian,
    aubin_talenti_bubble,
    large_mass_grid,
    large_mass_sequence,
)

__all__ = [
    "THRESHOLD",
    "BubbleParams",
    "CouplingPair",
    "DivergenceError",
    "FiberCoefficients",
    "FunctionalReport",
    "GammaCurve",
    "GaussianParams",
    "Grid",
    "GridMismatchError",
    "GroundStateResult",
    "NumericalError",
    "Regime",
    "RegimeClass",
    "RegimeError",
    "ResolutionError",
    "ResolutionWarning",
    "SolverConfig",
    "anisotropic_gaussian",
    "aubin_talenti_bubble",
    "classify",
    "dilate",
    "estimate_beta",
    "evaluate",
    "find_tstar",
    "forward_transform",
    "gradient",
    "inverse_transform",
    "large_mass_grid",
    "large_mass_sequence",
    "minimize",
    "project_to_V",
    "rayleigh_beta",
    "residual",
    "sobolev_threshold",
    "sweep_gamma",
]

"""Mittag-Leffler kernels, Dzhrbashyan-Nersesyan operators and the Cauchy problem for linear DN systems."""

from .errors import DomainError, NonConvergence, QuadratureError, SolvabilityError
from .fractional_ops import GridFunction, GridSpec, dn_apply, power_rule, rl_apply
from .matrix_functions import JordanSpec, MLKernelSpec, matrix_ml_jordan, matrix_ml_series
from .orders import OrderSequence
from .solver import CauchyProblem, PolyF0, SolutionBundle, solve, validate
from .special_functions import SeriesControl, e_entry, ml, prabhakar, recip_gamma

__all__ = [
    "CauchyProblem",
    "DomainError",
    "GridFunction",
    "GridSpec",
    "JordanSpec",
    "MLKernelSpec",
    "NonConvergence",
    "OrderSequence",
    "PolyF0",
    "QuadratureError",
    "SeriesControl",
    "SolutionBundle",
    "SolvabilityError",
    "dn_apply",
    "e_entry",
    "matrix_ml_jordan",
    "matrix_ml_series",
    "ml",
    "power_rule",
    "prabhakar",
    "recip_gamma",
    "rl_apply",
    "solve",
    "validate",
]

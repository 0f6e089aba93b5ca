"""Exact finite-field computations for linear-form averages, Gowers norms,
polynomial factors and their structure theorems at desk scale."""

from .analytic import DenseFunction, Spectrum, bias, fourier, gowers_norm, inverse_fourier, t_average
from .errors import BudgetError, HofaError, ValidationError
from .ff_core import FpScalar, FpVector
from .factors import DecomposeConfig, PolynomialFactor, conditional_expectation, decompose, decompose_multi
from .linsys import LinearForm, LinearSystem, complexity_report, cs_complexity, true_complexity
from .poly import Polynomial

__version__ = "0.1.0"

__all__ = [
    "BudgetError", "DecomposeConfig", "DenseFunction", "FpScalar", "FpVector", "HofaError", "LinearForm",
    "LinearSystem", "Polynomial", "PolynomialFactor", "Spectrum", "ValidationError", "bias",
    "complexity_report", "conditional_expectation", "cs_complexity", "decompose", "decompose_multi",
    "fourier", "gowers_norm", "inverse_fourier", "t_average", "true_complexity",
]

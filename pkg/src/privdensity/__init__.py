"""Differentially private nonparametric density estimation on [0, 1].

Noisy histogram and trigonometric projection estimators under pure DP,
zero-concentrated DP and (epsilon, delta)-DP, test densities, divergence
oracles, minimax lower-bound evaluators and a Monte Carlo risk harness.
"""

from .budget import PrivacyBudget, Sensitivity
from .densities import (
    ClassSpec,
    FourierSeries,
    PiecewiseLinearDensity,
    SmoothBumpPacking,
    Uniform,
    check_membership,
    fourier_coefficients,
    make_bump_packing,
    make_saw,
    make_triangle,
    normalize_kernel,
    sample,
)
from .errors import ConfigError, ConstructionError, DomainError, InputError, SizeError
from .risk import EstimatorConfig, Metric, RateFit, RiskReport, fit_rate, lower_vs_empirical, mc_risk
from .streams import make_stream, replication_stream

__all__ = [
    "ClassSpec", "ConfigError", "ConstructionError", "DomainError", "EstimatorConfig", "FourierSeries",
    "InputError", "Metric", "PiecewiseLinearDensity", "PrivacyBudget", "RateFit", "RiskReport", "Sensitivity",
    "SizeError", "SmoothBumpPacking", "Uniform", "check_membership", "fit_rate", "fourier_coefficients",
    "lower_vs_empirical", "make_bump_packing", "make_saw", "make_stream", "make_triangle", "mc_risk",
    "normalize_kernel", "replication_stream", "sample",
]

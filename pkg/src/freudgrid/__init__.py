"""Constructive sampling recovery for functions of mixed smoothness on R^d
under exponential-decay weights: orthogonal-polynomial machinery, truncated
Lagrange interpolation, sparse-grid and periodic-spline samplers, assembled
global operators, spectral diagnostics, and a benchmark harness."""

from .weights import (INF, RateExponents, WeightSpec, check_condition_C,
                      rate_exponents)

__all__ = [
    "INF",
    "WeightSpec",
    "RateExponents",
    "rate_exponents",
    "check_condition_C",
]

__version__ = "0.1.0"

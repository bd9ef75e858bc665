"""Conditional quantile comparator estimation."""

from ._cqc import (
    CqcEstimator,
    DataError,
    NumericalError,
    UsageError,
    g_star,
    pava,
    sample_dgp,
    simulate,
)

__all__ = [
    "CqcEstimator",
    "DataError",
    "NumericalError",
    "UsageError",
    "g_star",
    "pava",
    "sample_dgp",
    "simulate",
]

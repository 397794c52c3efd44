"""Seeded random streams and the small statistical toolbox used by the attacks."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

__all__ = [
    "make_rng",
    "std_normal_cdf",
    "std_normal_quantile",
    "empirical_quantile",
]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation of the normal inverse CDF (rel. error ~1e-9).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Return a Philox generator for ``seed`` split by the integer ``key`` path.

    Philox-4x64 is counter based with published round constants, and the
    ``SeedSequence`` spawn key gives independent streams per task, e.g.
    ``make_rng(seed, m, e, repetition)``.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if any(k < 0 for k in key):
        raise ValueError(f"stream keys must be non-negative, got {key}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / _SQRT2)


def _lower_quantile(p: float) -> float:
    # x with Phi(x) = p, Acklam start followed by one Halley step.
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # Work in the tail that keeps the residual well conditioned.
    if x <= 0:
        err = std_normal_cdf(x) - p
    else:
        err = (1.0 - p) - 0.5 * math.erfc(x / _SQRT2)
    u = err * _SQRT2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def std_normal_quantile(s: float) -> float:
    """Upper-tail standard normal quantile.

    Returns ``z`` such that ``P(Z > z) = s`` for ``Z ~ N(0, 1)``, so
    ``std_normal_quantile(0.025)`` is about 1.96.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if s == 0.5:
        return 0.0
    return -_lower_quantile(s)


def empirical_quantile(samples: Sequence[float] | np.ndarray, q: float) -> float:
    """Order-statistic quantile using the "higher" rule.

    Returns the smallest sample value ``v`` whose empirical CDF is at least
    ``q``. At most ``ceil((1 - q) * n)`` samples exceed the result, which keeps
    thresholds calibrated on a null sample conservative.

    ``samples`` need not be sorted.
    """
    values = np.sort(np.asarray(samples, dtype=float).ravel())
    return float(values[_higher_index(values.size, q)])


def _higher_index(n: int, q: float) -> int:
    if n == 0:
        raise ValueError("empirical quantile of an empty sample")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    # round() absorbs representation noise such as (1 - 0.05) * 100 = 95.00000000000001
    k = math.ceil(round(q * n, 9))
    return min(max(k - 1, 0), n - 1)


def sorted_quantiles(sorted_values: np.ndarray, qs: Sequence[float]) -> np.ndarray:
    """Vectorised :func:`empirical_quantile` over an already sorted sample."""
    idx = [_higher_index(sorted_values.size, q) for q in qs]
    return sorted_values[idx]

"""Matrix and normal-distribution helpers used by the copula machinery."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NotPSD

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

_erfc = np.frompyfunc(math.erfc, 1, 1)

# rational approximation for the normal quantile (Acklam), |error| < 1.2e-9,
# then one Halley refinement step pushes it to ~1e-15
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_cdf(x):
    """Standard normal CDF, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    return (0.5 * _erfc(-x / _SQRT2)).astype(np.float64)


def normal_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def inv_normal_cdf(p):
    """Standard normal quantile for p in (0,1), accurate to ~1e-9 or better."""
    p = np.asarray(p, dtype=np.float64)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("inv_normal_cdf requires p in the open interval (0,1)")

    x = np.empty_like(p)
    low = p < _P_LOW
    high = p > 1.0 - _P_LOW
    mid = ~(low | high)

    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num * q / den
    if np.any(low):
        q = np.sqrt(-2.0 * np.log(p[low]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[low] = num / den
    if np.any(high):
        q = np.sqrt(-2.0 * np.log(1.0 - p[high]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[high] = -num / den

    # Halley refinement
    e = normal_cdf(x) - p
    u = e * _SQRT_2PI * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    return float(x[0]) if scalar else x


def cholesky(matrix: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises NotPSD on indefinite input."""
    try:
        return np.linalg.cholesky(np.asarray(matrix, dtype=np.float64))
    except np.linalg.LinAlgError as exc:
        raise NotPSD(f"matrix is not positive definite: {exc}") from exc


def nearest_psd(matrix: np.ndarray, unit_diagonal: bool = False) -> np.ndarray:
    """PSD repair by clipping eigenvalues at 1e-6.

    With unit_diagonal the result is rescaled back to a correlation matrix
    (congruence by a positive diagonal, so positive semi-definiteness is
    preserved).
    """
    sym = np.asarray(matrix, dtype=np.float64)
    sym = 0.5 * (sym + sym.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    clipped = np.clip(eigvals, 1e-6, None)
    repaired = (eigvecs * clipped) @ eigvecs.T
    repaired = 0.5 * (repaired + repaired.T)
    if unit_diagonal:
        d = np.sqrt(np.diag(repaired))
        repaired = repaired / np.outer(d, d)
        np.fill_diagonal(repaired, 1.0)
    return repaired

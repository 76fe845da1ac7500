"""Special functions used by the likelihood machinery.

All four functions accept scalars or numpy arrays and are restricted to
strictly positive arguments; every call site in this package evaluates
them at alpha > 0 or alpha + k > 0.  Implementation: upward recurrence to
shift the argument above a threshold, then an asymptotic (Stirling-type)
series.  This keeps absolute error below ~1e-13 over [1e-6, 1e6] without
pulling in scipy at runtime.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ln_gamma", "digamma", "trigamma", "ln_multibeta"]

_HALF_LN_2PI = 0.9189385332046727417803297364056176

# Stirling series for ln Gamma: sum B_{2n} / (2n (2n-1) x^{2n-1})
_LNGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    7.0 / 1092.0,
)

# psi(x) ~ ln x - 1/(2x) - sum B_{2n} / (2n x^{2n})
_DIGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)

# psi'(x) ~ 1/x + 1/(2x^2) + sum B_{2n} / x^{2n+1}
_TRIGAMMA_COEF = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)

_SHIFT = 12.0


def _validated(x):
    a = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
        raise ValueError("argument must be finite and strictly positive")
    return a


def _maybe_scalar(out, x):
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def ln_gamma(x):
    """Natural log of the gamma function for x > 0."""
    a = _validated(x)
    z = a.copy()
    acc = np.zeros_like(z)
    # ln Gamma(x) = ln Gamma(x + n) - sum ln(x + j); at most 12 shifts
    for _ in range(int(_SHIFT) + 1):
        mask = z < _SHIFT
        if not mask.any():
            break
        acc[mask] -= np.log(z[mask])
        z[mask] += 1.0
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for c in reversed(_LNGAMMA_COEF):
        series = series * inv2 + c
    series /= z
    out = (z - 0.5) * np.log(z) - z + _HALF_LN_2PI + series + acc
    return _maybe_scalar(out, x)


def digamma(x):
    """Logarithmic derivative of the gamma function for x > 0."""
    a = _validated(x)
    z = a.copy()
    acc = np.zeros_like(z)
    for _ in range(int(_SHIFT) + 1):
        mask = z < _SHIFT
        if not mask.any():
            break
        acc[mask] -= 1.0 / z[mask]
        z[mask] += 1.0
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for c in reversed(_DIGAMMA_COEF):
        series = series * inv2 + c
    series *= inv2
    out = np.log(z) - 0.5 / z - series + acc
    return _maybe_scalar(out, x)


def trigamma(x):
    """Derivative of the digamma function for x > 0."""
    a = _validated(x)
    z = a.copy()
    acc = np.zeros_like(z)
    for _ in range(int(_SHIFT) + 1):
        mask = z < _SHIFT
        if not mask.any():
            break
        acc[mask] += 1.0 / (z[mask] * z[mask])
        z[mask] += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    for c in reversed(_TRIGAMMA_COEF):
        series = series * inv2 + c
    series *= inv2 * inv
    out = inv + 0.5 * inv2 + series + acc
    return _maybe_scalar(out, x)


def ln_multibeta(a) -> float:
    """Log of the multivariate beta function of a vector with entries > 0.

    ln B(a) = sum_s ln Gamma(a_s) - ln Gamma(sum_s a_s)
    """
    v = _validated(a)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("ln_multibeta expects a vector of length >= 2")
    return float(np.sum(ln_gamma(v)) - ln_gamma(np.sum(v)))

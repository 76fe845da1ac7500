"""Point-estimate summary statistics of fitted preference distributions.

Assortativity a, its null-model baseline, the normalized coefficient R,
the per-group and overall variance measures, and the Beta marginal
density curves used for plotting.
"""

from __future__ import annotations

import numpy as np

from .netio import GroupSummary
from .specfun import ln_gamma

__all__ = [
    "dirichlet_mean",
    "dirichlet_sigma2",
    "normalized_variance",
    "assortativity_point",
    "null_assortativity",
    "R_point",
    "V_point",
    "beta_marginal_curve",
    "UndefinedMetricError",
]


class UndefinedMetricError(ValueError):
    """Metric has no defined value for this network (e.g. R with one group)."""


def _alpha_vec(alpha_r) -> np.ndarray:
    a = np.asarray(alpha_r, dtype=float)
    if a.ndim != 1 or a.size < 1 or np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise ValueError("alpha must be a vector of positive finite reals")
    return a


def _alpha_matrix(alpha, c=None) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 2 or np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise ValueError("alpha must be a (groups x groups) matrix of positive reals")
    if a.shape[0] != a.shape[1]:
        raise ValueError("alpha must be square: one row per group, one column per target group")
    if c is not None and a.shape[0] != c:
        raise ValueError("alpha dimension does not match group count")
    return a


def dirichlet_mean(alpha_r) -> np.ndarray:
    """Mean preference vector alpha / alpha0."""
    a = _alpha_vec(alpha_r)
    return a / a.sum()


def dirichlet_sigma2(alpha_r) -> float:
    """Expected squared distance of a draw from the distribution mean."""
    a = _alpha_vec(alpha_r)
    mu = a / a.sum()
    return float((1.0 - np.sum(mu * mu)) / (a.sum() + 1.0))


def normalized_variance(alpha_r) -> float:
    """Variance normalized by its maximum: 1 / (alpha0 + 1)."""
    a = _alpha_vec(alpha_r)
    return float(1.0 / (a.sum() + 1.0))


def assortativity_point(alpha, summary: GroupSummary) -> float:
    """Node-weighted average in-group preference: sum_r p_r alpha_rr / alpha_r0."""
    a = _alpha_matrix(alpha, c=len(summary.p))
    means = np.diag(a) / a.sum(axis=1)
    return float(summary.p @ means)


def null_assortativity(summary: GroupSummary) -> float:
    """Average in-group preference under the degree-preserving null model."""
    if summary.m <= 0:
        raise ValueError("null assortativity needs at least one edge")
    return float(summary.p @ (summary.K / summary.m))


def R_point(alpha, summary: GroupSummary) -> float:
    """Excess in-group preference over the null, normalized to max 1."""
    a = _alpha_matrix(alpha, c=len(summary.p))
    kfrac = summary.K / summary.m
    denom = float(summary.p @ (1.0 - kfrac))
    if denom <= 0.0:
        raise UndefinedMetricError("R is undefined: null in-group preference is 1 "
                                   "(single-group network)")
    means = np.diag(a) / a.sum(axis=1)
    return float(summary.p @ (means - kfrac)) / denom


def V_point(alpha, p) -> float:
    """Population-weighted normalized variance: sum_r p_r / (alpha_r0 + 1)."""
    a = _alpha_matrix(alpha)
    p = np.asarray(p, dtype=float)
    if p.shape != (a.shape[0],):
        raise ValueError("p length does not match alpha")
    return float(p @ (1.0 / (a.sum(axis=1) + 1.0)))


def beta_marginal_curve(alpha_r, s: int, grid) -> np.ndarray:
    """Density of coordinate s of a Dirichlet(alpha_r) draw on grid points.

    The single-coordinate marginal is Beta(alpha_s, alpha0 - alpha_s).
    Returns an array of (x, density) pairs.
    """
    a = _alpha_vec(alpha_r)
    if a.size < 2:
        raise ValueError("need at least two components for a marginal")
    if not 0 <= s < a.size:
        raise ValueError(f"component index {s} out of range")
    x = np.asarray(grid, dtype=float)
    if np.any(x <= 0.0) or np.any(x >= 1.0):
        raise ValueError("grid points must lie strictly inside (0, 1)")
    aa = a[s]
    bb = a.sum() - a[s]
    ln_b = ln_gamma(aa) + ln_gamma(bb) - ln_gamma(aa + bb)
    dens = np.exp((aa - 1.0) * np.log(x) + (bb - 1.0) * np.log1p(-x) - ln_b)
    return np.column_stack([x, dens])

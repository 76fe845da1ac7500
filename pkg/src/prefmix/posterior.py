"""Posterior means and error bars for the assortativity and variance
coefficients, by Laplace approximation in ratio form.

For a smooth positive functional F of one group's log-parameters,

    <F> ~= sqrt(det Sigma* / det Sigma) * exp[L*(y*) - L(y_hat)]

where L* = L + ln F and y*, Sigma* come from maximizing L* with the same
damped-Newton machinery used for the base fit.  Second moments use F^2,
and group contributions combine independently because both the likelihood
and the prior factorize over groups.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import likelihood
from .fit import FitError, FitOptions, GroupFit, NetworkFit, fit_group
from .likelihood import GroupObjectiveContext
from .metrics import UndefinedMetricError

__all__ = ["PosteriorEstimate", "laplace_mean", "estimate_metric", "group_moments"]


@dataclass(frozen=True)
class PosteriorEstimate:
    mean: float
    std: float
    method: str = "laplace"


def _ln_f_in_group_share(own: int):
    """ln of a_r = e^{y_own} / sum_s e^{y_s}, with gradient and Hessian."""

    def value(y):
        z = y - y.max()
        return float(z[own] - np.log(np.sum(np.exp(z))))

    def gradient(y):
        w = np.exp(y - y.max())
        w /= w.sum()
        g = -w
        g[own] += 1.0
        return g

    def hessian(y):
        w = np.exp(y - y.max())
        w /= w.sum()
        return np.outer(w, w) - np.diag(w)

    return value, gradient, hessian


def _ln_f_norm_variance():
    """ln of V_r = 1 / (1 + sum_s e^{y_s}), with gradient and Hessian."""

    def value(y):
        return -float(np.log1p(np.sum(np.exp(y))))

    def gradient(y):
        a = np.exp(y)
        return -a / (1.0 + a.sum())

    def hessian(y):
        a = np.exp(y)
        u = a / (1.0 + a.sum())
        return np.outer(u, u) - np.diag(u)

    return value, gradient, hessian


def _scaled(term, factor):
    v, g, h = term
    return (lambda y: factor * v(y),
            lambda y: factor * g(y),
            lambda y: factor * h(y))


def _ln_f(kind: str, own: int):
    if kind == "R_r":
        return _ln_f_in_group_share(own)
    if kind == "R_r2":
        return _scaled(_ln_f_in_group_share(own), 2.0)
    if kind == "V_r":
        return _ln_f_norm_variance()
    if kind == "V_r2":
        return _scaled(_ln_f_norm_variance(), 2.0)
    if kind == "one":  # test hook: ratio of identical integrals
        return (lambda y: 0.0,
                lambda y: np.zeros_like(y),
                lambda y: np.zeros((y.size, y.size)))
    raise ValueError(f"unknown functional kind '{kind}'")


def _log_det_neg(H):
    sign, logdet = np.linalg.slogdet(-H)
    if sign <= 0:
        raise FitError("curvature at optimum is not negative definite")
    return logdet


def laplace_mean(kind: str, ctx: GroupObjectiveContext, base_fit: GroupFit,
                 own: int = 0, opts: FitOptions | None = None) -> float:
    """Posterior mean of one group functional by the Laplace ratio estimator."""
    if not base_fit.converged:
        raise FitError("refusing Laplace computation on a non-converged base fit")
    opts = opts or FitOptions(lam=ctx.lam)
    term = _ln_f(kind, own)
    tilted = fit_group(ctx, FitOptions(lam=opts.lam, grad_tol=opts.grad_tol,
                                       max_iter=opts.max_iter, init_y=base_fit.y_hat),
                       extra_term=term)
    if not tilted.converged:
        raise FitError(f"tilted objective for '{kind}' did not converge")
    H = likelihood.hess(base_fit.y_hat, ctx)
    H_star = likelihood.hess(tilted.y_hat, ctx) + term[2](tilted.y_hat)
    log_ratio = 0.5 * (_log_det_neg(H) - _log_det_neg(H_star))
    return float(np.exp(tilted.log_lik_at_max - base_fit.log_lik_at_max + log_ratio))


def group_moments(kind: str, ctx: GroupObjectiveContext, base_fit: GroupFit,
                  own: int, opts: FitOptions | None = None):
    """Posterior mean and variance of a_r or V_r for one group."""
    mean = laplace_mean(f"{kind}_r", ctx, base_fit, own, opts)
    second = laplace_mean(f"{kind}_r2", ctx, base_fit, own, opts)
    var = second - mean * mean
    if var < 0.0:
        if var < -1e-9:
            warnings.warn(f"negative posterior variance {var:.3e} clamped to 0")
        var = 0.0
    return mean, var


def estimate_metric(kind: str, nf: NetworkFit,
                    opts: FitOptions | None = None) -> PosteriorEstimate:
    """Posterior mean +/- std of R or V over all groups of a fitted network."""
    if kind not in ("R", "V"):
        raise ValueError("kind must be 'R' or 'V'")
    if not nf.converged:
        raise FitError("all groups must be converged before posterior estimation")
    p = nf.summary.p
    kfrac = nf.summary.K / nf.summary.m
    if kind == "R":
        denom = float(p @ (1.0 - kfrac))
        if denom <= 0.0:
            raise UndefinedMetricError("R is undefined for a single-group network")
    mean_acc = 0.0
    var_acc = 0.0
    for r, (ctx, f) in enumerate(zip(nf.ctxs, nf.fits)):
        m_r, v_r = group_moments(kind, ctx, f, r, opts)
        if kind == "R":
            mean_acc += p[r] * (m_r - kfrac[r])
        else:
            mean_acc += p[r] * m_r
        var_acc += p[r] * p[r] * v_r
    if kind == "R":
        mean_acc /= denom
        var_acc /= denom * denom
    return PosteriorEstimate(mean=float(mean_acc), std=float(np.sqrt(var_acc)))

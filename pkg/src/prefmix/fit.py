"""Damped-Newton maximization of the per-group objective.

Each group is fitted independently.  Steps are Newton directions with an
eigenvalue-shift fallback when the Hessian is not negative definite, plus
a backtracking line search; iterates are clamped to the supported |y|
box.  The optional extra_term hook lets the posterior module maximize
L(y) + ln F(y) with the same machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import likelihood
from .likelihood import DEFAULT_LAMBDA, GroupObjectiveContext, Y_BOUND
from .netio import CountsTable, GroupSummary, LabeledNetwork, group_counts, group_summary

__all__ = ["FitOptions", "GroupFit", "FitError", "fit_group", "fit_all",
           "NetworkFit", "fit_to_dict"]


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class FitOptions:
    lam: float = DEFAULT_LAMBDA
    grad_tol: float = 1e-8
    max_iter: int = 500
    init_y: np.ndarray | None = None

    def __post_init__(self):
        if self.lam <= 0 or self.grad_tol <= 0 or self.max_iter < 1:
            raise ValueError("invalid fit options")


@dataclass(frozen=True)
class GroupFit:
    y_hat: np.ndarray
    alpha_hat: np.ndarray
    Sigma: np.ndarray  # minus the inverse Hessian at y_hat
    log_lik_at_max: float
    converged: bool
    iterations: int
    empty: bool = False  # no informative rows; regularizer-only fit


def _neg_def_solve(H, g):
    """Solve (-H + tau I) d = g with tau grown until -H + tau I is SPD.

    Returns the ascent direction d and whether damping was needed.
    """
    c = H.shape[0]
    A = -H
    tau = 0.0
    for _ in range(80):
        try:
            L = np.linalg.cholesky(A + tau * np.eye(c))
        except np.linalg.LinAlgError:
            tau = max(2.0 * tau, 1e-8)
            continue
        d = np.linalg.solve(L.T, np.linalg.solve(L, g))
        return d, tau > 0.0
    raise FitError("could not regularize Hessian to negative definite")


def _maximize(f, fgrad, fhess, y0, opts: FitOptions):
    y = np.clip(np.asarray(y0, dtype=float).copy(), -Y_BOUND, Y_BOUND)
    fy = f(y)
    if not np.isfinite(fy):
        raise FitError(f"non-finite objective at starting point y={y}")
    it = 0
    converged = False
    for it in range(1, opts.max_iter + 1):
        g = fgrad(y)
        if np.max(np.abs(g)) < opts.grad_tol:
            converged = True
            break
        H = fhess(y)
        d, _ = _neg_def_solve(H, g)
        # Once the predicted gain drops below the objective's rounding
        # noise the line search cannot see progress; take the raw Newton
        # step (a contraction this close in) and let the gradient test
        # decide convergence.
        noise = 1e-12 * max(1.0, abs(fy))
        if float(g @ d) < noise:
            y = np.clip(y + d, -Y_BOUND, Y_BOUND)
            fy = f(y)
            continue
        step = 1.0
        improved = False
        for _ in range(50):
            y_new = np.clip(y + step * d, -Y_BOUND, Y_BOUND)
            f_new = f(y_new)
            if np.isfinite(f_new) and f_new > fy:
                y, fy = y_new, f_new
                improved = True
                break
            step *= 0.5
        if not improved:
            # fall back to a small gradient step before giving up
            gnorm = np.linalg.norm(g)
            step = 1.0 / max(gnorm, 1.0)
            for _ in range(50):
                y_new = np.clip(y + step * g, -Y_BOUND, Y_BOUND)
                f_new = f(y_new)
                if np.isfinite(f_new) and f_new > fy:
                    y, fy = y_new, f_new
                    improved = True
                    break
                step *= 0.5
        if not improved:
            break
    else:
        it = opts.max_iter
    if not converged:
        converged = bool(np.max(np.abs(fgrad(y))) < opts.grad_tol)
    return y, fy, converged, it


def _covariance(H):
    """Sigma = -H^{-1}; raises if the curvature is not negative definite."""
    c = H.shape[0]
    try:
        L = np.linalg.cholesky(-H)
    except np.linalg.LinAlgError as exc:
        raise FitError("Hessian at optimum is not negative definite "
                       "(degenerate posterior)") from exc
    inv_L = np.linalg.solve(L, np.eye(c))
    Sigma = inv_L.T @ inv_L
    return 0.5 * (Sigma + Sigma.T)


def fit_group(ctx: GroupObjectiveContext, opts: FitOptions | None = None,
              extra_term=None) -> GroupFit:
    """Maximize the group objective, optionally plus a smooth extra term.

    extra_term, when given, is a triple of callables (value, grad, hess)
    added to the objective (used for posterior tilting).
    """
    opts = opts or FitOptions()
    if ctx.c < 2:
        raise FitError("need at least 2 groups to fit a preference distribution")
    if extra_term is None:
        f = lambda y: likelihood.log_lik(y, ctx)
        fg = lambda y: likelihood.grad(y, ctx)
        fh = lambda y: likelihood.hess(y, ctx)
    else:
        ev, eg, eh = extra_term
        f = lambda y: likelihood.log_lik(y, ctx) + ev(y)
        fg = lambda y: likelihood.grad(y, ctx) + eg(y)
        fh = lambda y: likelihood.hess(y, ctx) + eh(y)
    y0 = np.zeros(ctx.c) if opts.init_y is None else np.asarray(opts.init_y, float)
    y, fy, converged, it = _maximize(f, fg, fh, y0, opts)
    Sigma = _covariance(fh(y)) if converged else np.full((ctx.c, ctx.c), np.nan)
    return GroupFit(
        y_hat=y,
        alpha_hat=np.exp(y),
        Sigma=Sigma,
        log_lik_at_max=fy,
        converged=converged,
        iterations=it,
        empty=ctx.kunique.size == 0,
    )


@dataclass(frozen=True)
class NetworkFit:
    """Per-group fits plus the shared contexts and summary."""

    group_names: list
    fits: list  # GroupFit per group
    ctxs: list  # GroupObjectiveContext per group
    counts: CountsTable
    summary: GroupSummary
    lam: float

    @property
    def alpha(self) -> np.ndarray:
        return np.stack([f.alpha_hat for f in self.fits])

    @property
    def converged(self) -> bool:
        return all(f.converged for f in self.fits)


def fit_all(net: LabeledNetwork, opts: FitOptions | None = None) -> NetworkFit:
    """Fit every group of a network independently."""
    opts = opts or FitOptions()
    counts = group_counts(net)
    summary = group_summary(net)
    fits = []
    ctxs = []
    for r in range(net.c):
        ctx = GroupObjectiveContext.from_rows(counts.group_rows(r), lam=opts.lam, c=net.c)
        ctxs.append(ctx)
        try:
            fits.append(fit_group(ctx, opts))
        except FitError as exc:
            raise FitError(f"group '{net.group_names[r]}': {exc}") from exc
    return NetworkFit(group_names=list(net.group_names), fits=fits, ctxs=ctxs,
                      counts=counts, summary=summary, lam=opts.lam)


def fit_to_dict(nf: NetworkFit) -> dict:
    """JSON-ready form of a network fit."""
    return {
        "groups": nf.group_names,
        "p": nf.summary.p.tolist(),
        "K": nf.summary.K.tolist(),
        "m": nf.summary.m,
        "lambda": nf.lam,
        "fits": [
            {
                "group": name,
                "alpha": f.alpha_hat.tolist(),
                "y": f.y_hat.tolist(),
                "sigma": f.Sigma.tolist(),
                "converged": f.converged,
                "log_lik": f.log_lik_at_max,
            }
            for name, f in zip(nf.group_names, nf.fits)
        ],
    }

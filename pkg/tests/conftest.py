"""Shared fixtures and independent oracles.

The quadrature oracle evaluates the group objective with scipy's gammaln
(an implementation independent of the package's rising-factorial path)
and integrates posterior expectations on a dense Simpson grid windowed
around the fitted maximum.  It exists to check the Laplace estimator, so
it deliberately shares no code with it.
"""

import io

import numpy as np
import pytest
from scipy.integrate import simpson
from scipy.special import gammaln

from prefmix.datasets import karate_paths
from prefmix.netio import parse_network


def objective_gammaln(Y, ctx, chunk=50000):
    """Group objective at points Y (N x c), via scipy gammaln differences."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    out = np.empty(Y.shape[0])
    K = ctx.kunique
    w = ctx.weights
    ks = ctx.ksum
    for i in range(0, Y.shape[0], chunk):
        A = np.exp(Y[i:i + chunk])
        a0 = A.sum(axis=1)
        if K.size:
            t = (gammaln(A[:, None, :] + K[None, :, :]).sum(axis=2)
                 - gammaln(a0[:, None] + ks[None, :]))
            const = gammaln(A).sum(axis=1) - gammaln(a0)
            like = (t - const[:, None]) @ w
        else:
            like = np.zeros(Y[i:i + chunk].shape[0])
        out[i:i + chunk] = like - ctx.lam * (Y[i:i + chunk] ** 2).sum(axis=1)
    return out


def quadrature_posterior_mean(F, ctx, fit, half=18.0, n=801):
    """2-D posterior mean of F(y) by Simpson integration for c=2 groups.

    F takes an (N, 2) array of y points and returns N values.  The window
    extends `half` units from the fitted maximum in each direction
    (clipped to the supported box), wide enough that the discarded tail
    mass is negligible for any group with a few informative rows.
    """
    assert ctx.c == 2
    yh = fit.y_hat
    g0 = np.linspace(max(-40.0, yh[0] - half), min(40.0, yh[0] + half), n)
    g1 = np.linspace(max(-40.0, yh[1] - half), min(40.0, yh[1] + half), n)
    Y0, Y1 = np.meshgrid(g0, g1, indexing="ij")
    P = np.column_stack([Y0.ravel(), Y1.ravel()])
    W = np.exp(objective_gammaln(P, ctx) - fit.log_lik_at_max).reshape(n, n)
    Fv = np.asarray(F(P)).reshape(n, n)
    Z = simpson(simpson(W, x=g1, axis=1), x=g0)
    N = simpson(simpson(W * Fv, x=g1, axis=1), x=g0)
    return N / Z


def dirichlet_multinomial_rows(alpha, n_rows, theta, seed):
    """Count rows from the generative model: x ~ Dir(alpha), k ~ Poisson(theta),
    splits multinomial."""
    rng = np.random.default_rng(seed)
    alpha = np.asarray(alpha, dtype=float)
    x = rng.dirichlet(alpha, size=n_rows)
    k = rng.poisson(theta, size=n_rows)
    return np.array([rng.multinomial(ki, xi) for ki, xi in zip(k, x)])


@pytest.fixture(scope="session")
def karate():
    edges, labels = karate_paths()
    with open(edges) as e, open(labels) as l:
        return parse_network(e, l, directed=False)


def net_from_text(edge_text, label_text, **kw):
    return parse_network(io.StringIO(edge_text), io.StringIO(label_text), **kw)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo one line per end-to-end acceptance criterion that ran."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    for num, name, status in sorted(RESULTS):
        terminalreporter.write_line(f"criterion {num} ({name}): {status}")

"""Sampling from the degree-corrected preference model.

Edges are generated by the exact two-stage equivalent of independent
per-pair Poisson draws: first k_is ~ Poisson(theta_i * x_is) out-stubs
from node i into each target group, then each stub attaches to a node j
of that group with probability phi_j / Phi_s.  By Poisson superposition
and thinning this reproduces A_ij ~ Poisson(theta_i phi_j x_{i g_j} /
Phi_{g_j}) exactly while staying linear in the number of edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .netio import LabeledNetwork

__all__ = [
    "GeneratorParams",
    "sample_preferences",
    "sample_network",
    "naive_ratio_sample",
    "params_from_spec",
]


@dataclass(frozen=True)
class GeneratorParams:
    g: np.ndarray  # node -> group index
    theta: np.ndarray  # expected out-degree per node
    phi: np.ndarray  # in-degree propensity per node
    x: np.ndarray  # (n, c) preference vectors on the simplex
    group_names: list

    def __post_init__(self):
        n = self.g.size
        if self.theta.shape != (n,) or self.phi.shape != (n,) or self.x.shape[0] != n:
            raise ValueError("parameter arrays disagree on node count")
        if np.any(self.theta <= 0) or np.any(self.phi <= 0):
            raise ValueError("theta and phi must be strictly positive")
        if np.any(self.x < 0) or np.any(np.abs(self.x.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("each preference vector must lie on the simplex")

    @property
    def n(self) -> int:
        return self.g.size

    @property
    def c(self) -> int:
        return self.x.shape[1]


def sample_preferences(alpha_r, count: int, seed: int) -> np.ndarray:
    """i.i.d. Dirichlet draws: independent gammas normalized to the simplex."""
    alpha = np.asarray(alpha_r, dtype=float)
    if alpha.ndim != 1 or np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
        raise ValueError("alpha must be a vector of positive reals")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.gamma(shape=alpha, size=(count, alpha.size))
    # guard against all-zero rows from tiny shape parameters underflowing
    total = g.sum(axis=1)
    dead = total == 0.0
    if dead.any():
        g[dead] = rng.dirichlet(alpha, size=int(dead.sum()))
        total[dead] = g[dead].sum(axis=1)
    return g / total[:, None]


def sample_network(params: GeneratorParams, seed: int) -> LabeledNetwork:
    """One draw of the network model; multiedges and self-loops permitted."""
    rng = np.random.default_rng(seed)
    n, c = params.n, params.c
    phi_by_group = []
    members = []
    for s in range(c):
        idx = np.flatnonzero(params.g == s)
        members.append(idx)
        phi_by_group.append(params.phi[idx])
        if idx.size == 0 and np.any(params.x[:, s] > 0):
            raise ValueError(f"group {s} has no members but receives positive preference")
    # stub counts per (source node, target group)
    stub = rng.poisson(params.theta[:, None] * params.x)
    src_parts, dst_parts = [], []
    for s in range(c):
        total = int(stub[:, s].sum())
        if total == 0:
            continue
        phi = phi_by_group[s]
        dst_parts.append(members[s][rng.choice(phi.size, size=total, p=phi / phi.sum())])
        src_parts.append(np.repeat(np.arange(n), stub[:, s]))
    ii = jj = mult = np.empty(0, dtype=np.int64)
    if src_parts:
        src = np.concatenate(src_parts).astype(np.int64)
        dst = np.concatenate(dst_parts).astype(np.int64)
        keys, mult = np.unique(src * n + dst, return_counts=True)
        ii, jj = np.divmod(keys, n)
        mult = mult.astype(np.int64)
    names = [f"v{i}" for i in range(n)]
    return LabeledNetwork(n=n, c=c, edge_src=ii, edge_dst=jj, edge_mult=mult,
                          labels=params.g.astype(np.intp),
                          group_names=list(params.group_names), node_names=names,
                          directed=True)


def naive_ratio_sample(theta: float, x, count: int, seed: int) -> np.ndarray:
    """Ratios k_is / k_i for Poisson(theta) degrees split multinomially by x.

    Zero-degree draws are discarded, so fewer than `count` rows may return.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    xv = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    k = rng.poisson(theta, size=count)
    k = k[k >= 1]
    if k.size == 0:
        return np.zeros((0, xv.size))
    splits = rng.multinomial(k, xv)
    return splits / k[:, None]


def params_from_spec(doc) -> tuple[GeneratorParams, int]:
    """Build generator parameters from the JSON spec form:

    {"groups": [{"name", "size", "alpha": [...], "theta": t, "phi": p,
                 "x": [[...]] optional per-node overrides}],
     "seed": s}

    Preferences default to Dirichlet(alpha) draws per node (sub-seeded from
    the top-level seed); "x" pins them explicitly instead.
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    try:
        groups = doc["groups"]
        seed = int(doc.get("seed", 0))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed generator spec: {exc}") from exc
    c = len(groups)
    if c < 1:
        raise ValueError("generator spec needs at least one group")
    g_list, theta_list, phi_list, x_blocks, names = [], [], [], [], []
    for r, spec in enumerate(groups):
        size = int(spec["size"])
        if size < 1:
            raise ValueError(f"group {r} has non-positive size")
        names.append(str(spec.get("name", f"g{r}")))
        g_list.append(np.full(size, r))
        theta_list.append(np.broadcast_to(np.asarray(spec.get("theta", 1.0), float), (size,)))
        phi_list.append(np.broadcast_to(np.asarray(spec.get("phi", 1.0), float), (size,)))
        if "x" in spec:
            xs = np.asarray(spec["x"], dtype=float)
            if xs.ndim == 1:
                xs = np.broadcast_to(xs, (size, c))
            if xs.shape != (size, c):
                raise ValueError(f"group {r}: x override has wrong shape")
            x_blocks.append(np.array(xs))
        else:
            alpha = np.asarray(spec["alpha"], dtype=float)
            if alpha.shape != (c,):
                raise ValueError(f"group {r}: alpha must have length {c}")
            x_blocks.append(sample_preferences(alpha, size, seed=seed * 1000003 + r))
    params = GeneratorParams(
        g=np.concatenate(g_list),
        theta=np.concatenate(theta_list).astype(float),
        phi=np.concatenate(phi_list).astype(float),
        x=np.vstack(x_blocks),
        group_names=names,
    )
    return params, seed

"""Reference spaces: GW barycenters and classical MDS."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .fw_solvers import FwConfig, gw_objective, solve_gw
from .gmspace import GaugeKind, GmSpace


@dataclass(frozen=True)
class BarycenterConfig:
    """Settings for :func:`gw_barycenter`.

    ``weights`` defaults to uniform over the inputs when ``None``.
    """

    support_size: int
    weights: tuple | None = None
    outer_iters: int = 20
    fw_cfg: FwConfig = field(default_factory=FwConfig)
    seed: int = 0

    def __post_init__(self):
        if self.support_size < 1:
            raise ValueError("support_size must be >= 1")
        if self.outer_iters < 0:
            raise ValueError("outer_iters must be >= 0")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
                raise ValueError("weights must be a probability vector")


@dataclass
class BarycenterResult:
    space: GmSpace
    objective_trace: list
    plans: list


def _initial_gauge(space: GmSpace, n0: int, rng) -> np.ndarray:
    # uniform subsample without replacement, padded with repeats when n0 > n
    n = space.n
    if n0 <= n:
        idx = np.sort(rng.choice(n, size=n0, replace=False))
    else:
        idx = np.concatenate([np.arange(n), np.sort(rng.choice(n, size=n0 - n, replace=True))])
    return space.gauge[np.ix_(idx, idx)].copy()


def _weighted_objective(C, w, inputs, plans, t) -> float:
    bary = GmSpace(C, w, GaugeKind.PRECOMPUTED)
    return float(sum(tk * gw_objective(g, bary, X) for tk, g, X in zip(t, plans, inputs)))


def gw_barycenter_full(inputs, cfg: BarycenterConfig, init_gauge=None) -> BarycenterResult:
    """Block-coordinate GW barycenter with a fixed uniform support.

    Alternates warm-started GW solves against each input with the closed-form
    square-loss gauge update. The recorded objective is non-increasing.
    """
    inputs = list(inputs)
    if not inputs:
        raise ValueError("gw_barycenter needs at least one input space")
    for X in inputs:
        if abs(X.total_mass - 1.0) > 1e-9:
            raise ValueError(f"input {X.name!r} has total mass {X.total_mass!r}; normalize to 1 first")
    K = len(inputs)
    t = np.full(K, 1.0 / K) if cfg.weights is None else np.asarray(cfg.weights, dtype=np.float64)
    if t.shape[0] != K:
        raise ValueError(f"{t.shape[0]} weights for {K} inputs")
    n0 = cfg.support_size
    w = np.full(n0, 1.0 / n0)
    rng = np.random.default_rng(cfg.seed)
    if init_gauge is None:
        C = _initial_gauge(inputs[int(rng.integers(K))], n0, rng)
    else:
        C = np.array(init_gauge, dtype=np.float64)
    plans = []
    for X in inputs:
        plan, _ = solve_gw(GmSpace(C, w), X, cfg.fw_cfg)
        plans.append(plan.matrix)
    trace = [_weighted_objective(C, w, inputs, plans, t)]
    ww = np.outer(w, w)
    warm = replace(cfg.fw_cfg, restarts=1)
    for _ in range(cfg.outer_iters):
        C = sum(tk * (g @ X.gauge @ g.T) for tk, g, X in zip(t, plans, inputs)) / ww
        C = 0.5 * (C + C.T)
        bary = GmSpace(C, w, GaugeKind.PRECOMPUTED)
        new_plans = []
        for g, X in zip(plans, inputs):
            # warm start keeps each block objective from increasing
            plan, _ = solve_gw(bary, X, warm, init_plan=g)
            if gw_objective(plan, bary, X) <= gw_objective(g, bary, X):
                g = plan.matrix
            new_plans.append(g)
        plans = new_plans
        f = _weighted_objective(C, w, inputs, plans, t)
        trace.append(f)
        if abs(trace[-2] - f) <= 1e-12 * max(1.0, abs(f)):
            break
    return BarycenterResult(GmSpace(C, w, GaugeKind.PRECOMPUTED, name="barycenter"), trace, plans)


def gw_barycenter(inputs, cfg: BarycenterConfig, init_gauge=None) -> GmSpace:
    return gw_barycenter_full(inputs, cfg, init_gauge).space


def classical_mds(gauge, dim: int) -> np.ndarray:
    """Coordinates whose squared distances approximate ``gauge``.

    Parameters
    ----------
    gauge : (n, n) array
        Symmetric squared-distance matrix with zero diagonal.
    dim : int
        Output dimension, at most n.

    Returns
    -------
    (n, dim) array, centered at the origin. Negative eigenvalues of the
    double-centered matrix are truncated to zero; each eigenvector's sign is
    fixed so its largest-magnitude entry is positive.
    """
    D = np.asarray(gauge, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("gauge must be square")
    n = D.shape[0]
    if dim < 1 or dim > n:
        raise ValueError(f"dim must be in [1, {n}], got {dim}")
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ D @ J
    B = 0.5 * (B + B.T)
    vals, vecs = np.linalg.eigh(B)
    order = sorted(range(n), key=lambda k: (-vals[k], k))[:dim]
    vals = np.maximum(vals[order], 0.0)
    vecs = vecs[:, order]
    for k in range(dim):
        j = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[j, k] < 0:
            vecs[:, k] = -vecs[:, k]
    X = vecs * np.sqrt(vals)
    return X - X.mean(axis=0)

"""Brute-force references used to check the solvers at desk scale."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gmspace import GmSpace
from .transport_lp import TransportPlan, solve_ot

MAX_PERM_N = 8
MAX_GRID_CELLS = 6
MAX_GRID_STEPS = 32


class OracleGuard(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmin_description: str
    enumerated_count: int


def _quad_sum(g, gA, gB) -> float:
    # full quadruple sum, independent of the factored form used by the solvers
    diff2 = (gA[:, :, None, None] - gB[None, None, :, :]) ** 2  # i, i', j, j'
    return float(np.einsum("ikjl,ij,kl->", diff2, g, g))


def gw_permutation_oracle(A: GmSpace, B: GmSpace) -> OracleResult:
    """Exact GW over permutation plans for equal-size uniform spaces."""
    n = A.n
    if B.n != n:
        raise ValueError("permutation oracle needs spaces of equal size")
    if n > MAX_PERM_N:
        raise OracleGuard(f"n={n} exceeds the factorial guard {MAX_PERM_N}")
    w = A.mass[0]
    if not (np.allclose(A.mass, w, rtol=0, atol=1e-12) and np.allclose(B.mass, w, rtol=0, atol=1e-12)):
        raise ValueError("permutation oracle needs uniform, equal masses")
    gA, gB = A.gauge, B.gauge
    best, arg, count = math.inf, None, 0
    for perm in itertools.permutations(range(n)):
        count += 1
        idx = np.array(perm)
        val = float(np.sum((gA - gB[np.ix_(idx, idx)]) ** 2)) * w * w
        if val < best:
            best, arg = val, perm
    return OracleResult(best, f"permutation {arg}", count)


def gw_quadruple_sum(plan, A: GmSpace, B: GmSpace) -> float:
    g = plan.matrix if isinstance(plan, TransportPlan) else np.asarray(plan, dtype=np.float64)
    return _quad_sum(g, A.gauge, B.gauge)


def random_feasible_plans(p, q, count: int, seed: int = 0) -> list[TransportPlan]:
    """Random plans in the partial polytope {G >= 0, G 1 <= p, G^T 1 <= q}.

    Each plan mixes two random vertices (balanced LP vertices of random
    sub-marginals) and is then scaled down by a uniform factor.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    rng = np.random.default_rng(seed)
    n, m = p.shape[0], q.shape[0]
    plans = []
    for _ in range(count):
        mats = []
        for _ in range(2):
            # shrink both sides to a common mass, then take an LP vertex
            pa = p * rng.random(n)
            qa = q * rng.random(m)
            mass = min(pa.sum(), qa.sum())
            if mass <= 0:
                mats.append(np.zeros((n, m)))
                continue
            pa *= mass / pa.sum() if pa.sum() > 0 else 0.0
            qa *= mass / qa.sum() if qa.sum() > 0 else 0.0
            pa = np.minimum(pa, p)
            qa = np.minimum(qa, q)
            mass = min(pa.sum(), qa.sum())
            pa *= mass / pa.sum()
            qa *= mass / qa.sum()
            g = solve_ot(rng.random((n, m)), pa, qa).matrix
            mats.append(g)
        t = rng.random()
        g = (1.0 - t) * mats[0] + t * mats[1]
        g *= rng.random()
        # guard against rounding pushing a marginal above its bound
        rs = g.sum(axis=1)
        cs = g.sum(axis=0)
        shrink = min(
            1.0,
            float(np.min(np.where(rs > 0, p / np.where(rs > 0, rs, 1.0), np.inf), initial=np.inf)),
            float(np.min(np.where(cs > 0, q / np.where(cs > 0, cs, 1.0), np.inf), initial=np.inf)),
        )
        g *= shrink
        plans.append(TransportPlan(g, p, q, float("nan"), partial=True))
    return plans


def partial_ot_grid_oracle(cost, p, q, grid_steps: int = 16) -> OracleResult:
    """Grid search over the partial transport polytope.

    Every cell ranges over multiples of its upper bound min(p_i, q_j) /
    grid_steps; points violating a marginal are discarded. The returned value
    is an upper bound on the LP optimum.
    """
    cost = np.asarray(cost, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    n, m = cost.shape
    if n * m > MAX_GRID_CELLS:
        raise OracleGuard(f"{n}x{m} exceeds the grid guard of {MAX_GRID_CELLS} cells")
    if grid_steps > MAX_GRID_STEPS or grid_steps < 1:
        raise OracleGuard(f"grid_steps must be in [1, {MAX_GRID_STEPS}]")
    k = n * m
    caps = np.minimum(p[:, None], q[None, :]).reshape(-1)
    levels = np.arange(grid_steps + 1) / grid_steps
    flat_cost = cost.reshape(-1)
    tol = 1e-12
    # trailing cells are enumerated as one vectorized block per leading prefix
    tail = min(k, 4)
    head = k - tail
    tail_grid = np.stack(np.meshgrid(*([levels] * tail), indexing="ij"), axis=-1).reshape(-1, tail)
    best, arg, count = 0.0, np.zeros(k), 0
    for prefix in itertools.product(levels, repeat=head):
        g = np.empty((tail_grid.shape[0], k))
        g[:, :head] = np.asarray(prefix)
        g[:, head:] = tail_grid
        g *= caps
        count += g.shape[0]
        G = g.reshape(-1, n, m)
        ok = (G.sum(axis=2) <= p + tol).all(axis=1) & (G.sum(axis=1) <= q + tol).all(axis=1)
        if not ok.any():
            continue
        vals = g[ok] @ flat_cost
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, arg = float(vals[i]), g[ok][i]
    return OracleResult(best, f"grid point {np.round(arg.reshape(n, m), 6).tolist()}", count)

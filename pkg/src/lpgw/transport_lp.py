"""Exact linear transport solvers (balanced and partial).

The network simplex kernel is compiled when the ``_simplex`` extension is
importable and pure Python otherwise; ``KERNEL`` names the active one.
Set ``LPGW_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _simplex_py

if os.environ.get("LPGW_PURE_PYTHON"):
    _kernel = _simplex_py.transport_simplex
    KERNEL = "python"
else:
    try:
        from ._simplex import transport_simplex as _kernel

        KERNEL = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _kernel = _simplex_py.transport_simplex
        KERNEL = "python"

MARGINAL_RTOL = 1e-9
SNAP_ULPS = 8.0


class MarginalMismatch(ValueError):
    pass


class SolverFailure(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class TransportPlan:
    matrix: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    objective: float
    partial: bool = False
    pivots: int = 0

    @property
    def total(self) -> float:
        return float(self.matrix.sum())

    @property
    def shape(self):
        return self.matrix.shape

    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


def _check(cost, p, q):
    cost = np.asarray(cost, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if cost.ndim != 2 or cost.shape != (p.shape[0], q.shape[0]):
        raise ValueError(f"cost shape {cost.shape} does not match marginals ({p.shape[0]}, {q.shape[0]})")
    if np.isnan(cost).any() or not np.isfinite(cost).all():
        raise ValueError("cost matrix contains NaN or infinite entries")
    if (p < 0).any() or (q < 0).any():
        raise ValueError("negative marginal entry")
    return cost, p, q


def _snap(plan, scale):
    # flows are built by subtraction; drop residues of a few ulps
    plan[plan <= SNAP_ULPS * np.finfo(float).eps * scale] = 0.0
    return plan


def transport_kernel(a, b, cost, max_iter: int = 0):
    """Raw kernel call: ``(plan, status, pivots)``."""
    return _kernel(a, b, cost, max_iter)


def solve_ot(cost, p, q) -> TransportPlan:
    """Exact vertex optimum of min <cost, G> over G in Gamma(p, q)."""
    cost, p, q = _check(cost, p, q)
    sp, sq = p.sum(), q.sum()
    if abs(sp - sq) > MARGINAL_RTOL * max(1.0, sp, sq):
        raise MarginalMismatch(f"marginal totals differ: {sp!r} vs {sq!r}")
    if sp == 0.0 or sq == 0.0:
        return TransportPlan(np.zeros(cost.shape), p, q, 0.0)
    plan, status, pivots = _kernel(p, q, cost, 0)
    if status != 0:
        raise SolverFailure(f"network simplex ended with status {status}")
    plan = _snap(plan, sp)
    return TransportPlan(plan, p, q, float(np.sum(plan * cost)), pivots=pivots)


def augment(cost, p, q):
    """Balanced (n+1)x(m+1) problem whose optimum restricts to the partial one.

    The dummy row carries |q| and the dummy column |p|; every dummy cell
    costs zero, so leaving mass untransported is free.
    """
    n, m = cost.shape
    big = np.zeros((n + 1, m + 1))
    big[:n, :m] = cost
    return big, np.append(p, q.sum()), np.append(q, p.sum())


def solve_partial_ot(cost, p, q) -> TransportPlan:
    """Exact optimum of min <cost, G> over G >= 0, G 1 <= p, G^T 1 <= q."""
    cost, p, q = _check(cost, p, q)
    n, m = cost.shape
    if p.sum() == 0.0 or q.sum() == 0.0:
        return TransportPlan(np.zeros((n, m)), p, q, 0.0, partial=True)
    big, pa, qa = augment(cost, p, q)
    plan, status, pivots = _kernel(pa, qa, big, 0)
    if status != 0:
        raise SolverFailure(f"network simplex ended with status {status}")
    g = _snap(np.ascontiguousarray(plan[:n, :m]), max(p.sum(), q.sum()))
    return TransportPlan(g, p, q, float(np.sum(g * cost)), partial=True, pivots=pivots)


def is_feasible(matrix, p, q, partial: bool, tol: float = 1e-9) -> bool:
    g = np.asarray(matrix)
    if (g < -1e-14).any():
        return False
    scale = max(1.0, float(np.sum(p)), float(np.sum(q)))
    r, c = g.sum(axis=1), g.sum(axis=0)
    if partial:
        return bool((r <= p + tol * scale).all() and (c <= q + tol * scale).all())
    return bool(np.allclose(r, p, atol=tol * scale, rtol=0) and np.allclose(c, q, atol=tol * scale, rtol=0))

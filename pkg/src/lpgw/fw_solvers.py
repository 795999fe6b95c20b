"""Frank-Wolfe solvers for GW and partial GW with exact line search.

Both problems are quadratic in the plan, so the line search along a
Frank-Wolfe direction is a closed-form minimization of a parabola on
[0, 1]. The linear subproblem is an exact network-simplex solve.
"""

from __future__ import annotations

import enum
import hashlib
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .gmspace import GmSpace
from .transport_lp import TransportPlan, is_feasible, solve_ot, solve_partial_ot

FEAS_TOL = 1e-9


class Init(str, enum.Enum):
    PRODUCT = "product"
    IDENTITY = "identity"
    RANDOM = "random"
    INTERIOR = "interior"


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"


class LargeLambdaWarning(UserWarning):
    """2*lambda exceeds every gauge mismatch: PGW behaves like balanced GW."""


@dataclass(frozen=True)
class FwConfig:
    max_iters: int = 1000
    rel_tol: float = 1e-9
    restarts: int = 1
    seed: int = 0
    init: Init = Init.PRODUCT

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        object.__setattr__(self, "init", Init(self.init))


@dataclass
class SolveReport:
    objective: float
    iterations: int
    step_sizes: list = field(default_factory=list)
    termination: Termination = Termination.CONVERGED
    objective_trace: list = field(default_factory=list)
    lam: float | None = None
    restart: int = 0
    init: str = Init.PRODUCT.value

    def to_dict(self) -> dict:
        d = asdict(self)
        d["termination"] = Termination(self.termination).value
        return d


def _matrix(plan) -> np.ndarray:
    return plan.matrix if isinstance(plan, TransportPlan) else np.asarray(plan, dtype=np.float64)


def _check_dims(g, A: GmSpace, B: GmSpace):
    if g.shape != (A.n, B.n):
        raise ValueError(f"plan shape {g.shape} does not match spaces ({A.n}, {B.n})")


def _quadratic(g, gA, gB, gA2, gB2) -> float:
    r = g.sum(axis=1)
    c = g.sum(axis=0)
    c1 = float(r @ (gA2 @ r))
    c2 = float(c @ (gB2 @ c))
    cross = float(np.sum((gA @ g @ gB) * g))
    return c1 + c2 - 2.0 * cross


def _grad(g, gA, gB, gA2, gB2) -> np.ndarray:
    t1 = gA2 @ g.sum(axis=1)
    t2 = gB2 @ g.sum(axis=0)
    return 2.0 * (t1[:, None] + t2[None, :] - 2.0 * (gA @ g @ gB))


def gw_objective(plan, A: GmSpace, B: GmSpace) -> float:
    """sum_{i,i',j,j'} (gA[i,i'] - gB[j,j'])^2 G[i,j] G[i',j'] via the factored form."""
    g = _matrix(plan)
    _check_dims(g, A, B)
    return _quadratic(g, A.gauge, B.gauge, A.gauge**2, B.gauge**2)


def pgw_objective(plan, A: GmSpace, B: GmSpace, lam: float) -> float:
    g = _matrix(plan)
    _check_dims(g, A, B)
    if not is_feasible(g, A.mass, B.mass, partial=True, tol=FEAS_TOL):
        raise ValueError("plan violates the partial marginal constraints")
    mass = float(g.sum())
    penalty = lam * (A.total_mass**2 + B.total_mass**2 - 2.0 * mass**2)
    return gw_objective(g, A, B) + penalty


def gw_gradient(plan, A: GmSpace, B: GmSpace) -> np.ndarray:
    g = _matrix(plan)
    _check_dims(g, A, B)
    return _grad(g, A.gauge, B.gauge, A.gauge**2, B.gauge**2)


def pgw_gradient(plan, A: GmSpace, B: GmSpace, lam: float) -> np.ndarray:
    g = _matrix(plan)
    return gw_gradient(g, A, B) - 4.0 * lam * float(g.sum())


def quadratic_step(a: float, b: float) -> float:
    """argmin over [0, 1] of a t^2 + b t."""
    if a > 0:
        return float(min(max(-b / (2.0 * a), 0.0), 1.0))
    return 1.0 if a + b < 0 else 0.0


def fw_line_search(plan, direction, A: GmSpace, B: GmSpace, lam: float | None = None) -> float:
    """Exact step along ``direction`` for the GW (lam None) or PGW objective."""
    g = _matrix(plan)
    d = _matrix(direction)
    gA2, gB2 = A.gauge**2, B.gauge**2
    a = _quadratic(d, A.gauge, B.gauge, gA2, gB2)
    grad = _grad(g, A.gauge, B.gauge, gA2, gB2)
    if lam is not None:
        a -= 2.0 * lam * float(d.sum()) ** 2
        grad = grad - 4.0 * lam * float(g.sum())
    b = float(np.sum(grad * d))
    return quadratic_step(a, b)


def mismatch_bound(A: GmSpace, B: GmSpace) -> float:
    """max over all index quadruples of (gA[i,i'] - gB[j,j'])^2."""
    lo_a, hi_a = A.gauge.min(), A.gauge.max()
    lo_b, hi_b = B.gauge.min(), B.gauge.max()
    return float(max((hi_a - lo_b) ** 2, (hi_b - lo_a) ** 2))


def interior_plan(p, q, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    """Random strictly positive plan carrying the largest transportable mass.

    A log-normal matrix is scaled by alternating row/column normalization
    onto marginals ``p * s``, ``q * t`` with common total min(|p|, |q|).
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mass = min(p.sum(), q.sum())
    pa = p * (mass / p.sum())
    qa = q * (mass / q.sum())
    k = np.exp(spread * rng.standard_normal((p.shape[0], q.shape[0])))
    k[pa == 0, :] = 0.0
    k[:, qa == 0] = 0.0
    for _ in range(10000):
        rs = k.sum(axis=1)
        k *= np.divide(pa, rs, out=np.zeros_like(pa), where=rs > 0)[:, None]
        cs = k.sum(axis=0)
        err = np.abs(cs - qa).max()
        k *= np.divide(qa, cs, out=np.zeros_like(qa), where=cs > 0)[None, :]
        if err <= 1e-14 * max(1.0, mass):
            break
    return k


class _Problem:
    def __init__(self, A: GmSpace, B: GmSpace, lam: float | None):
        self.A, self.B, self.lam = A, B, lam
        self.gA, self.gB = A.gauge, B.gauge
        self.gA2, self.gB2 = self.gA**2, self.gB**2
        self.p, self.q = A.mass, B.mass
        scale = (np.abs(self.gA).max() + np.abs(self.gB).max() + 1.0) ** 2
        self.abs_tol = 1e-14 * scale * max(1.0, A.total_mass * B.total_mass)

    def objective(self, g) -> float:
        val = _quadratic(g, self.gA, self.gB, self.gA2, self.gB2)
        if self.lam is not None:
            val += self.lam * (self.A.total_mass**2 + self.B.total_mass**2 - 2.0 * float(g.sum()) ** 2)
        return val

    def gradient(self, g) -> np.ndarray:
        grad = _grad(g, self.gA, self.gB, self.gA2, self.gB2)
        if self.lam is not None:
            grad -= 4.0 * self.lam * float(g.sum())
        return grad

    def curvature(self, d) -> float:
        a = _quadratic(d, self.gA, self.gB, self.gA2, self.gB2)
        if self.lam is not None:
            a -= 2.0 * self.lam * float(d.sum()) ** 2
        return a

    def lmo(self, cost) -> np.ndarray:
        if self.lam is None:
            return solve_ot(cost, self.p, self.q).matrix
        return solve_partial_ot(cost, self.p, self.q).matrix

    def initial(self, init: Init, rng: np.random.Generator) -> np.ndarray:
        p, q = self.p, self.q
        if init is Init.PRODUCT:
            return np.outer(p, q) / max(p.sum(), q.sum())
        if init is Init.IDENTITY:
            if p.shape[0] != q.shape[0]:
                raise ValueError("identity init needs spaces of equal size")
            if self.lam is None and not np.allclose(p, q, rtol=0, atol=FEAS_TOL):
                raise ValueError("identity init is infeasible for unequal balanced masses")
            return np.diag(np.minimum(p, q))
        if init is Init.INTERIOR:
            return interior_plan(p, q, rng)
        cost = rng.random((p.shape[0], q.shape[0]))
        if self.lam is None:
            return solve_ot(cost, p, q).matrix
        # strictly negative costs give a maximal-mass vertex of the partial polytope
        return solve_partial_ot(cost - 2.0, p, q).matrix


def _frank_wolfe(prob: _Problem, g0: np.ndarray, cfg: FwConfig):
    g = np.array(g0, dtype=np.float64)
    f = prob.objective(g)
    trace = [f]
    steps = []
    termination = Termination.MAX_ITERS
    it = 0
    while it < cfg.max_iters:
        it += 1
        grad = prob.gradient(g)
        vertex = prob.lmo(grad)
        d = vertex - g
        gap = max(-float(np.sum(grad * d)), 0.0)
        a = prob.curvature(d)
        small_gap = gap <= max(cfg.rel_tol * abs(f), prob.abs_tol)
        # a zero gap with negative curvature is a saddle (e.g. the product
        # plan between symmetric spaces): still step to the vertex
        t = quadratic_step(a, -gap)
        if t <= 0.0 or (small_gap and a + prob.abs_tol >= 0.0):
            termination = Termination.CONVERGED
            break
        g = vertex if t >= 1.0 else (1.0 - t) * g + t * vertex
        f_new = prob.objective(g)
        steps.append(t)
        trace.append(f_new)
        done = abs(f - f_new) <= max(cfg.rel_tol * abs(f), prob.abs_tol)
        f = f_new
        if done:
            termination = Termination.CONVERGED
            break
    return g, f, SolveReport(f, it, steps, termination, trace)


def _space_key(S: GmSpace):
    h = hashlib.sha1(S.gauge.tobytes())
    h.update(S.mass.tobytes())
    return (S.n, h.hexdigest())


def _solve(A: GmSpace, B: GmSpace, lam, cfg: FwConfig, init_plan=None):
    # Solve in a canonical orientation so (A, B) and (B, A) give transposed plans.
    swap = _space_key(A) > _space_key(B)
    if swap:
        A, B = B, A
        if init_plan is not None:
            init_plan = _matrix(init_plan).T
    prob = _Problem(A, B, lam)
    best = None
    for k in range(cfg.restarts):
        if k == 0 and init_plan is not None:
            g0, label = _matrix(init_plan), "given"
        elif k == 0:
            g0, label = prob.initial(cfg.init, np.random.default_rng([cfg.seed, 0])), cfg.init.value
        else:
            g0, label = prob.initial(Init.INTERIOR, np.random.default_rng([cfg.seed, k])), Init.INTERIOR.value
        g, f, rep = _frank_wolfe(prob, g0, cfg)
        rep.restart, rep.init, rep.lam = k, label, lam
        if best is None or f < best[1]:
            best = (g, f, rep)
    g, f, rep = best
    if swap:
        g = g.T
        A, B = B, A
    g = np.ascontiguousarray(np.maximum(g, 0.0))
    plan = TransportPlan(g, A.mass, B.mass, f, partial=lam is not None)
    return plan, rep


def solve_gw(A: GmSpace, B: GmSpace, cfg: FwConfig | None = None, init_plan=None):
    """Balanced GW by Frank-Wolfe; returns ``(TransportPlan, SolveReport)``."""
    cfg = cfg or FwConfig()
    sa, sb = A.total_mass, B.total_mass
    if abs(sa - sb) > 1e-9 * max(1.0, sa, sb):
        raise ValueError(f"GW needs equal total masses, got {sa!r} and {sb!r}")
    return _solve(A, B, None, cfg, init_plan)


def solve_pgw(A: GmSpace, B: GmSpace, lam: float, cfg: FwConfig | None = None, init_plan=None):
    """Partial GW with mass penalty ``lam``; returns ``(TransportPlan, SolveReport)``."""
    cfg = cfg or FwConfig()
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if 2.0 * lam > mismatch_bound(A, B):
        warnings.warn(
            f"2*lambda={2 * lam:g} exceeds the gauge mismatch bound; PGW reduces to mass-matched GW",
            LargeLambdaWarning,
            stacklevel=2,
        )
    return _solve(A, B, float(lam), cfg, init_plan)

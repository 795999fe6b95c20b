"""Linear GW / partial GW embeddings and their closed-form distances."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fw_solvers import FwConfig, solve_gw, solve_pgw
from .gmspace import GaugeKind, GmSpace, from_points, gauge_from_points
from .transport_lp import TransportPlan

MONGE_TOL = 1e-12


class EmbeddingMismatch(ValueError):
    """Embeddings built against different references or lambdas."""


@dataclass(frozen=True, eq=False)
class LpgwEmbedding:
    reference_id: str
    lam: float
    K: np.ndarray
    q: np.ndarray
    gamma_c: float
    target_total_mass: float
    gauge_kind: GaugeKind = GaugeKind.SQUARED_EUCLIDEAN
    target_id: str = ""

    def to_dict(self) -> dict:
        return {
            "reference_id": self.reference_id,
            "lambda": float(self.lam),
            "q": [float(v) for v in self.q],
            "K": [[float(v) for v in row] for row in self.K],
            "gamma_c": float(self.gamma_c),
            "target_total_mass": float(self.target_total_mass),
            "gauge_kind": GaugeKind(self.gauge_kind).value,
            "target_id": self.target_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LpgwEmbedding":
        return cls(
            reference_id=d["reference_id"],
            lam=float(d["lambda"]),
            K=np.array(d["K"], dtype=np.float64),
            q=np.array(d["q"], dtype=np.float64),
            gamma_c=float(d["gamma_c"]),
            target_total_mass=float(d["target_total_mass"]),
            gauge_kind=GaugeKind.parse(d.get("gauge_kind", "squared_euclidean")),
            target_id=d.get("target_id", ""),
        )


@dataclass(frozen=True, eq=False)
class LgwEmbedding:
    reference_id: str
    K: np.ndarray
    weights: np.ndarray
    target_id: str = ""
    plan: np.ndarray | None = field(default=None, repr=False)


def write_embedding(emb: LpgwEmbedding, path) -> None:
    # json writes floats with repr, which round-trips doubles exactly
    with open(path, "w") as fh:
        json.dump(emb.to_dict(), fh)


def read_embedding(path) -> LpgwEmbedding:
    with open(path) as fh:
        return LpgwEmbedding.from_dict(json.load(fh))


def is_row_monge(plan, tol: float = MONGE_TOL) -> bool:
    g = plan.matrix if isinstance(plan, TransportPlan) else np.asarray(plan)
    return bool(((g > tol).sum(axis=1) <= 1).all())


def barycentric_project(plan, target_points):
    """Map each source atom to the plan-weighted mean of its targets.

    Returns ``(projected, q)`` with ``q = plan @ 1``; rows that carry no mass
    are sent to the origin.
    """
    g = plan.matrix if isinstance(plan, TransportPlan) else np.asarray(plan, dtype=np.float64)
    y = np.asarray(target_points, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if g.shape[1] != y.shape[0]:
        raise ValueError(f"plan has {g.shape[1]} columns but {y.shape[0]} target points were given")
    q = g.sum(axis=1)
    num = g @ y
    proj = np.zeros_like(num)
    pos = q > 0
    proj[pos] = num[pos] / q[pos, None]
    return proj, q


def projected_space(plan, target: GmSpace) -> GmSpace:
    """The target pushed onto the source atoms: points ``proj``, masses ``q``."""
    if target.points is None:
        raise ValueError("barycentric projection needs a point-backed target")
    proj, q = barycentric_project(plan, target.points)
    return from_points(proj, q, target.kind, name=f"{target.name}~")


def _embedding_matrix(reference: GmSpace, target: GmSpace, plan) -> tuple[np.ndarray, np.ndarray]:
    if target.points is None:
        raise ValueError("the target must carry points to be projected")
    proj, q = barycentric_project(plan, target.points)
    K = gauge_from_points(proj, target.kind) - reference.gauge
    return 0.5 * (K + K.T), q


def embedding_from_plan(reference: GmSpace, target: GmSpace, plan, lam: float, reference_id: str = "") -> LpgwEmbedding:
    K, q = _embedding_matrix(reference, target, plan)
    nu = target.total_mass
    return LpgwEmbedding(
        reference_id=reference_id or reference.name,
        lam=float(lam),
        K=K,
        q=q,
        gamma_c=nu**2 - float(q.sum()) ** 2,
        target_total_mass=nu,
        gauge_kind=target.kind,
        target_id=target.name,
    )


def embed_lpgw(reference: GmSpace, target: GmSpace, lam: float, cfg: FwConfig | None = None, reference_id: str = ""):
    """Solve PGW(reference, target) and return ``(embedding, plan, report)``."""
    plan, report = solve_pgw(reference, target, lam, cfg)
    return embedding_from_plan(reference, target, plan, lam, reference_id), plan, report


def lgw_embedding_from_plan(reference: GmSpace, target: GmSpace, plan, reference_id: str = "") -> LgwEmbedding:
    K, _ = _embedding_matrix(reference, target, plan)
    g = plan.matrix if isinstance(plan, TransportPlan) else np.asarray(plan)
    return LgwEmbedding(reference_id or reference.name, K, reference.mass.copy(), target.name, g)


def embed_lgw(reference: GmSpace, target: GmSpace, cfg: FwConfig | None = None, reference_id: str = ""):
    """Solve GW(reference, target) and return ``(embedding, plan, report)``."""
    plan, report = solve_gw(reference, target, cfg)
    return lgw_embedding_from_plan(reference, target, plan, reference_id), plan, report


def alpgw_distance(e1: LpgwEmbedding, e2: LpgwEmbedding) -> float:
    """Embedding-space approximation of PGW between the two targets."""
    if e1.reference_id != e2.reference_id:
        raise EmbeddingMismatch(f"references differ: {e1.reference_id!r} vs {e2.reference_id!r}")
    if e1.lam != e2.lam:
        raise EmbeddingMismatch(f"lambdas differ: {e1.lam!r} vs {e2.lam!r}")
    if e1.K.shape != e2.K.shape:
        raise EmbeddingMismatch("embedding sizes differ")
    w = np.minimum(e1.q, e2.q)
    diff2 = (e1.K - e2.K) ** 2
    transport = float(w @ diff2 @ w)
    mass = e1.target_total_mass**2 + e2.target_total_mass**2 - 2.0 * float(w.sum()) ** 2
    return transport + e1.lam * mass


def algw_distance(e1: LgwEmbedding, e2: LgwEmbedding) -> float:
    if e1.reference_id != e2.reference_id:
        raise EmbeddingMismatch(f"references differ: {e1.reference_id!r} vs {e2.reference_id!r}")
    p = e1.weights
    return float(p @ ((e1.K - e2.K) ** 2) @ p)


def recover_pgw_from_embedding(e: LpgwEmbedding, reference_total_mass: float) -> float:
    """PGW(reference, target) read back from the target's embedding.

    Exact when the plan behind ``e`` has at most one positive entry per row.
    """
    transport = float(e.q @ (e.K**2) @ e.q)
    return transport + e.lam * (reference_total_mass**2 - float(e.q.sum()) ** 2 + e.gamma_c)


def reference_self_embedding(reference: GmSpace, lam: float, reference_id: str = "") -> LpgwEmbedding:
    """Embedding of the reference against itself through the identity plan."""
    if reference.points is None:
        K = np.zeros((reference.n, reference.n))
    else:
        K = gauge_from_points(reference.points, reference.kind) - reference.gauge
    nu = reference.total_mass
    return LpgwEmbedding(reference_id or reference.name, float(lam), K, reference.mass.copy(), 0.0, nu, reference.kind, reference.name)

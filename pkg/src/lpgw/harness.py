"""Experiment plumbing: synthetic shapes, pairwise pipelines, evaluation."""

from __future__ import annotations

import csv
import enum
import json
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fw_solvers import FwConfig, LargeLambdaWarning, solve_gw, solve_pgw
from .gmspace import (
    GaugeKind,
    GmSpace,
    MalformedInput,
    from_points,
    normalize_mass,
    normalize_scale,
    read_pointcloud,
    uniform,
    write_pointcloud,
)
from .linearize import alpgw_distance, algw_distance, embed_lgw, embed_lpgw
from .reference import BarycenterConfig, gw_barycenter

MRE_FLOOR = 1e-10


class Method(str, enum.Enum):
    GW = "gw"
    PGW = "pgw"
    ALGW = "algw"
    ALPGW = "alpgw"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown method {value!r}; expected one of gw, pgw, algw, alpgw") from None

    @property
    def needs_reference(self) -> bool:
        return self in (Method.ALGW, Method.ALPGW)

    @property
    def needs_lambda(self) -> bool:
        return self in (Method.PGW, Method.ALPGW)


@dataclass
class Shape:
    id: str
    space: GmSpace
    label: str = ""


# --------------------------------------------------------------------------
# synthetic data


def _sample_disk(rng, n, a, b, inner=0.0):
    # uniform in an elliptical annulus with inner radius ratio ``inner``
    r = np.sqrt(rng.uniform(inner**2, 1.0, n))
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    pts = np.column_stack([a * r * np.cos(th), b * r * np.sin(th)])
    phi = rng.uniform(0.0, np.pi)
    rot = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    return pts @ rot.T


def _write_manifest(out_dir: Path, entries, kind: GaugeKind) -> dict:
    manifest = {"shapes": entries, "gauge_kind": kind.value}
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
    return manifest


def _emit(out_dir: Path, name: str, pts, label: str):
    space = normalize_scale(uniform(pts, name=name))
    path = out_dir / f"{name}.csv"
    write_pointcloud(space, path)
    return {"id": name, "path": path.name, "label": label}


def gen_ellipses(count: int, n_min: int, n_max: int, seed: int, out_dir) -> dict:
    """Write ``count`` filled-ellipse point clouds plus ``manifest.json``.

    Semi-axes are uniform in [0.3, 1], orientation uniform, sizes uniform
    in [n_min, n_max]; every shape is rescaled to unit diameter and carries
    uniform masses 1/n.
    """
    if n_min < 3 or n_max < n_min:
        raise ValueError("need 3 <= n_min <= n_max")
    if count < 1:
        raise ValueError("count must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        a, b = rng.uniform(0.3, 1.0, 2)
        entries.append(_emit(out_dir, f"ellipse_{i:03d}", _sample_disk(rng, n, a, b), "ellipse"))
    return _write_manifest(out_dir, entries, GaugeKind.SQUARED_EUCLIDEAN)


def gen_disks_rings(count_per_class: int, n_min: int, n_max: int, seed: int, out_dir, inner: float = 0.6) -> dict:
    """Two-class set: filled elliptical disks and elliptical rings."""
    if n_min < 3 or n_max < n_min:
        raise ValueError("need 3 <= n_min <= n_max")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(count_per_class):
        for label, ratio in (("disk", 0.0), ("ring", inner)):
            n = int(rng.integers(n_min, n_max + 1))
            a, b = rng.uniform(0.7, 1.0, 2)
            entries.append(_emit(out_dir, f"{label}_{i:03d}", _sample_disk(rng, n, a, b, ratio), label))
    return _write_manifest(out_dir, entries, GaugeKind.SQUARED_EUCLIDEAN)


def corrupt_with_noise(space: GmSpace, eta: float, seed: int = 0) -> GmSpace:
    """Append ceil(eta*n) uniform bounding-box points of mass total/n each.

    The last added point is trimmed so the added mass is exactly
    ``eta * total``; original masses are left unchanged.
    """
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    if space.points is None:
        raise ValueError("noise corruption needs a point-backed space")
    n = space.n
    k = math.ceil(eta * n)
    if k == 0:
        return space
    rng = np.random.default_rng(seed)
    lo, hi = space.points.min(axis=0), space.points.max(axis=0)
    noise = rng.uniform(lo, hi, size=(k, space.points.shape[1]))
    unit = space.total_mass / n
    added = np.full(k, unit)
    added[-1] = eta * space.total_mass - (k - 1) * unit
    pts = np.vstack([space.points, noise])
    mass = np.concatenate([space.mass, added])
    return from_points(pts, mass, space.kind, name=space.name)


# --------------------------------------------------------------------------
# manifests


def load_manifest(path, kind=None) -> list[Shape]:
    path = Path(path)
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: not valid JSON ({exc})") from None
    if "shapes" not in data:
        raise MalformedInput(f"{path}: manifest has no 'shapes' list")
    gk = GaugeKind.parse(kind or data.get("gauge_kind", "squared_euclidean"))
    shapes = []
    for entry in data["shapes"]:
        p = Path(entry["path"])
        if not p.is_absolute():
            p = path.parent / p
        sp = read_pointcloud(p, gk)
        sid = str(entry.get("id", p.stem))
        shapes.append(Shape(sid, GmSpace(sp.gauge, sp.mass, sp.kind, sp.points, sid), str(entry.get("label", ""))))
    if not shapes:
        raise MalformedInput(f"{path}: manifest lists no shapes")
    return shapes


def write_manifest(shapes, out_dir, kind=GaugeKind.SQUARED_EUCLIDEAN) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for s in shapes:
        write_pointcloud(s.space, out_dir / f"{s.id}.csv")
        entries.append({"id": s.id, "path": f"{s.id}.csv", "label": s.label})
    return _write_manifest(out_dir, entries, GaugeKind.parse(kind))


# --------------------------------------------------------------------------
# distance matrices


@dataclass
class DistanceMatrix:
    """Pairwise distances; ``values`` = sqrt of the clipped ``squared``."""

    ids: list
    values: np.ndarray
    squared: np.ndarray
    method: Method
    lam: float | None = None
    reference_id: str | None = None
    solver_calls: int = 0
    wall_clock_seconds: float = 0.0

    def meta(self) -> dict:
        return {
            "ids": list(self.ids),
            "method": self.method.value,
            "lambda": self.lam,
            "reference_id": self.reference_id,
            "solver_calls": self.solver_calls,
            "wall_clock_seconds": self.wall_clock_seconds,
            "squared": [[float(v) for v in row] for row in self.squared],
        }


def write_distance_matrix(dm: DistanceMatrix, path) -> None:
    """CSV of ``values`` with an ``id`` column, plus a JSON sidecar."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *dm.ids])
        for sid, row in zip(dm.ids, dm.values):
            w.writerow([sid, *(repr(float(v)) for v in row)])
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(dm.meta(), fh, indent=1)


def read_distance_matrix(path) -> DistanceMatrix:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0][0] != "id":
        raise MalformedInput(f"{path}: expected an 'id' header column")
    ids = rows[0][1:]
    if [r[0] for r in rows[1:]] != ids:
        raise MalformedInput(f"{path}: row ids do not match the header")
    try:
        values = np.array([[float(c) for c in r[1:]] for r in rows[1:]], dtype=np.float64)
    except ValueError:
        raise MalformedInput(f"{path}: non-numeric distance entry") from None
    if values.shape != (len(ids), len(ids)):
        raise MalformedInput(f"{path}: matrix is not {len(ids)}x{len(ids)}")
    side = path.with_suffix(".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    squared = np.array(meta["squared"]) if "squared" in meta else values**2
    return DistanceMatrix(
        ids,
        values,
        squared,
        Method.parse(meta.get("method", "gw")),
        meta.get("lambda"),
        meta.get("reference_id"),
        int(meta.get("solver_calls", 0)),
        float(meta.get("wall_clock_seconds", 0.0)),
    )


def _pair_job(args):
    method, A, B, lam, cfg = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LargeLambdaWarning)
        if method is Method.GW:
            plan, _ = solve_gw(normalize_mass(A), normalize_mass(B), cfg)
        else:
            plan, _ = solve_pgw(A, B, lam, cfg)
    return plan.objective


def _embed_job(args):
    method, ref, T, lam, cfg, ref_id = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LargeLambdaWarning)
        if method is Method.ALGW:
            return embed_lgw(ref, normalize_mass(T, ref.total_mass), cfg, ref_id)[0]
        return embed_lpgw(ref, T, lam, cfg, ref_id)[0]


def _run(fn, jobs_list, jobs: int):
    if jobs <= 1 or len(jobs_list) <= 1:
        return [fn(a) for a in jobs_list]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        # map keeps submission order, so results are canonical
        return list(ex.map(fn, jobs_list))


def default_jobs() -> int:
    return os.cpu_count() or 1


def pairwise(
    shapes,
    method,
    lam: float | None = None,
    reference: GmSpace | None = None,
    cfg: FwConfig | None = None,
    jobs: int = 1,
    reference_id: str | None = None,
) -> DistanceMatrix:
    """Pairwise distance matrix over ``shapes`` (a list of :class:`Shape`).

    GW and PGW solve one problem per unordered pair; aLGW and aLPGW embed each
    shape once against ``reference`` and evaluate all pairs in closed form.
    GW-type methods rescale every shape to the reference (or unit) mass.
    """
    method = Method.parse(method)
    cfg = cfg or FwConfig()
    if method.needs_lambda and not (lam is not None and lam > 0):
        raise ValueError(f"method {method.value} needs a positive lambda")
    if method.needs_reference and reference is None:
        raise ValueError(f"method {method.value} needs a reference space")
    ids = [s.id for s in shapes]
    K = len(shapes)
    sq = np.zeros((K, K))
    t0 = time.perf_counter()
    if method.needs_reference:
        ref_id = reference_id or reference.name or "reference"
        tasks = [(method, reference, s.space, lam, cfg, ref_id) for s in shapes]
        embs = _run(_embed_job, tasks, jobs)
        calls = len(embs)
        dist = algw_distance if method is Method.ALGW else alpgw_distance
        for i in range(K):
            for j in range(i + 1, K):
                sq[i, j] = sq[j, i] = dist(embs[i], embs[j])
    else:
        ref_id = None
        pairs = [(i, j) for i in range(K) for j in range(i + 1, K)]
        tasks = [(method, shapes[i].space, shapes[j].space, lam, cfg) for i, j in pairs]
        vals = _run(_pair_job, tasks, jobs)
        calls = len(vals)
        for (i, j), v in zip(pairs, vals):
            sq[i, j] = sq[j, i] = v
    wall = time.perf_counter() - t0
    return DistanceMatrix(
        ids,
        np.sqrt(np.maximum(sq, 0.0)),
        sq,
        method,
        lam if method.needs_lambda else None,
        ref_id,
        calls,
        wall,
    )


def auto_reference(
    shapes, support_size: int | None = None, cfg: FwConfig | None = None, seed: int = 0, outer_iters: int = 20
) -> GmSpace:
    """GW barycenter of one randomly chosen shape per label.

    ``support_size`` defaults to the mean size of the chosen shapes.
    """
    rng = np.random.default_rng(seed)
    by_label: dict = {}
    for s in shapes:
        by_label.setdefault(s.label, []).append(s)
    picks = [group[int(rng.integers(len(group)))] for _, group in sorted(by_label.items())]
    inputs = [normalize_mass(s.space) for s in picks]
    if support_size is None:
        support_size = max(1, round(float(np.mean([s.space.n for s in picks]))))
    bcfg = BarycenterConfig(support_size, outer_iters=outer_iters, fw_cfg=cfg or FwConfig(), seed=seed)
    bary = gw_barycenter(inputs, bcfg)
    name = "barycenter[" + ",".join(s.id for s in picks) + "]"
    return GmSpace(bary.gauge, bary.mass, bary.kind, None, name)


# --------------------------------------------------------------------------
# evaluation


@dataclass
class EvalReport:
    mre: float
    pcc: float
    knn_accuracy: float | None = None
    per_pair_rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"mre": self.mre, "pcc": self.pcc, "knn_accuracy": self.knn_accuracy, "per_pair_rows": self.per_pair_rows}


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(float(dx @ dx)), math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        # constant samples: perfectly correlated only when identical
        return 1.0 if np.array_equal(x, y) else 0.0
    return float(np.clip((dx @ dy) / (sx * sy), -1.0, 1.0))


def eval_mre_pcc(exact: DistanceMatrix, approx: DistanceMatrix, floor: float = MRE_FLOOR) -> EvalReport:
    """MRE and PCC over unordered pairs on squared values.

    Pairs whose exact squared value is at most ``floor`` are dropped.
    """
    if list(exact.ids) != list(approx.ids):
        raise ValueError("distance matrices have different ids")
    K = len(exact.ids)
    rows, xs, ys = [], [], []
    for i in range(K):
        for j in range(i + 1, K):
            e, a = float(exact.squared[i, j]), float(approx.squared[i, j])
            if e <= floor:
                continue
            rows.append({"i": exact.ids[i], "j": exact.ids[j], "exact": e, "approx": a, "rel_err": abs(e - a) / e})
            xs.append(e)
            ys.append(a)
    if not rows:
        raise ValueError("no pair survives the floor")
    mre = float(np.mean([r["rel_err"] for r in rows]))
    return EvalReport(mre, pearson(xs, ys), None, rows)


@dataclass
class KnnResult:
    accuracy: float
    confusion: np.ndarray
    classes: list
    trial_accuracies: list

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "classes": self.classes,
            "confusion": self.confusion.tolist(),
            "trial_accuracies": self.trial_accuracies,
        }


def knn_classify(dm: DistanceMatrix, labels, trials: int = 10, seed: int = 0) -> KnnResult:
    """Nearest-representative classification.

    Each trial draws one representative per class; every other shape gets
    the label of its nearest representative (ties go to the lowest index).
    """
    labels = list(labels)
    if len(labels) != len(dm.ids):
        raise ValueError("one label per shape is required")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    members = {c: [i for i, l in enumerate(labels) if l == c] for c in classes}
    for c, idx in members.items():
        if len(idx) < 2:
            warnings.warn(f"class {c!r} has a single member; it is never tested", stacklevel=2)
    cidx = {c: k for k, c in enumerate(classes)}
    rng = np.random.default_rng(seed)
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    accs = []
    D = dm.values
    for _ in range(trials):
        reps = sorted(int(rng.choice(members[c])) for c in classes)
        rep_set = set(reps)
        hits = total = 0
        for i in range(len(labels)):
            if i in rep_set:
                continue
            d = [D[i, r] for r in reps]
            best = reps[int(np.argmin(d))]
            pred = labels[best]
            confusion[cidx[labels[i]], cidx[pred]] += 1
            hits += pred == labels[i]
            total += 1
        accs.append(hits / total if total else float("nan"))
    return KnnResult(float(np.nanmean(accs)), confusion, classes, accs)


def one_nn_accuracy(D_test_train, train_labels, test_labels) -> float:
    """Plain 1-NN accuracy from a test-by-train distance matrix."""
    D = np.asarray(D_test_train)
    pred = [train_labels[int(np.argmin(row))] for row in D]
    return float(np.mean([p == t for p, t in zip(pred, test_labels)]))


def kernel_matrix(values, sigma: float) -> np.ndarray:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    D = np.asarray(values, dtype=np.float64)
    lo, hi = D.min(), D.max()
    Dn = (D - lo) / (hi - lo) if hi > lo else np.zeros_like(D)
    return np.exp(-sigma * Dn)


def export_kernel(dm: DistanceMatrix, sigma: float, path) -> np.ndarray:
    """Write exp(-sigma * D) with D min-max normalized to [0, 1]."""
    Kmat = kernel_matrix(dm.values, sigma)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *dm.ids])
        for sid, row in zip(dm.ids, Kmat):
            w.writerow([sid, *(repr(float(v)) for v in row)])
    return Kmat

"""Discrete gauged measure spaces: construction, normalization and CSV I/O."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SYMMETRY_TOL = 1e-12


class MalformedInput(ValueError):
    """Raised when a point-cloud file or array cannot be turned into a space."""


class NoScale(ValueError):
    """Raised when a shape has no spatial extent to normalize."""


class GaugeKind(str, enum.Enum):
    SQUARED_EUCLIDEAN = "squared_euclidean"
    INNER_PRODUCT = "inner_product"
    PRECOMPUTED = "precomputed"

    @classmethod
    def parse(cls, value) -> "GaugeKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "sqeuclidean": cls.SQUARED_EUCLIDEAN,
            "squaredeuclidean": cls.SQUARED_EUCLIDEAN,
            "squared_euclidean": cls.SQUARED_EUCLIDEAN,
            "innerproduct": cls.INNER_PRODUCT,
            "inner_product": cls.INNER_PRODUCT,
            "precomputed": cls.PRECOMPUTED,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown gauge kind {value!r}") from None


def gauge_from_points(points: np.ndarray, kind: GaugeKind) -> np.ndarray:
    """Dense gauge matrix of a point cloud."""
    x = np.asarray(points, dtype=np.float64)
    if kind is GaugeKind.INNER_PRODUCT:
        g = x @ x.T
        return 0.5 * (g + g.T)
    if kind is GaugeKind.SQUARED_EUCLIDEAN:
        # explicit differences: exactly symmetric, zero diagonal, no cancellation
        diff = x[:, None, :] - x[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)
    raise ValueError("precomputed spaces cannot be gauged from points")


@dataclass(frozen=True, eq=False)
class GmSpace:
    """A finite gm-space: gauge matrix plus nonnegative masses.

    ``points`` is ``None`` for precomputed gauges. Instances are treated as
    immutable; the arrays are flagged read-only on construction.
    """

    gauge: np.ndarray
    mass: np.ndarray
    kind: GaugeKind = GaugeKind.PRECOMPUTED
    points: np.ndarray | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        g = np.array(self.gauge, dtype=np.float64)
        p = np.array(self.mass, dtype=np.float64).reshape(-1)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise MalformedInput(f"gauge must be square, got shape {g.shape}")
        if g.shape[0] != p.shape[0]:
            raise MalformedInput(f"gauge is {g.shape[0]}x{g.shape[0]} but mass has {p.shape[0]} entries")
        if p.shape[0] < 1:
            raise MalformedInput("a space needs at least one atom")
        if not np.all(np.isfinite(g)) or not np.all(np.isfinite(p)):
            raise MalformedInput("non-finite gauge or mass entry")
        if np.any(p < 0):
            raise MalformedInput("negative mass entry")
        if not p.sum() > 0:
            raise MalformedInput("total mass must be positive")
        if np.max(np.abs(g - g.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.abs(g).max()):
            raise MalformedInput("gauge is not symmetric")
        kind = GaugeKind.parse(self.kind)
        pts = None
        if self.points is not None:
            pts = np.array(self.points, dtype=np.float64)
            if pts.ndim == 1:
                pts = pts[:, None]
            if pts.shape[0] != p.shape[0]:
                raise MalformedInput("points and mass lengths differ")
            pts.setflags(write=False)
        g.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "gauge", g)
        object.__setattr__(self, "mass", p)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.mass.shape[0]

    @property
    def dim(self) -> int | None:
        return None if self.points is None else self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    def with_mass(self, mass) -> "GmSpace":
        return GmSpace(self.gauge, mass, self.kind, self.points, self.name)

    def __repr__(self):
        return f"GmSpace(name={self.name!r}, n={self.n}, kind={self.kind.value}, total_mass={self.total_mass:.6g})"


def from_points(points, mass, kind=GaugeKind.SQUARED_EUCLIDEAN, name: str = "") -> GmSpace:
    """Build a point-backed space; the gauge is computed from ``kind``."""
    kind = GaugeKind.parse(kind)
    if kind is GaugeKind.PRECOMPUTED:
        raise ValueError("use GmSpace(gauge, mass) for precomputed gauges")
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise MalformedInput("points must be a non-empty (n, d) array")
    p = np.asarray(mass, dtype=np.float64).reshape(-1)
    if p.shape[0] != x.shape[0]:
        raise MalformedInput(f"{x.shape[0]} points but {p.shape[0]} masses")
    return GmSpace(gauge_from_points(x, kind), p, kind, x, name)


def uniform(points, total: float = 1.0, kind=GaugeKind.SQUARED_EUCLIDEAN, name: str = "") -> GmSpace:
    x = np.asarray(points, dtype=np.float64)
    return from_points(x, np.full(x.shape[0], total / x.shape[0]), kind, name)


COINCIDE_RTOL = 1e-12


def normalize_scale(space: GmSpace) -> GmSpace:
    """Rescale the points so the diameter (largest pairwise distance) is 1."""
    if space.points is None or space.kind is not GaugeKind.SQUARED_EUCLIDEAN:
        raise ValueError("normalize_scale needs a point-backed squared-Euclidean space")
    diam2 = float(space.gauge.max())
    # spread at the rounding level of the coordinates counts as coincident
    floor = COINCIDE_RTOL * float(np.abs(space.points).max())
    if space.n < 2 or diam2 <= 0.0 or np.sqrt(diam2) <= floor:
        raise NoScale("all points coincide")
    pts = space.points / np.sqrt(diam2)
    return from_points(pts, space.mass, space.kind, space.name)


def normalize_mass(space: GmSpace, target_total: float = 1.0) -> GmSpace:
    if not target_total > 0:
        raise ValueError("target_total must be positive")
    total = space.total_mass
    if not total > 0:
        raise ValueError("zero total mass")
    return space.with_mass(space.mass * (target_total / total))


def read_pointcloud(path, kind=GaugeKind.SQUARED_EUCLIDEAN, header: bool = False) -> GmSpace:
    """Read ``x_1,...,x_d,mass`` rows into a space.

    With ``header=True`` a leading non-numeric line is skipped.
    """
    path = Path(path)
    text = path.read_text()
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            if header and not rows and lineno == 1:
                continue
            raise MalformedInput(f"{path}:{lineno}: non-numeric entry in {row!r}") from None
    if not rows:
        raise MalformedInput(f"{path}: no data rows")
    width = len(rows[0])
    if width < 2:
        raise MalformedInput(f"{path}: rows need at least one coordinate and a mass")
    for k, r in enumerate(rows):
        if len(r) != width:
            raise MalformedInput(f"{path}: row {k + 1} has {len(r)} columns, expected {width}")
    arr = np.array(rows, dtype=np.float64)
    if np.any(arr[:, -1] < 0):
        raise MalformedInput(f"{path}: negative mass")
    return from_points(arr[:, :-1], arr[:, -1], kind, name=path.stem)


def write_pointcloud(space: GmSpace, path) -> None:
    if space.points is None:
        raise ValueError("space has no points to write")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for x, m in zip(space.points, space.mass):
            w.writerow([repr(float(v)) for v in x] + [repr(float(m))])


def write_matrix_csv(matrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(matrix):
            w.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(c) for c in r] for r in csv.reader(fh) if r]
    if not rows:
        raise MalformedInput(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.float64)


def write_precomputed(space: GmSpace, gauge_path, mass_path) -> None:
    write_matrix_csv(space.gauge, gauge_path)
    write_matrix_csv(space.mass[None, :], mass_path)


def read_precomputed(gauge_path, mass_path, name: str = "") -> GmSpace:
    g = read_matrix_csv(gauge_path)
    p = read_matrix_csv(mass_path).reshape(-1)
    return GmSpace(g, p, GaugeKind.PRECOMPUTED, None, name or Path(gauge_path).stem)

"""``lpgw`` command-line interface.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import harness
from .fw_solvers import FwConfig, LargeLambdaWarning
from .gmspace import (
    GaugeKind,
    GmSpace,
    MalformedInput,
    from_points,
    normalize_mass,
    read_matrix_csv,
    read_pointcloud,
    write_pointcloud,
    write_precomputed,
)
from .linearize import embed_lpgw, write_embedding
from .reference import BarycenterConfig, classical_mds, gw_barycenter_full
from .transport_lp import SolverFailure

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    pass


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    # subcommand copies use SUPPRESS so they only override when given
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--lambda", dest="lam", type=float, default=d(None), help="PGW mass penalty")
    p.add_argument("--method", default=d("alpgw"), choices=[m.value for m in harness.Method])
    p.add_argument("--reference", default=d(None), help="reference point-cloud CSV or reference JSON")
    p.add_argument("--auto-reference", action="store_true", default=d(False), help="build a GW barycenter reference")
    p.add_argument("--support-size", type=int, default=d(None), help="barycenter support size")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--jobs", type=int, default=d(1), help="worker processes (0 = all cores)")
    p.add_argument("--max-iters", type=int, default=d(1000))
    p.add_argument("--tol", type=float, default=d(1e-9))
    p.add_argument("--restarts", type=int, default=d(1))
    p.add_argument("--gauge", default=d("squared_euclidean"), help="squared_euclidean or inner_product")
    p.add_argument("--header", action="store_true", default=d(False), help="point-cloud CSVs start with a header row")
    p.add_argument("--out", default=d(None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpgw", description="Linear partial Gromov-Wasserstein toolkit")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = cmd("gen-ellipses", "write a synthetic ellipse set and manifest")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--n-min", type=int, default=40)
    p.add_argument("--n-max", type=int, default=80)

    p = cmd("gen-disks-rings", "write a two-class disk/ring set and manifest")
    p.add_argument("--count", type=int, default=10, help="shapes per class")
    p.add_argument("--n-min", type=int, default=30)
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--inner", type=float, default=0.6, help="ring inner radius ratio")

    p = cmd("corrupt", "add uniform bounding-box noise to a shape or manifest")
    p.add_argument("input")
    p.add_argument("--eta", type=float, required=True)

    p = cmd("barycenter", "GW barycenter of the shapes in a manifest")
    p.add_argument("manifest")
    p.add_argument("--outer-iters", type=int, default=20)
    p.add_argument("--mds-dim", type=int, default=None, help="also write MDS points of this dimension")

    p = cmd("mds", "classical MDS of a squared-distance matrix")
    p.add_argument("gauge_path", metavar="GAUGE", help="squared-distance matrix CSV")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--mass", default=None, help="mass CSV (default uniform 1/n)")

    p = cmd("embed", "LPGW embedding of a shape or manifest")
    p.add_argument("input")

    p = cmd("pairwise", "pairwise distance matrix over a manifest")
    p.add_argument("manifest")

    p = cmd("eval", "MRE and PCC between an exact and an approximate matrix")
    p.add_argument("exact")
    p.add_argument("approx")
    p.add_argument("--floor", type=float, default=harness.MRE_FLOOR)

    p = cmd("knn", "nearest-representative classification")
    p.add_argument("matrix")
    p.add_argument("--manifest", required=True, help="manifest holding the labels")
    p.add_argument("--trials", type=int, default=10)

    p = cmd("export-kernel", "write exp(-sigma * normalized D)")
    p.add_argument("matrix")
    p.add_argument("--sigma", type=float, default=1.0)
    return parser


def _cfg(a) -> FwConfig:
    return FwConfig(max_iters=a.max_iters, rel_tol=a.tol, restarts=a.restarts, seed=a.seed)


def _need_out(a) -> Path:
    if not a.out:
        raise InputError(f"{a.command} needs --out")
    return Path(a.out)


def _jobs(a) -> int:
    return harness.default_jobs() if a.jobs == 0 else max(1, a.jobs)


def load_reference(path, kind: GaugeKind, header: bool = False) -> GmSpace:
    """A point-cloud CSV, or a JSON descriptor naming gauge and mass CSVs."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        meta = json.loads(path.read_text())
        g = read_matrix_csv(path.parent / meta["gauge"])
        m = read_matrix_csv(path.parent / meta["mass"]).reshape(-1)
        pts = None
        if meta.get("points"):
            pts = read_pointcloud(path.parent / meta["points"], kind).points
        return GmSpace(g, m, GaugeKind.PRECOMPUTED, pts, meta.get("id", path.stem))
    return read_pointcloud(path, kind, header)


def _dump_json(obj, out):
    text = json.dumps(obj, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _reference_for(a, shapes):
    kind = GaugeKind.parse(a.gauge)
    if a.reference:
        ref = load_reference(a.reference, kind, a.header)
        return ref, ref.name
    if a.auto_reference:
        ref = harness.auto_reference(shapes, a.support_size, _cfg(a), a.seed)
        return ref, ref.name
    raise InputError(f"method {a.method} needs --reference or --auto-reference")


def run(a) -> int:
    kind = GaugeKind.parse(a.gauge)
    c = a.command
    if c == "gen-ellipses":
        m = harness.gen_ellipses(a.count, a.n_min, a.n_max, a.seed, _need_out(a))
        print(f"wrote {len(m['shapes'])} shapes to {a.out}")
    elif c == "gen-disks-rings":
        m = harness.gen_disks_rings(a.count, a.n_min, a.n_max, a.seed, _need_out(a), a.inner)
        print(f"wrote {len(m['shapes'])} shapes to {a.out}")
    elif c == "corrupt":
        out = _need_out(a)
        if a.input.endswith(".json"):
            shapes = harness.load_manifest(a.input, kind)
            noisy = [
                harness.Shape(s.id, harness.corrupt_with_noise(s.space, a.eta, a.seed + k), s.label)
                for k, s in enumerate(shapes)
            ]
            harness.write_manifest(noisy, out, kind)
        else:
            write_pointcloud(harness.corrupt_with_noise(read_pointcloud(a.input, kind, a.header), a.eta, a.seed), out)
    elif c == "barycenter":
        out = _need_out(a)
        shapes = harness.load_manifest(a.manifest, kind)
        inputs = [normalize_mass(s.space) for s in shapes]
        n0 = a.support_size or max(1, round(float(np.mean([s.n for s in inputs]))))
        res = gw_barycenter_full(inputs, BarycenterConfig(n0, outer_iters=a.outer_iters, fw_cfg=_cfg(a), seed=a.seed))
        out.mkdir(parents=True, exist_ok=True)
        write_precomputed(res.space, out / "gauge.csv", out / "mass.csv")
        meta = {"id": "barycenter", "gauge": "gauge.csv", "mass": "mass.csv", "objective_trace": res.objective_trace}
        if a.mds_dim:
            pts = classical_mds(res.space.gauge, a.mds_dim)
            write_pointcloud(from_points(pts, res.space.mass, GaugeKind.SQUARED_EUCLIDEAN), out / "points.csv")
            meta["points"] = "points.csv"
        (out / "reference.json").write_text(json.dumps(meta, indent=1) + "\n")
    elif c == "mds":
        g = read_matrix_csv(a.gauge_path)
        mass = read_matrix_csv(a.mass).reshape(-1) if a.mass else np.full(g.shape[0], 1.0 / g.shape[0])
        pts = classical_mds(g, a.dim)
        write_pointcloud(from_points(pts, mass, GaugeKind.SQUARED_EUCLIDEAN), _need_out(a))
    elif c == "embed":
        if a.lam is None:
            raise InputError("embed needs --lambda")
        out = _need_out(a)
        if a.input.endswith(".json"):
            shapes = harness.load_manifest(a.input, kind)
        else:
            sp = read_pointcloud(a.input, kind, a.header)
            shapes = [harness.Shape(sp.name, sp)]
        ref, ref_id = _reference_for(a, shapes)
        embs = [embed_lpgw(ref, s.space, a.lam, _cfg(a), ref_id)[0] for s in shapes]
        if len(embs) == 1 and not a.input.endswith(".json"):
            write_embedding(embs[0], out)
        else:
            out.mkdir(parents=True, exist_ok=True)
            for s, e in zip(shapes, embs):
                write_embedding(e, out / f"{s.id}.json")
    elif c == "pairwise":
        out = _need_out(a)
        shapes = harness.load_manifest(a.manifest, kind)
        method = harness.Method.parse(a.method)
        ref = ref_id = None
        if method.needs_reference:
            ref, ref_id = _reference_for(a, shapes)
        if method.needs_lambda and a.lam is None:
            raise InputError(f"method {method.value} needs --lambda")
        dm = harness.pairwise(shapes, method, a.lam, ref, _cfg(a), _jobs(a), ref_id)
        harness.write_distance_matrix(dm, out)
        print(f"{method.value}: {dm.solver_calls} solver calls in {dm.wall_clock_seconds:.3f}s")
    elif c == "eval":
        rep = harness.eval_mre_pcc(harness.read_distance_matrix(a.exact), harness.read_distance_matrix(a.approx), a.floor)
        _dump_json(rep.to_dict(), a.out)
    elif c == "knn":
        dm = harness.read_distance_matrix(a.matrix)
        labels = {s.id: s.label for s in harness.load_manifest(a.manifest, kind)}
        missing = [i for i in dm.ids if i not in labels]
        if missing:
            raise InputError(f"ids missing from the manifest: {missing[:5]}")
        res = harness.knn_classify(dm, [labels[i] for i in dm.ids], a.trials, a.seed)
        _dump_json(res.to_dict(), a.out)
    elif c == "export-kernel":
        harness.export_kernel(harness.read_distance_matrix(a.matrix), a.sigma, _need_out(a))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LargeLambdaWarning)
            return run(args)
    except (InputError, MalformedInput, FileNotFoundError, IsADirectoryError, KeyError, json.JSONDecodeError) as exc:
        print(f"lpgw: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"lpgw: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"lpgw: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

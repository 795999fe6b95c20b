import math

import numpy as np
import pytest

from lpgw.fw_solvers import FwConfig
from lpgw.gmspace import uniform
from lpgw.harness import (
    DistanceMatrix,
    Method,
    Shape,
    auto_reference,
    corrupt_with_noise,
    eval_mre_pcc,
    export_kernel,
    gen_disks_rings,
    gen_ellipses,
    kernel_matrix,
    knn_classify,
    load_manifest,
    one_nn_accuracy,
    pairwise,
    pearson,
    read_distance_matrix,
    write_distance_matrix,
)


def dm_from(sq, method=Method.PGW, ids=None):
    sq = np.asarray(sq, dtype=float)
    ids = ids or [f"s{i}" for i in range(sq.shape[0])]
    return DistanceMatrix(ids, np.sqrt(sq), sq, method)


@pytest.fixture(scope="module")
def ellipses(tmp_path_factory):
    d = tmp_path_factory.mktemp("ell")
    gen_ellipses(5, 10, 16, 7, d)
    return load_manifest(d / "manifest.json")


def test_gen_ellipses_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    gen_ellipses(1, 10, 20, 3, a)
    gen_ellipses(1, 10, 20, 3, b)
    assert (a / "ellipse_000.csv").read_bytes() == (b / "ellipse_000.csv").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()


def test_gen_ellipses_properties(tmp_path):
    m = gen_ellipses(20, 40, 80, 0, tmp_path)
    assert len(m["shapes"]) == 20
    for s in load_manifest(tmp_path / "manifest.json"):
        assert 40 <= s.space.n <= 80
        assert s.space.gauge.min() >= 0 and s.space.gauge.max() <= 1 + 1e-12
        np.testing.assert_allclose(s.space.mass, 1.0 / s.space.n)
    with pytest.raises(ValueError):
        gen_ellipses(2, 2, 5, 0, tmp_path)


def test_gen_disks_rings(tmp_path):
    gen_disks_rings(3, 20, 30, 0, tmp_path)
    shapes = load_manifest(tmp_path / "manifest.json")
    assert sorted({s.label for s in shapes}) == ["disk", "ring"]
    assert len(shapes) == 6


def test_corrupt_with_noise():
    r = np.random.default_rng(0)
    X = uniform(r.random((100, 2)))
    assert corrupt_with_noise(X, 0.0) is X
    Y = corrupt_with_noise(X, 0.5, seed=1)
    assert Y.n == 150
    assert Y.total_mass == pytest.approx(1.5, abs=1e-12)
    np.testing.assert_array_equal(Y.mass[:100], X.mass)
    lo, hi = X.points.min(axis=0), X.points.max(axis=0)
    assert (Y.points[100:] >= lo).all() and (Y.points[100:] <= hi).all()
    Z = corrupt_with_noise(uniform(r.random((7, 2))), 0.3)
    assert Z.n == 7 + math.ceil(2.1)
    assert Z.total_mass == pytest.approx(1.3, abs=1e-12)
    with pytest.raises(ValueError):
        corrupt_with_noise(X, -0.1)


def test_pairwise_call_counts(ellipses):
    ref = auto_reference(ellipses, 8)
    p = pairwise(ellipses, "pgw", 0.1)
    a = pairwise(ellipses, "alpgw", 0.1, ref)
    g = pairwise(ellipses, "gw")
    lg = pairwise(ellipses, "algw", None, ref)
    assert p.solver_calls == g.solver_calls == 10
    assert a.solver_calls == lg.solver_calls == 5
    for dm in (p, a, g, lg):
        assert np.abs(dm.values - dm.values.T).max() <= 1e-6
        assert np.abs(np.diag(dm.values)).max() <= 1e-6
        np.testing.assert_allclose(dm.values, np.sqrt(np.maximum(dm.squared, 0)))


def test_pairwise_identical_shapes_gw():
    X = uniform(np.random.default_rng(0).random((6, 2)))
    dm = pairwise([Shape("a", X), Shape("b", X)], "gw", cfg=FwConfig(restarts=4))
    np.testing.assert_allclose(dm.values, 0.0, atol=1e-6)


def test_pairwise_requirements(ellipses):
    with pytest.raises(ValueError):
        pairwise(ellipses, "alpgw", 0.1)
    with pytest.raises(ValueError):
        pairwise(ellipses, "pgw")
    with pytest.raises(ValueError):
        Method.parse("lot")


def test_pairwise_parallel_matches_serial(ellipses):
    a = pairwise(ellipses[:4], "pgw", 0.2, jobs=1)
    b = pairwise(ellipses[:4], "pgw", 0.2, jobs=2)
    np.testing.assert_array_equal(a.squared, b.squared)


def test_distance_matrix_round_trip(tmp_path, ellipses):
    dm = pairwise(ellipses[:3], "pgw", 0.1)
    write_distance_matrix(dm, tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().startswith("id,")
    back = read_distance_matrix(tmp_path / "d.csv")
    assert back.ids == dm.ids and back.method is Method.PGW and back.lam == 0.1
    np.testing.assert_array_equal(back.values, dm.values)
    np.testing.assert_array_equal(back.squared, dm.squared)
    assert back.solver_calls == 3


def test_eval_examples():
    sq = np.array([[0, 2, 4], [2, 0, 1], [4, 1, 0]], dtype=float)
    rep = eval_mre_pcc(dm_from(sq), dm_from(sq))
    assert rep.mre == 0.0 and rep.pcc == pytest.approx(1.0)
    rep = eval_mre_pcc(dm_from(sq), dm_from(3 * sq))
    assert rep.mre == pytest.approx(2.0) and rep.pcc == pytest.approx(1.0)
    rep = eval_mre_pcc(dm_from([[0, 2], [2, 0]]), dm_from([[0, 1], [1, 0]]))
    assert rep.mre == pytest.approx(0.5)
    assert -1.0 <= rep.pcc <= 1.0


def test_eval_floor_and_errors():
    z = dm_from(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        eval_mre_pcc(z, z)
    with pytest.raises(ValueError):
        eval_mre_pcc(dm_from(np.ones((2, 2))), dm_from(np.ones((2, 2)), ids=["x", "y"]))
    sq = np.array([[0, 1e-12, 1], [1e-12, 0, 2], [1, 2, 0]])
    assert len(eval_mre_pcc(dm_from(sq), dm_from(sq)).per_pair_rows) == 2


def test_pearson_constant():
    assert pearson([1, 1], [1, 1]) == 1.0
    assert pearson([1, 1], [1, 2]) == 0.0


def test_knn_separated_clusters():
    labels = ["a"] * 4 + ["b"] * 4
    D = np.ones((8, 8))
    D[:4, :4] = 0
    D[4:, 4:] = 0
    res = knn_classify(dm_from(D**2), labels, trials=5, seed=0)
    assert res.accuracy == 1.0
    assert res.confusion.sum() == 5 * 6


def test_knn_equal_distances_tie_break():
    labels = ["a", "b"] * 10
    D = np.ones((20, 20)) - np.eye(20)
    res = knn_classify(dm_from(D), labels, trials=200, seed=1)
    assert abs(res.accuracy - 0.5) < 0.1
    one = knn_classify(dm_from(D), labels, trials=1, seed=3)
    assert one.accuracy == knn_classify(dm_from(D), labels, trials=1, seed=3).accuracy


def test_knn_validation():
    D = dm_from(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        knn_classify(D, ["a", "a", "a"])
    with pytest.warns(UserWarning):
        knn_classify(D, ["a", "a", "b"], trials=2)


def test_one_nn_accuracy():
    assert one_nn_accuracy([[0, 1], [1, 0]], ["x", "y"], ["x", "y"]) == 1.0


def test_export_kernel(tmp_path):
    z = dm_from(np.zeros((3, 3)))
    np.testing.assert_array_equal(export_kernel(z, 2.0, tmp_path / "k.csv"), np.ones((3, 3)))
    D = np.array([[0, 1], [1, 0]], dtype=float)
    K = kernel_matrix(D, 1.5)
    assert K[0, 1] == pytest.approx(np.exp(-1.5))
    assert np.array_equal(K, K.T)
    with pytest.raises(ValueError):
        kernel_matrix(D, 0.0)

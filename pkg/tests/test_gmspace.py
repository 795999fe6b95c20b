import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lpgw.gmspace import (
    GaugeKind,
    GmSpace,
    MalformedInput,
    NoScale,
    from_points,
    gauge_from_points,
    normalize_mass,
    normalize_scale,
    read_matrix_csv,
    read_pointcloud,
    read_precomputed,
    uniform,
    write_matrix_csv,
    write_pointcloud,
    write_precomputed,
)

coords = arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 3)), elements=st.floats(-10, 10))


def test_two_point_gauge():
    X = from_points([[0.0, 0.0], [1.0, 0.0]], [0.5, 0.5])
    np.testing.assert_array_equal(X.gauge, [[0.0, 1.0], [1.0, 0.0]])
    assert X.total_mass == 1.0


def test_inner_product_gauge():
    X = from_points([[1.0, 2.0], [3.0, -1.0]], [1, 1], GaugeKind.INNER_PRODUCT)
    np.testing.assert_allclose(X.gauge, [[5.0, 1.0], [1.0, 10.0]])


def test_arrays_are_read_only():
    X = uniform(np.eye(3))
    with pytest.raises(ValueError):
        X.gauge[0, 0] = 1.0
    with pytest.raises(ValueError):
        X.mass[0] = 1.0


@pytest.mark.parametrize(
    "gauge,mass",
    [
        ([[0, 1], [2, 0]], [1, 1]),  # asymmetric
        ([[0, 1], [1, 0]], [1, -1]),  # negative mass
        ([[0, 1], [1, 0]], [0, 0]),  # zero total
        ([[0, 1], [1, 0]], [1, 1, 1]),  # length mismatch
        ([[0, np.nan], [np.nan, 0]], [1, 1]),
        ([[0, 1, 2]], [1]),
    ],
)
def test_rejects_malformed(gauge, mass):
    with pytest.raises(MalformedInput):
        GmSpace(np.array(gauge, dtype=float), mass)


@given(coords)
def test_squared_euclidean_gauge_invariants(x):
    g = gauge_from_points(x, GaugeKind.SQUARED_EUCLIDEAN)
    assert np.array_equal(g, g.T)
    assert np.all(np.diag(g) == 0)
    assert np.all(g >= 0)


@given(coords)
def test_normalize_scale_unit_diameter(x):
    X = uniform(x)
    diam = max(np.linalg.norm(a - b) for a in x for b in x)
    if diam == 0 or diam <= 1e-12 * np.abs(x).max():
        with pytest.raises(NoScale):
            normalize_scale(X)
        return
    Y = normalize_scale(X)
    assert abs(Y.gauge.max() - 1.0) <= 1e-12
    assert Y.gauge.min() >= 0


def test_normalize_scale_single_point():
    with pytest.raises(NoScale):
        normalize_scale(uniform([[1.0, 2.0]]))


def test_normalize_mass():
    X = from_points([[0.0], [1.0]], [1.0, 3.0])
    Y = normalize_mass(X, 2.0)
    np.testing.assert_allclose(Y.mass, [0.5, 1.5])
    with pytest.raises(ValueError):
        normalize_mass(X, 0.0)


def test_pointcloud_round_trip(tmp_path, rng):
    X = from_points(rng.standard_normal((7, 3)), rng.random(7) + 0.1, name="s")
    p = tmp_path / "s.csv"
    write_pointcloud(X, p)
    Y = read_pointcloud(p)
    np.testing.assert_array_equal(X.points, Y.points)
    np.testing.assert_array_equal(X.mass, Y.mass)
    assert Y.name == "s"


def test_pointcloud_header_and_errors(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("x,y,mass\n0,0,0.5\n1,0,0.5\n")
    assert read_pointcloud(p, header=True).n == 2
    with pytest.raises(MalformedInput):
        read_pointcloud(p)
    bad = tmp_path / "bad.csv"
    bad.write_text("0,0,0.5\n1,0\n")
    with pytest.raises(MalformedInput):
        read_pointcloud(bad)
    neg = tmp_path / "neg.csv"
    neg.write_text("0,0,-0.5\n")
    with pytest.raises(MalformedInput):
        read_pointcloud(neg)
    empty = tmp_path / "empty.csv"
    empty.write_text("\n")
    with pytest.raises(MalformedInput):
        read_pointcloud(empty)


def test_precomputed_round_trip(tmp_path, rng):
    X = from_points(rng.random((5, 2)), np.full(5, 0.2))
    write_precomputed(X, tmp_path / "g.csv", tmp_path / "m.csv")
    Y = read_precomputed(tmp_path / "g.csv", tmp_path / "m.csv")
    assert Y.kind is GaugeKind.PRECOMPUTED and Y.points is None
    np.testing.assert_array_equal(X.gauge, Y.gauge)
    np.testing.assert_array_equal(X.mass, Y.mass)


def test_matrix_csv(tmp_path):
    m = np.array([[0.1, 1 / 3], [2.0, -7.5]])
    write_matrix_csv(m, tmp_path / "m.csv")
    np.testing.assert_array_equal(read_matrix_csv(tmp_path / "m.csv"), m)


def test_gauge_kind_parse():
    assert GaugeKind.parse("sqeuclidean") is GaugeKind.SQUARED_EUCLIDEAN
    assert GaugeKind.parse("inner-product") is GaugeKind.INNER_PRODUCT
    with pytest.raises(ValueError):
        GaugeKind.parse("cosine")

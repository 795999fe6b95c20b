import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from lpgw import _simplex_py
from lpgw.oracles import partial_ot_grid_oracle
from lpgw.transport_lp import (
    KERNEL,
    MarginalMismatch,
    augment,
    is_feasible,
    solve_ot,
    solve_partial_ot,
    transport_kernel,
)


def lp_reference(cost, p, q, partial):
    n, m = cost.shape
    rows = np.kron(np.eye(n), np.ones(m))
    cols = np.kron(np.ones(n), np.eye(m))
    A = np.vstack([rows, cols])
    b = np.concatenate([p, q])
    if partial:
        res = linprog(cost.ravel(), A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    else:
        res = linprog(cost.ravel(), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def test_ot_diagonal():
    plan = solve_ot(np.array([[0.0, 1.0], [1.0, 0.0]]), [0.5, 0.5], [0.5, 0.5])
    np.testing.assert_allclose(plan.matrix, np.diag([0.5, 0.5]))
    assert plan.objective == 0.0


def test_ot_scalar():
    plan = solve_ot(np.array([[1.0]]), [1.0], [1.0])
    np.testing.assert_allclose(plan.matrix, [[1.0]])
    assert plan.objective == pytest.approx(1.0)


def test_ot_three_by_two():
    # the stated plan is optimal; its cost is 1/6 + 1/6 = 1/3
    cost = np.array([[0.0, 2.0], [2.0, 0.0], [1.0, 1.0]])
    plan = solve_ot(cost, np.full(3, 1 / 3), [0.5, 0.5])
    np.testing.assert_allclose(plan.matrix, [[1 / 3, 0], [0, 1 / 3], [1 / 6, 1 / 6]], atol=1e-12)
    assert plan.objective == pytest.approx(1 / 3, abs=1e-12)


def test_ot_errors():
    with pytest.raises(MarginalMismatch):
        solve_ot(np.zeros((2, 2)), [0.5, 0.5], [0.5, 0.6])
    with pytest.raises(ValueError):
        solve_ot(np.array([[np.nan]]), [1.0], [1.0])
    with pytest.raises(ValueError):
        solve_ot(np.zeros((2, 3)), [0.5, 0.5], [0.5, 0.5])


def test_ot_zero_mass():
    plan = solve_ot(np.ones((2, 2)), [0.0, 0.0], [0.0, 0.0])
    assert plan.objective == 0.0 and not plan.matrix.any()


@pytest.mark.parametrize(
    "cost,p,q,plan,obj",
    [
        ([[2.0]], [1.0], [0.3], [[0.0]], 0.0),
        ([[-2.0]], [1.0], [0.3], [[0.3]], -0.6),
        ([[-1.0, 3.0], [3.0, -1.0]], [0.5, 0.5], [0.5, 0.5], [[0.5, 0.0], [0.0, 0.5]], -1.0),
    ],
)
def test_partial_examples(cost, p, q, plan, obj):
    res = solve_partial_ot(np.array(cost), p, q)
    np.testing.assert_allclose(res.matrix, plan, atol=1e-12)
    assert res.objective == pytest.approx(obj, abs=1e-12)
    assert res.partial


def test_partial_nan_rejected():
    with pytest.raises(ValueError):
        solve_partial_ot(np.array([[np.nan]]), [1.0], [1.0])


def test_augmentation_dummy_is_free(rng):
    cost = rng.standard_normal((4, 3))
    p, q = rng.random(4), rng.random(3)
    big, pa, qa = augment(cost, p, q)
    assert big.shape == (5, 4)
    assert pa.sum() == pytest.approx(qa.sum())
    assert not big[-1].any() and not big[:, -1].any()
    full = solve_ot(big, pa, qa)
    part = solve_partial_ot(cost, p, q)
    assert np.sum(full.matrix[:4, :3] * cost) == pytest.approx(part.objective, abs=1e-12)


masses = st.lists(st.integers(0, 4), min_size=2, max_size=3).map(lambda v: np.array(v) * 0.25)


@settings(max_examples=10)
@given(masses, masses, st.integers(0, 2**31 - 1))
def test_partial_matches_grid_oracle(p, q, seed):
    if len(p) * len(q) > 6:
        q = q[:2]
    cost = np.random.default_rng(seed).uniform(-2, 2, (len(p), len(q)))
    res = solve_partial_ot(cost, p, q)
    # multiples of 0.25 lie on the step-12 grid for every cap in {0.25,...,1}
    oracle = partial_ot_grid_oracle(cost, p, q, grid_steps=12)
    assert res.objective == pytest.approx(oracle.value, abs=1e-9)
    assert is_feasible(res.matrix, p, q, partial=True)


@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**31 - 1), st.booleans())
def test_matches_highs(n, m, seed, partial):
    r = np.random.default_rng(seed)
    cost = r.uniform(-1, 1, (n, m)) if partial else r.random((n, m))
    p = r.random(n) * (r.random(n) > 0.2)
    q = r.random(m)
    if not partial:
        p = p + 0.01
        q = q * p.sum() / q.sum()
    res = solve_partial_ot(cost, p, q) if partial else solve_ot(cost, p, q)
    assert res.objective == pytest.approx(lp_reference(cost, p, q, partial), abs=1e-9)
    assert is_feasible(res.matrix, p, q, partial=partial)
    assert res.matrix.min() >= 0.0


def test_partial_objective_nonpositive(rng):
    for _ in range(20):
        cost = rng.standard_normal((5, 4))
        assert solve_partial_ot(cost, rng.random(5), rng.random(4)).objective <= 0.0
    assert solve_partial_ot(rng.random((3, 3)), rng.random(3), rng.random(3)).objective == 0.0


def test_degenerate_integer_instance():
    # many ties: integer costs and equal masses
    cost = np.array([[1, 1, 2], [1, 1, 2], [2, 2, 1]], dtype=float)
    p = q = np.full(3, 1 / 3)
    res = solve_ot(cost, p, q)
    assert res.objective == pytest.approx(lp_reference(cost, p, q, False), abs=1e-12)


def test_deterministic(rng):
    cost = rng.integers(0, 3, (6, 6)).astype(float)
    p = q = np.full(6, 1 / 6)
    a = solve_ot(cost, p, q).matrix
    b = solve_ot(cost, p, q).matrix
    assert np.array_equal(a, b)


def test_kernels_agree(rng):
    for _ in range(30):
        n, m = rng.integers(1, 15, 2)
        cost = rng.integers(0, 5, (n, m)).astype(float) if rng.random() < 0.5 else rng.random((n, m))
        a = rng.random(n)
        b = rng.random(m)
        b *= a.sum() / b.sum()
        fast, s1, _ = transport_kernel(a, b, cost)
        slow, s2, _ = _simplex_py.transport_simplex(a, b, cost)
        assert s1 == s2 == 0
        assert np.sum(fast * cost) == pytest.approx(np.sum(slow * cost), abs=1e-12)
        if KERNEL == "cython":
            np.testing.assert_array_equal(fast, slow)


def test_infeasible_status():
    _, status, _ = _simplex_py.transport_simplex(np.array([1.0]), np.array([2.0]), np.zeros((1, 1)))
    assert status == 2


def test_max_iter_status(rng):
    cost = rng.random((12, 12))
    a = np.full(12, 1 / 12)
    _, status, _ = transport_kernel(a, a, cost, 1)
    assert status == 1

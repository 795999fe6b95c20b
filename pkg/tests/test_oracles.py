import numpy as np
import pytest

from lpgw.fw_solvers import FwConfig, gw_objective, pgw_objective, solve_gw
from lpgw.gmspace import GmSpace, uniform
from lpgw.oracles import (
    OracleGuard,
    gw_permutation_oracle,
    gw_quadruple_sum,
    partial_ot_grid_oracle,
    random_feasible_plans,
)
from lpgw.transport_lp import is_feasible, solve_partial_ot


def test_permutation_oracle_two_point():
    A = GmSpace(np.array([[0.0, 1.0], [1.0, 0.0]]), [0.5, 0.5])
    B = GmSpace(np.array([[0.0, 2.0], [2.0, 0.0]]), [0.5, 0.5])
    res = gw_permutation_oracle(A, B)
    assert res.value == pytest.approx(0.5)
    assert res.enumerated_count == 2


def test_permutation_oracle_guards():
    A = uniform(np.random.default_rng(0).random((9, 2)))
    with pytest.raises(OracleGuard):
        gw_permutation_oracle(A, A)
    B = uniform(np.random.default_rng(0).random((3, 2)))
    with pytest.raises(ValueError):
        gw_permutation_oracle(B, uniform(np.random.default_rng(0).random((4, 2))))


def test_permutation_oracle_bounds_solver(rng):
    for _ in range(5):
        A, B = uniform(rng.random((4, 2))), uniform(rng.random((4, 2)))
        oracle = gw_permutation_oracle(A, B)
        _, rep = solve_gw(A, B, FwConfig(restarts=8))
        # concave on the Birkhoff polytope for squared distances: a permutation is optimal
        assert rep.objective >= oracle.value - 1e-9


def test_quadruple_sum_matches_factored(rng):
    A, B = uniform(rng.random((3, 2))), uniform(rng.random((4, 2)))
    g = rng.random((3, 4))
    assert gw_quadruple_sum(g, A, B) == pytest.approx(gw_objective(g, A, B))


def test_random_feasible_plans(rng):
    p, q = rng.random(4), rng.random(5)
    plans = random_feasible_plans(p, q, 50, seed=1)
    assert len(plans) == 50
    for pl in plans:
        assert is_feasible(pl.matrix, p, q, partial=True)
    with pytest.raises(ValueError):
        random_feasible_plans(p, q, 0)


def test_grid_oracle_guards_and_upper_bound(rng):
    cost = rng.uniform(-1, 1, (2, 3))
    p, q = rng.random(2), rng.random(3)
    oracle = partial_ot_grid_oracle(cost, p, q, grid_steps=8)
    assert oracle.value >= solve_partial_ot(cost, p, q).objective - 1e-12
    with pytest.raises(OracleGuard):
        partial_ot_grid_oracle(np.zeros((3, 3)), np.ones(3), np.ones(3))
    with pytest.raises(OracleGuard):
        partial_ot_grid_oracle(cost, p, q, grid_steps=64)


def test_random_plans_never_beat_zero_plan_penalty(rng):
    A, B = uniform(rng.random((3, 2))), uniform(rng.random((3, 2)))
    for pl in random_feasible_plans(A.mass, B.mass, 10, seed=2):
        assert pgw_objective(pl, A, B, 0.3) >= 0.0

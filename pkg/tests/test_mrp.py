import numpy as np
import pytest

from markovrl.errors import DimensionMismatch, MaxItersExceeded
from markovrl.markov import validate_stochastic
from markovrl.models import (
    SNAKES_LANDING_REWARD,
    SNAKES_ROWS,
    random_irreducible_chain,
    random_stochastic,
    snakes_ladders_terminal,
    snakes_state,
)
from markovrl.mrp import (
    MarkovRewardProcess,
    bellman_residual,
    reward_from_next_state,
    solve_value,
    value_direct,
    value_iterate,
)

HALF = [[0.5, 0.5], [0.5, 0.5]]


def test_snakes_next_state_rewards():
    A = validate_stochastic(SNAKES_ROWS)
    r = reward_from_next_state(A, SNAKES_LANDING_REWARD)
    assert r[snakes_state(6)] == 1.25
    assert r[snakes_state(7)] == 0.75
    assert r[snakes_state(8)] == 0.75


def test_zero_reward_function():
    A = validate_stochastic(SNAKES_ROWS)
    np.testing.assert_array_equal(reward_from_next_state(A, np.zeros(9)), np.zeros(9))
    with pytest.raises(DimensionMismatch):
        reward_from_next_state(A, np.zeros(8))


def test_gamma_zero_gives_reward():
    r = np.array([1.0, -2.0])
    np.testing.assert_array_equal(solve_value(HALF, r, 0.0).v, r)


def test_value_direct_two_state():
    vv = value_direct(MarkovRewardProcess(HALF, [1.0, 0.0], 0.5))
    np.testing.assert_allclose(vv.v, [1.5, 0.5], atol=1e-14)
    assert vv.residual <= 1e-10


def test_value_direct_identity_geometric():
    vv = value_direct(MarkovRewardProcess(np.eye(2), [1.0, 1.0], 0.9))
    np.testing.assert_allclose(vv.v, [10.0, 10.0], atol=1e-12)


def test_mrp_rejects_bad_gamma():
    with pytest.raises(ValueError):
        MarkovRewardProcess(HALF, [1.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        MarkovRewardProcess(HALF, [1.0, 0.0], 0.0)


def test_iterate_from_fixed_point_one_step():
    mrp = MarkovRewardProcess(HALF, [1.0, 0.0], 0.5)
    vv = value_iterate(mrp, v0=value_direct(mrp).v)
    assert vv.iterations == 1


def test_iterate_two_state():
    mrp = MarkovRewardProcess(HALF, [1.0, 0.0], 0.5)
    vv = value_iterate(mrp, tol=1e-8)
    np.testing.assert_allclose(vv.v, [1.5, 0.5], atol=1e-8)
    assert bellman_residual(mrp.A, mrp.r, mrp.gamma, vv.v) <= vv.residual + 1e-15


def test_iterate_error_bound_per_iteration():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        mrp = MarkovRewardProcess(random_stochastic(rng, n), rng.normal(size=n), rng.uniform(0.3, 0.95))
        vstar = value_direct(mrp).v
        y = rng.normal(size=n) * 5
        e0 = np.max(np.abs(y - vstar))
        for k in range(1, 30):
            y = mrp.apply(y)
            assert np.max(np.abs(y - vstar)) <= mrp.gamma ** k * e0 + 1e-12


def test_oracle_agreement_random():
    rng = np.random.default_rng(11)
    for _ in range(30):
        n = int(rng.integers(1, 51))
        mrp = MarkovRewardProcess(random_stochastic(rng, n, 0.3), rng.normal(size=n), rng.choice([0.5, 0.9, 0.99]))
        tol = 1e-8
        it = value_iterate(mrp, tol=tol)
        assert np.max(np.abs(it.v - value_direct(mrp).v)) <= 2 * tol
        assert bellman_residual(mrp.A, mrp.r, mrp.gamma, it.v) <= it.residual + 1e-15


def test_monotone_and_contraction():
    rng = np.random.default_rng(5)
    mrp = random_irreducible_chain(6, 2, gamma=0.8)
    for _ in range(200):
        y1 = rng.normal(size=6)
        y2 = y1 + rng.uniform(0, 2, size=6)
        assert np.all(mrp.apply(y1) <= mrp.apply(y2) + 1e-15)
        y3 = rng.normal(size=6)
        lhs = np.max(np.abs(mrp.apply(y1) - mrp.apply(y3)))
        assert lhs <= mrp.gamma * np.max(np.abs(y1 - y3)) + 1e-14


def test_max_iters_exceeded_carries_iterate():
    mrp = MarkovRewardProcess(HALF, [1.0, 0.0], 0.99)
    with pytest.raises(MaxItersExceeded) as info:
        value_iterate(mrp, tol=1e-12, max_iters=5)
    assert info.value.last.shape == (2,)
    assert info.value.iterations == 5


def test_snakes_terminal_value_sanity():
    mrp = snakes_ladders_terminal()
    direct = value_direct(mrp)
    it = value_iterate(mrp, tol=1e-8)
    assert direct.v[snakes_state("W")] == 0.0
    assert direct.v[snakes_state("L")] == 0.0
    assert np.max(np.abs(direct.v - it.v)) <= 1e-8

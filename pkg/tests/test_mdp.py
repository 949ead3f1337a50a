import numpy as np
import pytest

from markovrl.errors import DimensionMismatch
from markovrl.mdp import (
    MarkovDecisionProcess,
    Policy,
    action_values,
    bellman_map,
    brute_force_optimal_value,
    f_map,
    greedy_policy,
    induced_mrp,
    policy_value,
    q_of_policy,
    solve_optimal_q,
    solve_optimal_value,
)
from markovrl.models import two_state_mdp

from conftest import mdp_corpus, random_mdp


def test_two_state_example_by_hand():
    # action 0 keeps the state, action 1 swaps; reward 1 only for staying in state 0
    mdp = two_state_mdp()
    v = solve_optimal_value(mdp, tol=1e-12).v
    np.testing.assert_allclose(v, [2.0, 1.0], atol=1e-10)
    q = solve_optimal_q(mdp, tol=1e-12).Q
    np.testing.assert_allclose(q, [[2.0, 0.5], [0.5, 1.0]], atol=1e-10)
    assert greedy_policy(q).mapping.tolist() == [0, 1]


def test_greedy_ties_lowest_index():
    assert greedy_policy([[1.0, 1.0, 0.0], [0.0, 2.0, 2.0]]).mapping.tolist() == [0, 1]


def test_induced_mrp_deterministic_and_probabilistic_agree():
    rng = np.random.default_rng(1)
    mdp = random_mdp(rng, 4, 3, 0.7)
    acts = np.array([2, 0, 1, 1])
    det = induced_mrp(mdp, Policy.deterministic(acts))
    prob = induced_mrp(mdp, Policy.probabilistic(np.eye(3)[acts]))
    np.testing.assert_allclose(np.asarray(det.A), np.asarray(prob.A), atol=1e-15)
    np.testing.assert_allclose(det.r, prob.r, atol=1e-15)


def test_induced_mrp_uniform_mixture():
    rng = np.random.default_rng(2)
    mdp = random_mdp(rng, 3, 2, 0.5)
    mrp = induced_mrp(mdp, Policy.probabilistic(np.full((3, 2), 0.5)))
    np.testing.assert_allclose(np.asarray(mrp.A), 0.5 * (mdp.P[0] + mdp.P[1]), atol=1e-15)
    np.testing.assert_allclose(mrp.r, mdp.R.mean(axis=1), atol=1e-15)


def test_policy_bad_shape():
    mdp = two_state_mdp()
    with pytest.raises(DimensionMismatch):
        induced_mrp(mdp, Policy.deterministic([0, 1, 0]))
    with pytest.raises(DimensionMismatch):
        induced_mrp(mdp, Policy.deterministic([0, 2]))
    with pytest.raises(ValueError):
        Policy.probabilistic([[0.5, 0.6], [1.0, 0.0]])


def test_mdp_validation():
    with pytest.raises(DimensionMismatch):
        MarkovDecisionProcess((np.eye(2), np.eye(3)), np.zeros((2, 2)), 0.5)
    with pytest.raises(DimensionMismatch):
        MarkovDecisionProcess((np.eye(2),), np.zeros((2, 2)), 0.5)
    with pytest.raises(ValueError):
        MarkovDecisionProcess((np.eye(2),), np.zeros((2, 1)), 1.0)


def test_bellman_map_explicit_loop():
    rng = np.random.default_rng(3)
    mdp = random_mdp(rng, 5, 3, 0.8)
    v = rng.normal(size=5)
    expected = [
        max(mdp.R[i, k] + mdp.gamma * sum(mdp.P[k, i, j] * v[j] for j in range(5)) for k in range(3))
        for i in range(5)
    ]
    np.testing.assert_allclose(bellman_map(mdp, v), expected, atol=1e-14)


def test_f_map_explicit_loop():
    rng = np.random.default_rng(4)
    mdp = random_mdp(rng, 4, 2, 0.6)
    q = rng.normal(size=(4, 2))
    expected = np.array([
        [mdp.R[i, k] + mdp.gamma * sum(mdp.P[k, i, j] * q[j].max() for j in range(4)) for k in range(2)]
        for i in range(4)
    ])
    np.testing.assert_allclose(f_map(mdp, q).Q, expected, atol=1e-14)


def test_single_action_reduces_to_mrp():
    rng = np.random.default_rng(5)
    mdp = random_mdp(rng, 4, 1, 0.9)
    mrp = induced_mrp(mdp, Policy.deterministic([0] * 4))
    v = solve_optimal_value(mdp, tol=1e-12).v
    np.testing.assert_allclose(v, policy_value(mdp, Policy.deterministic([0] * 4)), atol=1e-10)
    np.testing.assert_allclose(bellman_map(mdp, v), mrp.apply(v), atol=1e-14)


def test_brute_force_on_corpus_subset():
    for mdp in mdp_corpus(20, seed=77):
        v = solve_optimal_value(mdp, tol=1e-10).v
        assert np.max(np.abs(v - brute_force_optimal_value(mdp))) <= 1e-8


def test_q_of_policy_consistency_and_bellman_equation():
    rng = np.random.default_rng(6)
    for _ in range(20):
        mdp = random_mdp(rng, int(rng.integers(1, 6)), int(rng.integers(1, 4)), 0.9)
        pi = Policy.deterministic(rng.integers(mdp.m, size=mdp.n))
        q = q_of_policy(mdp, pi)
        v = policy_value(mdp, pi)
        np.testing.assert_allclose(q[np.arange(mdp.n), pi.mapping], v, atol=1e-8)
        np.testing.assert_allclose(q, action_values(mdp, v), atol=1e-10)


def test_solve_optimal_q_matches_v():
    rng = np.random.default_rng(8)
    mdp = random_mdp(rng, 6, 3, 0.9)
    q = solve_optimal_q(mdp, tol=1e-10)
    v = solve_optimal_value(mdp, tol=1e-10)
    assert q.optimal
    np.testing.assert_allclose(q.Q.max(axis=1), v.v, atol=1e-8)
    assert q.residual <= 1e-9


def test_solve_optimal_value_custom_start():
    mdp = two_state_mdp()
    out = solve_optimal_value(mdp, tol=1e-12, v0=np.array([2.0, 1.0]))
    assert out.iterations == 1


def test_four_state_two_action_policy_example():
    rng = np.random.default_rng(31)
    mdp = random_mdp(rng, 4, 2, 0.9)
    A1, A2 = mdp.P
    M1 = np.array([[0, 1], [0, 1], [1, 0], [0, 1]], dtype=float)
    a_pi1 = np.asarray(induced_mrp(mdp, Policy.probabilistic(M1)).A)
    np.testing.assert_array_equal(a_pi1, np.array([A2[0], A2[1], A1[2], A2[3]]))
    det = np.asarray(induced_mrp(mdp, Policy.deterministic([1, 1, 0, 1])).A)
    np.testing.assert_array_equal(det, a_pi1)
    M2 = np.array([[0.3, 0.7], [0.2, 0.8], [0.9, 0.1], [0.4, 0.6]])
    a_pi2 = np.asarray(induced_mrp(mdp, Policy.probabilistic(M2)).A)
    expected = np.array([M2[i, 0] * A1[i] + M2[i, 1] * A2[i] for i in range(4)])
    np.testing.assert_allclose(a_pi2, expected, atol=1e-15)

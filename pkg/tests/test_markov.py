import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markovrl.errors import (
    DimensionMismatch,
    NegativeEntryError,
    NotIrreducibleError,
    RowSumError,
)
from markovrl.markov import (
    StochasticMatrix,
    is_irreducible,
    sample_path,
    stationary_distribution,
    transition_counts,
    validate_stochastic,
    weighted_norm,
)
from markovrl.models import SNAKES_ROWS, random_irreducible_chain, random_stochastic

from conftest import transitive_closure_irreducible

CYCLE3 = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]


def test_identity_is_valid():
    A = validate_stochastic(np.eye(2))
    assert A.n == 2
    np.testing.assert_array_equal(np.asarray(A), np.eye(2))


def test_row_sum_error_reports_row():
    with pytest.raises(RowSumError) as info:
        validate_stochastic([[0.5, 0.6], [0.5, 0.5]])
    assert info.value.row == 0


def test_negative_entry_rejected():
    with pytest.raises(NegativeEntryError):
        validate_stochastic([[1.5, -0.5], [0.5, 0.5]])


def test_non_square_rejected():
    with pytest.raises(DimensionMismatch):
        validate_stochastic([[0.5, 0.5]])


def test_snakes_matrix_valid():
    A = validate_stochastic(SNAKES_ROWS)
    assert A.n == 9


def test_tolerance_and_renormalization():
    eps = 5e-13
    A = validate_stochastic([[0.5 + eps, 0.5], [0.25, 0.75]])
    assert abs(np.asarray(A)[0].sum() - 1.0) <= 1e-15
    with pytest.raises(RowSumError):
        validate_stochastic([[0.5 + 1e-11, 0.5], [0.25, 0.75]])


def test_matrix_is_immutable():
    A = validate_stochastic(np.eye(2))
    with pytest.raises(ValueError):
        np.asarray(A)[0, 0] = 0.5


def test_json_round_trip():
    A = validate_stochastic([[0.9, 0.1], [0.5, 0.5]])
    assert StochasticMatrix.from_dict(A.to_dict()) == A


@pytest.mark.parametrize("rows, expected", [
    (CYCLE3, True),
    (SNAKES_ROWS, False),
    ([[0.9, 0.1], [0.5, 0.5]], True),
    (np.eye(2), False),
    ([[1.0]], True),
])
def test_is_irreducible_examples(rows, expected):
    assert is_irreducible(validate_stochastic(rows)) is expected


def test_is_irreducible_matches_transitive_closure_corpus():
    rng = np.random.default_rng(7)
    for _ in range(200):
        support = rng.random((4, 4)) < rng.uniform(0.15, 0.6)
        a = rng.random((4, 4)) * support
        empty = a.sum(axis=1) == 0
        a[empty, rng.integers(4, size=empty.sum())] = 1.0
        a /= a.sum(axis=1, keepdims=True)
        A = validate_stochastic(a)
        assert is_irreducible(A) == transitive_closure_irreducible(np.asarray(A))


def test_stationary_two_state():
    mu = stationary_distribution(validate_stochastic([[0.9, 0.1], [0.5, 0.5]])).mu
    np.testing.assert_allclose(mu, [5 / 6, 1 / 6], atol=1e-14)


def test_stationary_doubly_stochastic_is_uniform():
    a = [[0.2, 0.3, 0.5], [0.5, 0.2, 0.3], [0.3, 0.5, 0.2]]
    mu = stationary_distribution(validate_stochastic(a)).mu
    np.testing.assert_allclose(mu, [1 / 3] * 3, atol=1e-14)


def test_stationary_rejects_reducible():
    with pytest.raises(NotIrreducibleError):
        stationary_distribution(validate_stochastic(SNAKES_ROWS))


@pytest.mark.parametrize("seed", range(20))
def test_stationary_invariants(seed):
    A = random_irreducible_chain(int(3 + seed % 8), seed).A
    st_ = stationary_distribution(A)
    mu = st_.mu
    assert np.all(mu >= 0)
    assert abs(mu.sum() - 1) <= 1e-12
    assert np.max(np.abs(mu @ np.asarray(A) - mu)) <= 1e-10
    assert st_.residual <= 1e-10


def test_weighted_norm_examples():
    mu = np.array([5 / 6, 1 / 6])
    assert weighted_norm(np.ones(2), mu) == pytest.approx(1.0, abs=1e-15)
    assert weighted_norm(np.zeros(2), mu) == 0.0
    assert weighted_norm([1.0, -2.0], mu) == pytest.approx(np.sqrt(1.5), abs=1e-15)
    with pytest.raises(DimensionMismatch):
        weighted_norm(np.ones(3), mu)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_sup_norm_nonexpansive(n, seed):
    rng = np.random.default_rng(seed)
    a = random_stochastic(rng, n, density=0.6)
    v = rng.normal(size=n) * 10
    assert np.max(np.abs(a @ v)) <= np.max(np.abs(v)) * (1 + 1e-15)
    # induced inf->inf norm is the max row sum
    assert np.max(np.abs(a).sum(axis=1)) == pytest.approx(1.0, abs=1e-14)


def test_m_norm_nonexpansive_random_vectors():
    mrp = random_irreducible_chain(6, 4)
    mu = stationary_distribution(mrp.A).mu
    a = np.asarray(mrp.A)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        v = rng.normal(size=6) * rng.uniform(0.1, 100)
        assert weighted_norm(a @ v, mu) <= weighted_norm(v, mu) * (1 + 1e-12)


def test_sample_path_absorbing_identity():
    p = sample_path(validate_stochastic(np.eye(3)), 2, 50, seed=99)
    assert p.length == 50
    assert set(p.states.tolist()) == {2}


def test_sample_path_permutation():
    p = sample_path(validate_stochastic(CYCLE3), 0, 3, seed=1)
    assert p.states.tolist() == [0, 1, 2, 0]


def test_sample_path_respects_support_and_reproducible():
    A = validate_stochastic(SNAKES_ROWS)
    p1 = sample_path(A, 0, 5000, seed=42)
    p2 = sample_path(A, 0, 5000, seed=42)
    assert p1.states.tobytes() == p2.states.tobytes()
    a = np.asarray(A)
    assert np.all(a[p1.states[:-1], p1.states[1:]] > 0)
    p3 = sample_path(A, 0, 5000, seed=43)
    assert p3.states.tobytes() != p1.states.tobytes()


def test_sample_path_empirical_frequencies():
    A = random_irreducible_chain(4, 8).A
    p = sample_path(A, 0, 100_000, seed=5)
    counts = transition_counts(p.states, 4)
    freq = counts / counts.sum(axis=1, keepdims=True)
    assert np.max(np.abs(freq - np.asarray(A))) <= 0.01


def test_sample_path_zero_steps():
    p = sample_path(validate_stochastic(CYCLE3), 1, 0, seed=0)
    assert p.states.tolist() == [1]


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 9), seed=st.integers(0, 2**32 - 1))
def test_validation_is_idempotent_and_exact(n, seed):
    rng = np.random.default_rng(seed)
    a = random_stochastic(rng, n, density=0.7)
    A = validate_stochastic(a)
    again = validate_stochastic(A.to_dict()["rows"])
    assert np.asarray(again).tobytes() == np.asarray(A).tobytes()
    assert np.max(np.abs(np.asarray(A).sum(axis=1) - 1.0)) <= 4 * np.finfo(float).eps
    assert np.max(np.abs(np.asarray(A) - a)) <= 1e-15

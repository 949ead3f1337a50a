"""Finite discounted MDPs: policies, the Bellman map B, the Q-map F and their fixed points."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .markov import StochasticMatrix, validate_stochastic
from .mrp import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    MarkovRewardProcess,
    ValueVector,
    fixed_point_iterate,
    solve_value,
)


@dataclass(frozen=True, eq=False)
class MarkovDecisionProcess:
    """``actions[k]`` is the transition matrix of action k; ``R`` is the n x m reward table."""

    actions: tuple
    R: np.ndarray
    gamma: float

    def __post_init__(self):
        acts = tuple(
            a if isinstance(a, StochasticMatrix) else validate_stochastic(a)
            for a in self.actions
        )
        if not acts:
            raise DimensionMismatch("an MDP needs at least one action")
        n = acts[0].n
        if any(a.n != n for a in acts):
            raise DimensionMismatch("all action matrices must share the state count")
        R = np.array(self.R, dtype=float)
        if R.shape != (n, len(acts)):
            raise DimensionMismatch(f"reward table has shape {R.shape}, expected ({n}, {len(acts)})")
        if not np.all(np.isfinite(R)):
            raise ValueError("reward table must be finite")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        R.flags.writeable = False
        P = np.stack([np.asarray(a) for a in acts])
        P.flags.writeable = False
        object.__setattr__(self, "actions", acts)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "_P", P)

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def m(self) -> int:
        return self.R.shape[1]

    @property
    def P(self) -> np.ndarray:
        """Transition tensor of shape (m, n, n)."""
        return self._P

    def expected_next(self, v):
        """``out[i, k] = sum_j a^k_ij v_j``."""
        return np.einsum("kij,j->ik", self._P, v)


@dataclass(frozen=True, eq=False)
class Policy:
    """Deterministic (``mapping`` holds action indices) or probabilistic (``mapping`` is n x m)."""

    kind: str
    mapping: np.ndarray

    def __post_init__(self):
        arr = np.array(self.mapping)
        if self.kind == "deterministic":
            arr = arr.astype(np.int64)
            if arr.ndim != 1:
                raise DimensionMismatch("deterministic policy must be a 1-d array of actions")
        elif self.kind == "probabilistic":
            arr = validate_stochastic_rows(arr)
        else:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "mapping", arr)

    @classmethod
    def deterministic(cls, actions):
        return cls("deterministic", actions)

    @classmethod
    def probabilistic(cls, phi):
        return cls("probabilistic", phi)

    @property
    def n(self):
        return self.mapping.shape[0]

    def as_matrix(self, m):
        """n x m action-probability matrix."""
        if self.kind == "probabilistic":
            return self.mapping
        phi = np.zeros((self.n, m))
        phi[np.arange(self.n), self.mapping] = 1.0
        return phi


def validate_stochastic_rows(phi):
    phi = np.array(phi, dtype=float)
    if phi.ndim != 2:
        raise DimensionMismatch("probabilistic policy must be an n x m matrix")
    if np.any(phi < 0) or np.any(np.abs(phi.sum(axis=1) - 1.0) > 1e-12):
        raise ValueError("policy rows must be probability vectors")
    return phi


@dataclass(frozen=True, eq=False)
class ActionValueFunction:
    Q: np.ndarray
    residual: float = float("nan")
    iterations: int = 0
    optimal: bool = False


def _check_policy(mdp, pi):
    if pi.n != mdp.n:
        raise DimensionMismatch(f"policy covers {pi.n} states, MDP has {mdp.n}")
    if pi.kind == "deterministic":
        if np.any(pi.mapping < 0) or np.any(pi.mapping >= mdp.m):
            raise DimensionMismatch("deterministic policy refers to a nonexistent action")
    elif pi.mapping.shape[1] != mdp.m:
        raise DimensionMismatch(f"policy has {pi.mapping.shape[1]} actions, MDP has {mdp.m}")


def induced_mrp(mdp: MarkovDecisionProcess, pi: Policy) -> MarkovRewardProcess:
    """Transition matrix ``A_pi`` and reward ``r_pi`` obtained by following ``pi``."""
    _check_policy(mdp, pi)
    rows = np.arange(mdp.n)
    if pi.kind == "deterministic":
        a_pi = mdp.P[pi.mapping, rows, :]
        r_pi = mdp.R[rows, pi.mapping]
    else:
        phi = pi.mapping
        a_pi = np.einsum("ik,kij->ij", phi, mdp.P)
        r_pi = np.sum(phi * mdp.R, axis=1)
    # rows are convex combinations of validated rows: stochastic by construction
    a_pi = np.array(a_pi)
    a_pi.flags.writeable = False
    return MarkovRewardProcess(StochasticMatrix(a_pi), r_pi, mdp.gamma)


def policy_value(mdp, pi) -> np.ndarray:
    """``V_pi`` by direct linear solve on the induced MRP."""
    mrp = induced_mrp(mdp, pi)
    return solve_value(mrp.A, mrp.r, mrp.gamma).v


def bellman_map(mdp: MarkovDecisionProcess, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (mdp.n,):
        raise DimensionMismatch(f"v has shape {v.shape}, expected ({mdp.n},)")
    return np.max(mdp.R + mdp.gamma * mdp.expected_next(v), axis=1)


def action_values(mdp: MarkovDecisionProcess, v) -> np.ndarray:
    """``R(x_i, u_k) + gamma sum_j a^k_ij v_j`` as an n x m table."""
    return mdp.R + mdp.gamma * mdp.expected_next(np.asarray(v, dtype=float))


def f_map(mdp: MarkovDecisionProcess, Q) -> ActionValueFunction:
    q = np.asarray(getattr(Q, "Q", Q), dtype=float)
    if q.shape != (mdp.n, mdp.m):
        raise DimensionMismatch(f"Q has shape {q.shape}, expected ({mdp.n}, {mdp.m})")
    return ActionValueFunction(action_values(mdp, q.max(axis=1)))


def solve_optimal_value(mdp: MarkovDecisionProcess, tol=DEFAULT_TOL,
                        max_iters=DEFAULT_MAX_ITERS, v0=None) -> ValueVector:
    """Fixed point of B, i.e. V*, to within ``tol`` in the sup norm."""
    if v0 is None:
        v0 = np.zeros(mdp.n)
    v, _, k = fixed_point_iterate(lambda y: bellman_map(mdp, y), v0, mdp.gamma, tol, max_iters)
    residual = float(np.max(np.abs(v - bellman_map(mdp, v))))
    return ValueVector(v, residual, k)


def solve_optimal_q(mdp: MarkovDecisionProcess, tol=DEFAULT_TOL,
                    max_iters=DEFAULT_MAX_ITERS, q0=None) -> ActionValueFunction:
    """Fixed point of F, i.e. Q*, starting from ``q0`` (zeros by default)."""
    if q0 is None:
        q0 = np.zeros((mdp.n, mdp.m))
    q, _, k = fixed_point_iterate(lambda y: f_map(mdp, y).Q, q0, mdp.gamma, tol, max_iters)
    residual = float(np.max(np.abs(q - f_map(mdp, q).Q)))
    return ActionValueFunction(q, residual, k, optimal=True)


def greedy_policy(Q) -> Policy:
    """argmax over actions per state; ties go to the lowest action index."""
    q = np.asarray(getattr(Q, "Q", Q), dtype=float)
    return Policy.deterministic(np.argmax(q, axis=1))


def q_of_policy(mdp: MarkovDecisionProcess, pi: Policy) -> np.ndarray:
    """Solve the nm-dimensional linear system for ``Q_pi`` of a deterministic policy."""
    if pi.kind != "deterministic":
        raise ValueError("Q_pi is defined for deterministic policies only")
    _check_policy(mdp, pi)
    n, m = mdp.n, mdp.m
    # unknown (i, k) sits at i*m + k; successor j contributes via column j*m + pi(j)
    G = np.zeros((n * m, n * m))
    cols = np.arange(n) * m + pi.mapping
    for k in range(m):
        G[np.ix_(np.arange(n) * m + k, cols)] = mdp.P[k]
    q = np.linalg.solve(np.eye(n * m) - mdp.gamma * G, mdp.R.reshape(-1))
    return q.reshape(n, m)


def deterministic_policies(n, m):
    """All m**n deterministic policies."""
    for acts in itertools.product(range(m), repeat=n):
        yield Policy.deterministic(acts)


def brute_force_optimal_value(mdp: MarkovDecisionProcess) -> np.ndarray:
    """Componentwise max of ``V_pi`` over every deterministic policy."""
    best = np.full(mdp.n, -np.inf)
    for pi in deterministic_policies(mdp.n, mdp.m):
        best = np.maximum(best, policy_value(mdp, pi))
    return best

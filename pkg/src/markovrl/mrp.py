"""Markov reward processes and their value vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MaxItersExceeded
from .markov import StochasticMatrix, validate_stochastic

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 100_000


@dataclass(frozen=True, eq=False)
class MarkovRewardProcess:
    A: StochasticMatrix
    r: np.ndarray
    gamma: float

    def __post_init__(self):
        if not isinstance(self.A, StochasticMatrix):
            object.__setattr__(self, "A", validate_stochastic(self.A))
        r = np.array(self.r, dtype=float)
        if r.shape != (self.A.n,):
            raise DimensionMismatch(f"reward has shape {r.shape}, expected ({self.A.n},)")
        if not np.all(np.isfinite(r)):
            raise ValueError("reward vector must be finite")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        r.flags.writeable = False
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n(self) -> int:
        return self.A.n

    def apply(self, y):
        """The affine map ``y -> r + gamma A y``."""
        return self.r + self.gamma * (np.asarray(self.A) @ y)


@dataclass(frozen=True, eq=False)
class ValueVector:
    v: np.ndarray
    residual: float
    iterations: int = 0


def bellman_residual(A, r, gamma, v) -> float:
    """``||v - (r + gamma A v)||_inf``."""
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v - (r + gamma * (np.asarray(A) @ v)))))


def reward_from_next_state(A: StochasticMatrix, f) -> np.ndarray:
    """Expected one-step reward ``r_i = sum_j a_ij f_j`` when the reward is ``f(X_{t+1})``."""
    f = np.asarray(f, dtype=float)
    if f.shape != (A.n,):
        raise DimensionMismatch(f"f has shape {f.shape}, expected ({A.n},)")
    return np.asarray(A) @ f


def value_direct(mrp: MarkovRewardProcess) -> ValueVector:
    """Solve ``(I - gamma A) v = r``; used as the oracle for all iterative methods."""
    return solve_value(mrp.A, mrp.r, mrp.gamma)


def solve_value(A, r, gamma) -> ValueVector:
    """Direct solve on raw arrays; unlike MarkovRewardProcess this admits gamma = 0."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    r = np.asarray(r, dtype=float)
    a = np.asarray(A)
    n = a.shape[0]
    v = np.linalg.solve(np.eye(n) - gamma * a, r)
    return ValueVector(v, bellman_residual(a, r, gamma, v))


def contraction_stop(gamma, tol):
    """Step-size threshold that guarantees ``||y_{k+1} - y*||_inf <= tol``.

    For a gamma-contraction, ``||y_{k+1} - y*|| <= gamma/(1-gamma) ||y_{k+1} - y_k||``.
    """
    return tol * (1.0 - gamma) / gamma


def fixed_point_iterate(T, y0, gamma, tol, max_iters):
    """Iterate a gamma-contraction ``T`` until the a-posteriori error bound is below ``tol``.

    Returns ``(y, step, iterations)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    threshold = contraction_stop(gamma, tol)
    y = np.array(y0, dtype=float)
    step = np.inf
    for k in range(1, max_iters + 1):
        y_next = T(y)
        step = float(np.max(np.abs(y_next - y)))
        y = y_next
        if step <= threshold:
            return y, step, k
    raise MaxItersExceeded(y, step, max_iters)


def value_iterate(mrp: MarkovRewardProcess, v0=None, tol=DEFAULT_TOL,
                  max_iters=DEFAULT_MAX_ITERS) -> ValueVector:
    """Successive approximation ``y <- r + gamma A y`` from ``v0`` (zeros by default)."""
    if v0 is None:
        v0 = np.zeros(mrp.n)
    v, _, k = fixed_point_iterate(mrp.apply, v0, mrp.gamma, tol, max_iters)
    return ValueVector(v, bellman_residual(mrp.A, mrp.r, mrp.gamma, v), k)

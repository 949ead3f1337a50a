"""Temporal-difference learning, tabular and with linear function approximation.

Tabular TD(lambda) here uses the indicator-truncated eligibility: after visiting
state i at time t only coordinate i is eligible, with weight
``sum_{tau <= t, N_tau = i} (gamma lambda)^(t - tau)``.  The weight is kept per
state and decayed lazily by the gap since the previous visit.

With a basis matrix ``psi`` (n x d) the eligibility is the ordinary
accumulating trace ``z_t = gamma lambda z_{t-1} + psi[X_t]``, and the iterates
converge to the fixed point of the projected operator ``Pi T^lambda``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFiniteUpdate, NotIrreducibleError, RankDeficientBasis
from .markov import is_irreducible, sample_path, stationary_distribution, weighted_norm
from .mrp import MarkovRewardProcess
from .sa import ClockMode, StepSchedule, check_clock_schedule
from .traces import TraceRecord

TABULAR_TRACE_COLUMNS = ("t", "state", "delta", "err_inf")
FA_TRACE_COLUMNS = ("t", "state", "delta", "theta_err_2")
RANK_TOL = 1e-10
TAIL_TOL = 1e-14


def temporal_difference(v_hat, r_i, i, j, gamma) -> float:
    """``r_i + gamma * v_hat[j] - v_hat[i]``."""
    return r_i + gamma * v_hat[j] - v_hat[i]


def _check_lambda(lam):
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must lie in [0, 1), got {lam}")


def _require_irreducible(A, strict):
    if is_irreducible(A):
        return True
    msg = "sample chain is not irreducible; convergence is not guaranteed"
    if strict:
        raise NotIrreducibleError(msg)
    warnings.warn(msg)
    return False


def tabular_eligibility(states, gamma_lambda) -> np.ndarray:
    """Eligibility weights ``z_t`` of a whole index sequence by direct summation.

    Quadratic in the path length; meant for checking the incremental form.
    """
    states = list(states)
    out = np.zeros(len(states))
    for t, s in enumerate(states):
        out[t] = sum(gamma_lambda ** tau for tau in range(t + 1) if states[t - tau] == s)
    return out


@dataclass
class TDRun:
    v_hat: np.ndarray
    trace: list = field(default_factory=list)
    visits: np.ndarray = None
    irreducible: bool = True
    seed: int = 0


def td_lambda_tabular(mrp: MarkovRewardProcess, lam, schedule: StepSchedule, clock, steps,
                      seed, start=0, v0=None, v_star=None, strict=True,
                      record_every=1, path=None) -> TDRun:
    """Run tabular TD(lambda) on a seeded sample path of ``mrp``.

    ``path`` overrides the generated index sequence (it must have ``steps + 1``
    entries).  ``v_star`` only feeds the ``err_inf`` trace column.
    """
    _check_lambda(lam)
    clock = ClockMode(clock)
    check_clock_schedule(schedule, clock)
    irreducible = _require_irreducible(mrp.A, strict)
    n = mrp.n
    if path is None:
        states = sample_path(mrp.A, start, steps, seed).states.tolist()
    else:
        states = list(path)
        if len(states) != steps + 1:
            raise DimensionMismatch("path must contain steps + 1 states")
    betas = schedule.values(steps)
    local = clock is ClockMode.LOCAL
    r = mrp.r.tolist()
    gamma = mrp.gamma
    gl = gamma * lam
    v = [0.0] * n if v0 is None else [float(x) for x in v0]
    vs = None if v_star is None else [float(x) for x in v_star]
    weight = [0.0] * n
    last = [-1] * n
    visits = [0] * n
    trace = []
    for t in range(steps):
        i = states[t]
        j = states[t + 1]
        delta = r[i] + gamma * v[j] - v[i]
        weight[i] = (gl ** (t - last[i]) * weight[i] + 1.0) if last[i] >= 0 else 1.0
        last[i] = t
        alpha = betas[visits[i]] if local else betas[t]
        visits[i] += 1
        v[i] += delta * alpha * weight[i]
        if not math.isfinite(v[i]):
            raise NonFiniteUpdate(t, f"estimate of state {i} diverged")
        if (t + 1) % record_every == 0 or t + 1 == steps:
            err = max(abs(a - b) for a, b in zip(v, vs)) if vs is not None else float("nan")
            trace.append(TraceRecord(t + 1, {"state": i, "delta": delta, "err_inf": err}))
    return TDRun(np.array(v), trace, np.array(visits), irreducible, int(seed))


# -- function approximation -------------------------------------------------


def check_basis(psi) -> np.ndarray:
    """Return ``psi`` as a float array after an SVD rank check (relative tolerance 1e-10)."""
    psi = np.asarray(psi, dtype=float)
    if psi.ndim != 2 or psi.shape[1] > psi.shape[0]:
        raise RankDeficientBasis(f"basis of shape {psi.shape} cannot have full column rank")
    s = np.linalg.svd(psi, compute_uv=False)
    if s[0] == 0 or s[-1] / s[0] <= RANK_TOL:
        raise RankDeficientBasis("basis matrix does not have full column rank")
    return psi


def t_lambda_truncation(gamma, lam, r_sup, v_sup, tol=TAIL_TOL) -> int:
    """Smallest L with ``(gl)^(L+1)/(1-gl) * (r_sup/(1-gamma) + v_sup) <= tol``."""
    gl = gamma * lam
    scale = r_sup / (1.0 - gamma) + v_sup
    if gl == 0.0 or scale == 0.0:
        return 0
    bound = scale / (1.0 - gl)
    if bound <= tol:
        return 0
    return max(0, math.ceil(math.log(tol / bound) / math.log(gl)) - 1)


def t_lambda_operator(mrp: MarkovRewardProcess, lam, v, truncation=None) -> np.ndarray:
    """Evaluate ``T^lambda v`` by its power series.

    Reordering the defining double sum gives
    ``sum_l (gl)^l A^l r + gamma (1 - lambda) sum_l (gl)^l A^(l+1) v`` with
    ``gl = gamma * lambda``; terms ``l = 0..L`` are summed and the tail is below 1e-14.
    """
    _check_lambda(lam)
    v = np.asarray(v, dtype=float)
    if v.shape != (mrp.n,):
        raise DimensionMismatch(f"v has shape {v.shape}, expected ({mrp.n},)")
    gamma = mrp.gamma
    gl = gamma * lam
    needed = t_lambda_truncation(gamma, lam, float(np.max(np.abs(mrp.r))), float(np.max(np.abs(v))))
    if truncation is None:
        truncation = needed
    elif truncation < needed:
        raise ValueError(f"truncation {truncation} too short; at least {needed} terms required")
    A = np.asarray(mrp.A)
    ar = mrp.r.copy()      # A^l r
    av = A @ v             # A^(l+1) v
    out = ar + gamma * (1.0 - lam) * av
    coef = 1.0
    for _ in range(truncation):
        coef *= gl
        ar = A @ ar
        av = A @ av
        out = out + coef * (ar + gamma * (1.0 - lam) * av)
    return out


def projection_M(psi, mu, a) -> np.ndarray:
    """M-orthogonal projection of ``a`` onto range(psi), ``M = diag(mu)``."""
    psi = check_basis(psi)
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    a = np.asarray(a, dtype=float)
    if mu.shape != (psi.shape[0],) or a.shape != mu.shape:
        raise DimensionMismatch("psi, mu and a must agree on the state count")
    if np.any(mu <= 0):
        raise ValueError("weights must be strictly positive")
    gram = psi.T @ (mu[:, None] * psi)
    return psi @ np.linalg.solve(gram, psi.T @ (mu * a))


@dataclass(frozen=True, eq=False)
class FAFixedPoint:
    theta: np.ndarray
    residual: float
    mu: np.ndarray


def td_fa_fixed_point(mrp: MarkovRewardProcess, psi, lam) -> FAFixedPoint:
    """Limit of TD(lambda) with basis ``psi``: the solution of ``Pi T^lambda (psi theta) = psi theta``.

    ``T^lambda v = (I - gl A)^-1 r + gamma (1 - lambda) (I - gl A)^-1 A v`` is affine, so
    the projected equation reduces to a d x d linear system.
    """
    _check_lambda(lam)
    psi = check_basis(psi)
    if psi.shape[0] != mrp.n:
        raise DimensionMismatch(f"basis has {psi.shape[0]} rows, chain has {mrp.n} states")
    mu = stationary_distribution(mrp.A).mu  # raises NotIrreducibleError
    A = np.asarray(mrp.A)
    n = mrp.n
    gamma = mrp.gamma
    inv = np.linalg.inv(np.eye(n) - gamma * lam * A)
    c = inv @ mrp.r
    K = gamma * (1.0 - lam) * inv @ A
    pm = psi.T * mu
    lhs = pm @ (psi - K @ psi)
    theta = np.linalg.solve(lhs, pm @ c)
    v = psi @ theta
    residual = float(np.max(np.abs(projection_M(psi, mu, t_lambda_operator(mrp, lam, v)) - v)))
    return FAFixedPoint(theta, residual, mu)


def td_fa_error_bound(mrp: MarkovRewardProcess, psi, lam, v_star=None):
    """Return ``(||psi theta* - v*||_M, (1-gl)/(1-gamma) * ||Pi v* - v*||_M)``."""
    from .mrp import value_direct

    fp = td_fa_fixed_point(mrp, psi, lam)
    if v_star is None:
        v_star = value_direct(mrp).v
    lhs = weighted_norm(np.asarray(psi) @ fp.theta - v_star, fp.mu)
    best = weighted_norm(projection_M(psi, fp.mu, v_star) - v_star, fp.mu)
    factor = (1.0 - mrp.gamma * lam) / (1.0 - mrp.gamma)
    return lhs, factor * best


@dataclass
class TDFARun:
    theta: np.ndarray
    trace: list = field(default_factory=list)
    z: np.ndarray = None
    seed: int = 0


def td_lambda_fa(mrp: MarkovRewardProcess, psi, lam, schedule: StepSchedule, steps, seed,
                 start=0, theta0=None, theta_star=None, strict=True, record_every=1,
                 path=None) -> TDFARun:
    """TD(lambda) with linear features, global-clock step sizes ``alpha_t = beta_t``."""
    _check_lambda(lam)
    psi = check_basis(psi)
    if psi.shape[0] != mrp.n:
        raise DimensionMismatch(f"basis has {psi.shape[0]} rows, chain has {mrp.n} states")
    check_clock_schedule(schedule, ClockMode.GLOBAL)
    _require_irreducible(mrp.A, strict)
    if path is None:
        states = sample_path(mrp.A, start, steps, seed).states.tolist()
    else:
        states = list(path)
        if len(states) != steps + 1:
            raise DimensionMismatch("path must contain steps + 1 states")
    d = psi.shape[1]
    betas = schedule.values(steps)
    rows = [psi[i].copy() for i in range(mrp.n)]
    r = mrp.r.tolist()
    gamma = mrp.gamma
    gl = gamma * lam
    theta = np.zeros(d) if theta0 is None else np.array(theta0, dtype=float)
    star = None if theta_star is None else np.asarray(theta_star, dtype=float)
    z = np.zeros(d)
    trace = []
    for t in range(steps):
        i = states[t]
        j = states[t + 1]
        yi = rows[i]
        z = gl * z + yi
        delta = r[i] + gamma * float(rows[j] @ theta) - float(yi @ theta)
        theta = theta + (betas[t] * delta) * z
        if not math.isfinite(delta):
            raise NonFiniteUpdate(t, "temporal difference is not finite")
        if (t + 1) % record_every == 0 or t + 1 == steps:
            err = float(np.linalg.norm(theta - star)) if star is not None else float("nan")
            trace.append(TraceRecord(t + 1, {"state": i, "delta": delta, "theta_err_2": err}))
    if not np.all(np.isfinite(theta)):
        raise NonFiniteUpdate(steps, "parameter vector diverged")
    return TDFARun(theta, trace, z, int(seed))

"""Q-learning along one trajectory, and batch Q-learning with one simulation per action."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFiniteUpdate, NotIrreducibleError
from .markov import RowSampler, is_irreducible, make_rng
from .mdp import MarkovDecisionProcess, f_map
from .sa import ClockMode, StepSchedule, check_clock_schedule
from .traces import TraceRecord

Q_TRACE_COLUMNS = ("t", "err_inf", "residual_F")


@dataclass(frozen=True, eq=False)
class QLearnerState:
    """Q table plus per-cell update counters; ``t`` counts completed steps."""

    Q: np.ndarray
    counts: np.ndarray = None
    t: int = 0

    def __post_init__(self):
        q = np.array(self.Q, dtype=float)
        counts = np.zeros(q.shape, dtype=np.int64) if self.counts is None else np.array(self.counts, dtype=np.int64)
        if q.ndim != 2 or counts.shape != q.shape:
            raise DimensionMismatch("Q and counts must be matching n x m arrays")
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def zeros(cls, n, m):
        return cls(np.zeros((n, m)))


def q_update(state: QLearnerState, i, k, j, mdp: MarkovDecisionProcess, alpha) -> QLearnerState:
    """One Q-learning update of cell (i, k) after observing the transition i -> j under u_k."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    Q = state.Q.copy()
    target = mdp.R[i, k] + mdp.gamma * Q[j].max()
    Q[i, k] = Q[i, k] + alpha * (target - Q[i, k])
    if not math.isfinite(Q[i, k]):
        raise NonFiniteUpdate(state.t, f"Q({i}, {k}) is not finite")
    counts = state.counts.copy()
    counts[i, k] += 1
    return QLearnerState(Q, counts, state.t + 1)


class EpsilonGreedy:
    """Uniform random action with probability ``epsilon``, else greedy (lowest index on ties)."""

    def __init__(self, epsilon=1.0):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        self.epsilon = epsilon

    def __call__(self, q_row, rng):
        m = len(q_row)
        if self.epsilon >= 1.0 or rng.random() < self.epsilon:
            return int(rng.integers(m))
        return max(range(m), key=lambda k: (q_row[k], -k))


@dataclass
class QRun:
    state: QLearnerState
    trace: list = field(default_factory=list)
    seed: int = 0
    audit: dict = None

    @property
    def Q(self):
        return self.state.Q


def _trace_row(mdp, q_rows, q_star, t):
    Q = np.array(q_rows)
    err = float(np.max(np.abs(Q - q_star))) if q_star is not None else float("nan")
    res = float(np.max(np.abs(f_map(mdp, Q).Q - Q)))
    return TraceRecord(t, {"err_inf": err, "residual_F": res})


def run_q_learning(mdp: MarkovDecisionProcess, schedule: StepSchedule, clock, steps, seed,
                   behavior=None, start=0, q0=None, q_star=None, record_every=1) -> QRun:
    """Watkins Q-learning on a single trajectory.

    ``behavior(q_row, rng)`` picks the action at each step; the default explores
    uniformly.  Transitions and action choices use separate substreams of ``seed``.
    """
    clock = ClockMode(clock)
    check_clock_schedule(schedule, clock)
    if behavior is None:
        behavior = EpsilonGreedy(1.0)
    n, m = mdp.n, mdp.m
    samplers = [RowSampler(a) for a in mdp.actions]
    us = make_rng(seed, 0).random(steps).tolist()
    act_rng = make_rng(seed, 1)
    betas = schedule.values(steps)
    local = clock is ClockMode.LOCAL
    R = mdp.R.tolist()
    gamma = mdp.gamma
    Q = [[0.0] * m for _ in range(n)] if q0 is None else np.asarray(q0, dtype=float).tolist()
    counts = [[0] * m for _ in range(n)]
    qs = None if q_star is None else np.asarray(getattr(q_star, "Q", q_star))
    trace = []
    i = start
    for t in range(steps):
        k = behavior(Q[i], act_rng)
        j = samplers[k].draw(i, us[t])
        alpha = betas[counts[i][k]] if local else betas[t]
        counts[i][k] += 1
        row = Q[i]
        row[k] += alpha * (R[i][k] + gamma * max(Q[j]) - row[k])
        if not math.isfinite(row[k]):
            raise NonFiniteUpdate(t, f"Q({i}, {k}) is not finite")
        i = j
        if (t + 1) % record_every == 0 or t + 1 == steps:
            trace.append(_trace_row(mdp, Q, qs, t + 1))
    return QRun(QLearnerState(np.array(Q), np.array(counts), steps), trace, int(seed))


def run_batch_q_learning(mdp: MarkovDecisionProcess, schedule: StepSchedule, clock, steps,
                         seed, starts=None, q0=None, q_star=None, strict=True,
                         record_every=1, audit=False) -> QRun:
    """Batch Q-learning: simulation k always applies action u_k.

    Within a step the m updates are applied in ascending k, each seeing the
    table as left by the previous one.  Simulation k draws from substream
    ``(seed, k)``.  With ``audit=True`` every step is checked to write exactly
    the m cells ``(X^k_t, k)`` and to change no other cell.
    """
    clock = ClockMode(clock)
    check_clock_schedule(schedule, clock)
    n, m = mdp.n, mdp.m
    reducible = [k for k, a in enumerate(mdp.actions) if not is_irreducible(a)]
    if reducible and strict:
        raise NotIrreducibleError(f"action matrices {reducible} are not irreducible")
    samplers = [RowSampler(a) for a in mdp.actions]
    us = [make_rng(seed, k).random(steps).tolist() for k in range(m)]
    x = [0] * m if starts is None else [int(s) for s in starts]
    if len(x) != m:
        raise DimensionMismatch("need one start state per action")
    betas = schedule.values(steps)
    local = clock is ClockMode.LOCAL
    R = mdp.R.tolist()
    gamma = mdp.gamma
    Q = [[0.0] * m for _ in range(n)] if q0 is None else np.asarray(q0, dtype=float).tolist()
    counts = [[0] * m for _ in range(n)]
    qs = None if q_star is None else np.asarray(getattr(q_star, "Q", q_star))
    trace = []
    written_ok = True
    max_changed = 0
    for t in range(steps):
        if audit:
            before = [row[:] for row in Q]
            written = {(x[k], k) for k in range(m)}
        beta_t = betas[t]
        for k in range(m):
            i = x[k]
            j = samplers[k].draw(i, us[k][t])
            if local:
                alpha = betas[counts[i][k]]
            else:
                alpha = beta_t
            counts[i][k] += 1
            row = Q[i]
            row[k] += alpha * (R[i][k] + gamma * max(Q[j]) - row[k])
            if not math.isfinite(row[k]):
                raise NonFiniteUpdate(t, f"Q({i}, {k}) is not finite")
            x[k] = j
        if audit:
            changed = {(a, b) for a in range(n) for b in range(m) if Q[a][b] != before[a][b]}
            if len(written) != m or not changed <= written:
                written_ok = False
            max_changed = max(max_changed, len(changed))
        if (t + 1) % record_every == 0 or t + 1 == steps:
            trace.append(_trace_row(mdp, Q, qs, t + 1))
    info = None
    if audit:
        total = sum(map(sum, counts))
        info = {
            "writes_per_step": total / steps if steps else 0.0,
            "counter_total": total,
            "max_changed_cells": max_changed,
            "structure_ok": written_ok and total == m * steps,
        }
    return QRun(QLearnerState(np.array(Q), np.array(counts), steps), trace, int(seed), info)


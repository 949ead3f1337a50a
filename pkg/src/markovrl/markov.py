"""Stochastic matrices, irreducibility, stationary distributions and sample paths.

Sample paths are drawn by inverse-CDF lookup on uniforms from numpy's PCG64
generator (``numpy.random.default_rng(seed)``).  The generator identifier is
exported as :data:`PRNG_ALGORITHM` so that recorded runs can pin it.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    DimensionMismatch,
    NegativeEntryError,
    NotIrreducibleError,
    RowSumError,
)

ROW_SUM_TOL = 1e-12
_EPS = np.finfo(float).eps
STATIONARY_RESIDUAL_TOL = 1e-10
PRNG_ALGORITHM = f"numpy.random.PCG64 (numpy {np.__version__})"


def make_rng(seed, *stream):
    """Seeded PCG64 generator; extra integers select an independent substream."""
    return np.random.default_rng([int(seed), *map(int, stream)] if stream else int(seed))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Validated row-stochastic matrix.  Build it with :func:`validate_stochastic`."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, StochasticMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def to_dict(self):
        return {"n": self.n, "rows": self.entries.tolist()}

    @classmethod
    def from_dict(cls, obj):
        rows = obj["rows"]
        if "n" in obj and int(obj["n"]) != len(rows):
            raise DimensionMismatch(f"declared n={obj['n']} but {len(rows)} rows given")
        return validate_stochastic(rows)

    def to_json(self):
        return json.dumps(self.to_dict())


def validate_stochastic(entries) -> StochasticMatrix:
    """Check that ``entries`` is square, nonnegative and row-stochastic.

    Rows within ``1e-12`` of summing to one are renormalized and then nudged by
    single ulps until the floating-point row sum is exactly 1.0 (which almost
    always succeeds).  Validation is idempotent, so model files round-trip.
    """
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    neg = np.argwhere(a < 0)
    if neg.size:
        i, j = neg[0]
        raise NegativeEntryError(int(i), int(j), float(a[i, j]))
    sums = a.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        raise RowSumError(int(bad[0]), float(sums[bad[0]]))
    for i in np.flatnonzero(sums != 1.0):
        row = a[i] if abs(sums[i] - 1.0) <= 4 * _EPS else a[i] / sums[i]
        a[i] = _exact_row(row)
    return StochasticMatrix(_frozen(a))


def _exact_row(row):
    """Nudge entries one ulp at a time until the float sum is exactly 1.

    Deterministic in ``row``; returns ``row`` itself when no nudge succeeds.
    """
    out = row.copy()
    for k in np.argsort(-out, kind="stable"):
        if out[k] == 0.0:
            break
        for _ in range(8):
            total = out.sum()
            if total == 1.0:
                return out
            out[k] = np.nextafter(out[k], np.inf if total < 1.0 else 0.0)
            if out.sum() == 1.0:
                return out
            if (out.sum() < 1.0) != (total < 1.0):
                out[k] = np.nextafter(out[k], np.inf if total > 1.0 else 0.0)
                break
    return row


def is_irreducible(A: StochasticMatrix) -> bool:
    """True iff the digraph with edges ``{(i, j): a_ij > 0}`` is strongly connected."""
    a = np.asarray(A)
    if a.shape[0] == 1:
        return True
    ncomp, _ = connected_components(a > 0, directed=True, connection="strong")
    return ncomp == 1


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    mu: np.ndarray
    residual: float


def stationary_distribution(A: StochasticMatrix) -> StationaryDistribution:
    """Solve ``mu A = mu``, ``sum(mu) = 1`` directly for an irreducible chain."""
    if not is_irreducible(A):
        raise NotIrreducibleError("stationary distribution requested for a reducible chain")
    a = np.asarray(A)
    n = a.shape[0]
    # (A^T - I) mu = 0 has rank n-1; swap one row for the normalization.
    lhs = a.T - np.eye(n)
    lhs[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    mu = np.linalg.solve(lhs, rhs)
    mu = np.clip(mu, 0.0, None)
    mu /= mu.sum()
    residual = float(np.max(np.abs(mu @ a - mu)))
    if residual > STATIONARY_RESIDUAL_TOL:
        # one refinement sweep recovers the last digits on ill-conditioned chains
        mu = mu + np.linalg.solve(lhs, np.concatenate([(mu - mu @ a)[:-1], [1.0 - mu.sum()]]))
        mu /= mu.sum()
        residual = float(np.max(np.abs(mu @ a - mu)))
    return StationaryDistribution(_frozen(mu), residual)


def weighted_norm(v, mu) -> float:
    """``(sum_i mu_i v_i^2) ** 0.5``; ``mu`` may be an array or a StationaryDistribution."""
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    v = np.asarray(v, dtype=float)
    if v.shape != mu.shape:
        raise DimensionMismatch(f"vector shape {v.shape} vs weights shape {mu.shape}")
    return float(np.sqrt(np.dot(mu, v * v)))


class RowSampler:
    """Inverse-CDF next-state lookup for one stochastic matrix.

    Cumulative rows are padded with exact 1.0 from the last positive entry on,
    so a uniform in [0, 1) can never land on a zero-probability state.
    """

    def __init__(self, A: StochasticMatrix):
        a = np.asarray(A)
        self.cdf = []
        for row in a:
            c = np.cumsum(row)
            last = int(np.flatnonzero(row > 0)[-1])
            c[last:] = 1.0
            self.cdf.append(c.tolist())

    def draw(self, i, u):
        return bisect.bisect_right(self.cdf[i], u)


@dataclass(frozen=True, eq=False)
class SamplePath:
    seed: int
    states: np.ndarray

    @property
    def length(self) -> int:
        return len(self.states) - 1


def sample_path(A: StochasticMatrix, start: int, steps: int, seed: int) -> SamplePath:
    """Seeded trajectory of ``steps`` transitions starting from ``start``."""
    n = A.n
    if not 0 <= start < n:
        raise IndexError(f"start state {start} outside [0, {n})")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    sampler = RowSampler(A)
    draw = sampler.draw
    us = make_rng(seed).random(steps).tolist()
    states = [start]
    i = start
    for u in us:
        i = draw(i, u)
        states.append(i)
    out = np.array(states, dtype=np.int64)
    out.flags.writeable = False
    return SamplePath(int(seed), out)


def transition_counts(states, n):
    """Empirical transition count matrix of an index sequence."""
    states = np.asarray(states)
    counts = np.zeros((n, n))
    np.add.at(counts, (states[:-1], states[1:]), 1.0)
    return counts

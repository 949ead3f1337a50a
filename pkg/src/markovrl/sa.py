"""Stochastic approximation: step-size schedules, clocks, synchronous SA and BASA.

BASA (batch asynchronous SA) updates only the coordinates in an update set
``S(t)`` at each step, with a Hadamard-masked step::

    theta_{t+1} = theta_t + alpha_t * (g(theta_t) - theta_t + xi_{t+1})

where ``alpha_{t,i} = 0`` off ``S(t)``.  Under a global clock ``alpha_{t,i} =
beta_t``; under a local clock the k-th update of coordinate i uses
``beta_{k-1}``, so both clocks coincide when every coordinate is updated at
every step.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NonFiniteUpdate
from .markov import RowSampler, StochasticMatrix, make_rng
from .traces import TraceRecord

BASA_TRACE_COLUMNS = ("t", "coord_updated_count", "error_inf", "step_size_max")


class ClockMode(str, enum.Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class StepSchedule:
    """Deterministic step-size sequence ``beta_t``, t = 0, 1, ...

    Families:

    * ``power``: ``c / (t + 1) ** p``
    * ``constant-then-power``: ``c`` for ``t < t0``, then ``c / (t - t0 + 1) ** p``
    * ``constant``: ``c``
    * ``geometric``: ``c * q ** t``
    * ``table``: explicit values, finite length
    """

    rule: str = "power"
    c: float = 1.0
    p: float = 1.0
    t0: int = 0
    q: float = 0.5
    table: tuple = ()

    def __post_init__(self):
        if self.rule not in ("power", "constant-then-power", "constant", "geometric", "table"):
            raise ConfigError(f"unknown schedule rule {self.rule!r}")
        if self.rule == "table":
            if not self.table or any(not 0.0 < b <= 1.0 for b in self.table):
                raise ConfigError("table schedule needs values in (0, 1]")
            return
        if not 0.0 < self.c <= 1.0:
            raise ConfigError(f"schedule constant c must lie in (0, 1], got {self.c}")
        if self.rule in ("power", "constant-then-power") and not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"power exponent p must lie in [0, 1], got {self.p}")
        if self.rule == "geometric" and not 0.0 < self.q < 1.0:
            raise ConfigError(f"geometric ratio q must lie in (0, 1), got {self.q}")
        if self.t0 < 0:
            raise ConfigError("t0 must be nonnegative")

    def __call__(self, t: int) -> float:
        rule = self.rule
        if rule == "power":
            return self.c / (t + 1) ** self.p
        if rule == "constant-then-power":
            return self.c if t < self.t0 else self.c / (t - self.t0 + 1) ** self.p
        if rule == "constant":
            return self.c
        if rule == "geometric":
            return self.c * self.q ** t
        return self.table[t]

    def values(self, count: int) -> list:
        """``[beta_0, ..., beta_{count-1}]`` as Python floats."""
        if self.rule == "power":
            c, p = self.c, self.p
            return [c / (t + 1) ** p for t in range(count)]
        if self.rule == "table" and count > len(self.table):
            raise ConfigError(f"table schedule has only {len(self.table)} entries, {count} needed")
        return [self(t) for t in range(count)]

    @property
    def robbins_monro(self) -> bool:
        """Whether sum beta = inf and sum beta^2 < inf hold, decided by family."""
        if self.rule in ("power", "constant-then-power"):
            return 0.5 < self.p <= 1.0
        return False

    @property
    def nonincreasing(self) -> bool:
        if self.rule == "table":
            return all(a >= b for a, b in zip(self.table, self.table[1:]))
        return True

    def spec(self) -> str:
        """Inverse of :meth:`parse`."""
        if self.rule == "power":
            return f"power:c={self.c!r},p={self.p!r}"
        if self.rule == "constant-then-power":
            return f"constant-then-power:c={self.c!r},t0={self.t0},p={self.p!r}"
        if self.rule == "constant":
            return f"constant:c={self.c!r}"
        if self.rule == "geometric":
            return f"geometric:c={self.c!r},q={self.q!r}"
        return "table:" + ";".join(repr(b) for b in self.table)

    @classmethod
    def parse(cls, text: str) -> "StepSchedule":
        """Parse ``"power:c=1,p=0.8"``-style strings."""
        rule, _, params = text.strip().partition(":")
        if rule == "table":
            try:
                return cls("table", table=tuple(float(x) for x in params.split(";") if x))
            except ValueError as exc:
                raise ConfigError(f"bad table schedule {text!r}") from exc
        kw = {}
        for item in filter(None, params.split(",")):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or key not in ("c", "p", "t0", "q"):
                raise ConfigError(f"bad schedule parameter {item!r} in {text!r}")
            try:
                kw[key] = int(val) if key == "t0" else float(val)
            except ValueError as exc:
                raise ConfigError(f"bad schedule value {item!r}") from exc
        return cls(rule, **kw)


def power_schedule(p=1.0, c=1.0):
    return StepSchedule("power", c=c, p=p)


def check_clock_schedule(schedule: StepSchedule, clock) -> None:
    """Global clocks are only covered by the convergence results for nonincreasing steps."""
    if ClockMode(clock) is ClockMode.GLOBAL and not schedule.nonincreasing:
        raise ConfigError("a global clock requires a nonincreasing step-size schedule")


@dataclass(frozen=True, eq=False)
class SAEstimate:
    """Estimate after ``t`` completed steps; ``nu[i]`` counts updates applied to coordinate i."""

    theta: np.ndarray
    t: int = 0
    nu: np.ndarray = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        nu = np.zeros(theta.shape, dtype=np.int64) if self.nu is None else np.array(self.nu, dtype=np.int64)
        if nu.shape != theta.shape or theta.ndim != 1:
            raise ValueError("theta and nu must be 1-d arrays of the same length")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nu", nu)

    @property
    def d(self) -> int:
        return self.theta.shape[0]


def as_mask(update_set, d) -> np.ndarray:
    """Boolean mask of length ``d`` from a mask or an iterable of coordinate indices."""
    arr = np.asarray(update_set if not isinstance(update_set, (set, frozenset)) else sorted(update_set))
    if arr.dtype == bool:
        if arr.shape != (d,):
            raise ValueError(f"mask has shape {arr.shape}, expected ({d},)")
        return arr
    mask = np.zeros(d, dtype=bool)
    if arr.size:
        idx = arr.astype(np.int64).ravel()
        if idx.min() < 0 or idx.max() >= d:
            raise IndexError("update set refers to a coordinate outside [0, d)")
        mask[idx] = True
    return mask


def step_size(schedule: StepSchedule, clock, estimate: SAEstimate, update_set) -> np.ndarray:
    """Per-coordinate step sizes for the step taken from ``estimate``."""
    mask = as_mask(update_set, estimate.d)
    alpha = np.zeros(estimate.d)
    if ClockMode(clock) is ClockMode.GLOBAL:
        alpha[mask] = schedule(estimate.t)
    else:
        for i in np.flatnonzero(mask):
            alpha[i] = schedule(int(estimate.nu[i]))
    return alpha


def _check_finite(y, t):
    if not np.all(np.isfinite(y)):
        raise NonFiniteUpdate(t, "oracle returned NaN or infinity")


def sa_step_synchronous(estimate: SAEstimate, oracle_value, beta_t: float) -> SAEstimate:
    """``theta <- theta + beta_t * y``, every coordinate updated."""
    y = np.asarray(oracle_value, dtype=float)
    _check_finite(y, estimate.t)
    return SAEstimate(estimate.theta + beta_t * y, estimate.t + 1, estimate.nu + 1)


def basa_step(estimate: SAEstimate, oracle_value, update_set, schedule: StepSchedule,
              clock) -> SAEstimate:
    """Masked update; coordinates outside the update set are copied unchanged."""
    y = np.asarray(oracle_value, dtype=float)
    _check_finite(y, estimate.t)
    mask = as_mask(update_set, estimate.d)
    alpha = step_size(schedule, clock, estimate, mask)
    theta = estimate.theta.copy()
    theta[mask] = theta[mask] + alpha[mask] * y[mask]
    return SAEstimate(theta, estimate.t + 1, estimate.nu + mask)


# -- noise ------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """Synthetic measurement noise with declared conditional bounds.

    ``bias`` is the Euclidean norm of the conditional mean and ``sigma**2`` the
    conditional variance (trace of the covariance).  For ``state-scaled`` noise
    both are inflated by the running sup ``h = max_{tau<=t} ||theta_tau||_inf``:
    mean norm ``bias * (1 + h)``, variance ``sigma**2 * (1 + h**2)``.
    The fluctuation is uniform, hence bounded.
    """

    kind: str = "zero"
    sigma: float = 0.0
    bias: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "iid-bounded", "state-scaled"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0 or self.bias < 0:
            raise ConfigError("noise parameters must be nonnegative")

    def declared_bounds(self, history_sup=0.0):
        """``(mean_norm_bound, variance_bound)`` given ``||theta_0^t||_inf``."""
        if self.kind == "zero":
            return 0.0, 0.0
        if self.kind == "iid-bounded":
            return self.bias, self.sigma ** 2
        h = history_sup
        return self.bias * (1.0 + h), self.sigma ** 2 * (1.0 + h * h)

    def draw(self, rng, d, history_sup=0.0) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(d)
        mean_scale, var_scale = 1.0, 1.0
        if self.kind == "state-scaled":
            mean_scale = 1.0 + history_sup
            var_scale = math.sqrt(1.0 + history_sup * history_sup)
        # uniform on [-w, w] has variance w^2/3; split sigma^2 evenly over d coords
        w = self.sigma * math.sqrt(3.0 / d)
        return (self.bias / math.sqrt(d)) * mean_scale + var_scale * rng.uniform(-w, w, size=d)


# -- update processes -------------------------------------------------------


class FullUpdate:
    """S(t) = every coordinate (synchronous SA)."""

    def __init__(self, d):
        self.d = d

    def __call__(self, t, rng):
        return np.ones(self.d, dtype=bool)


class RoundRobin:
    """S(t) = {t mod d}."""

    def __init__(self, d):
        self.d = d

    def __call__(self, t, rng):
        mask = np.zeros(self.d, dtype=bool)
        mask[t % self.d] = True
        return mask


class BernoulliUpdate:
    """Each coordinate joins S(t) independently with probability ``prob``."""

    def __init__(self, d, prob):
        self.d, self.prob = d, prob

    def __call__(self, t, rng):
        return rng.random(self.d) < self.prob


class MarkovUpdate:
    """S(t) = {N_t} for a Markov chain N on the coordinates."""

    def __init__(self, A: StochasticMatrix, start=0):
        self.sampler = RowSampler(A)
        self.d = A.n
        self.state = start
        self._t = 0

    def __call__(self, t, rng):
        if t != self._t:
            raise RuntimeError("MarkovUpdate must be queried at consecutive times")
        mask = np.zeros(self.d, dtype=bool)
        mask[self.state] = True
        self.state = self.sampler.draw(self.state, rng.random())
        self._t += 1
        return mask


def probe_contraction(g, d, rng, samples=200, scale=10.0) -> float:
    """Largest observed ``||g(a) - g(b)||_inf / ||a - b||_inf`` over random pairs.

    Only a spot check: a value below one does not prove the contraction property.
    """
    worst = 0.0
    for _ in range(samples):
        a = rng.uniform(-scale, scale, d)
        b = rng.uniform(-scale, scale, d)
        den = np.max(np.abs(a - b))
        if den > 0:
            worst = max(worst, float(np.max(np.abs(g(a) - g(b))) / den))
    return worst


@dataclass
class BasaRun:
    estimate: SAEstimate
    trace: list = field(default_factory=list)
    alpha_sums: np.ndarray = None
    seed: int = 0

    def summary(self):
        err = self.trace[-1].metrics["error_inf"] if self.trace else float("nan")
        return {"steps": self.estimate.t, "final_error": err, "seed": self.seed}


def run_basa(g, d, schedule: StepSchedule, clock, update_process, steps, seed,
             noise: NoiseModel = NoiseModel(), theta0=None, theta_star=None,
             record_every=1, probe=False) -> BasaRun:
    """BASA loop for the fixed point of ``g``, which the caller declares an sup-norm contraction.

    The update process is called as ``update_process(t, rng)`` and returns S(t).
    Update-set draws and noise use independent substreams of ``seed``.
    """
    clock = ClockMode(clock)
    check_clock_schedule(schedule, clock)
    if probe:
        ratio = probe_contraction(g, d, make_rng(seed, 2))
        if ratio >= 1.0:
            warnings.warn(f"g does not look like a contraction (observed ratio {ratio:.3f})")
    upd_rng = make_rng(seed, 0)
    noise_rng = make_rng(seed, 1)
    est = SAEstimate(np.zeros(d) if theta0 is None else theta0)
    star = None if theta_star is None else np.asarray(theta_star, dtype=float)
    history_sup = float(np.max(np.abs(est.theta)))
    alpha_sums = np.zeros(d)
    trace = []
    for t in range(steps):
        mask = as_mask(update_process(t, upd_rng), d)
        alpha = step_size(schedule, clock, est, mask)
        y = g(est.theta) - est.theta + noise.draw(noise_rng, d, history_sup)
        if not np.all(np.isfinite(y)):
            raise NonFiniteUpdate(t, "oracle returned NaN or infinity")
        theta = est.theta.copy()
        theta[mask] = theta[mask] + alpha[mask] * y[mask]
        est = replace(est, theta=theta, t=t + 1, nu=est.nu + mask)
        alpha_sums += alpha
        history_sup = max(history_sup, float(np.max(np.abs(theta))))
        if (t + 1) % record_every == 0 or t + 1 == steps:
            err = float(np.max(np.abs(theta - star))) if star is not None else float("nan")
            trace.append(TraceRecord(t + 1, {
                "coord_updated_count": int(mask.sum()),
                "error_inf": err,
                "step_size_max": float(alpha.max()),
            }))
    return BasaRun(est, trace, alpha_sums, int(seed))

"""Command-line front end: ``markovrl <subcommand> --model PATH | --fixture NAME ...``.

Every subcommand writes ``summary.json`` to ``--out``; learners also write
``trace.csv``.  Exit codes: 0 success, 2 configuration error, 3 model error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    DimensionMismatch,
    MaxItersExceeded,
    ModelParseError,
    NegativeEntryError,
    NonFiniteUpdate,
    NotIrreducibleError,
    RankDeficientBasis,
    RowSumError,
    UnknownFixture,
)
from .markov import PRNG_ALGORITHM
from .mdp import MarkovDecisionProcess, greedy_policy, solve_optimal_q, solve_optimal_value
from .models import load_basis, load_fixture, load_model, model_hash
from .mrp import MarkovRewardProcess, value_direct, value_iterate
from .qlearning import Q_TRACE_COLUMNS, EpsilonGreedy, run_batch_q_learning, run_q_learning
from .sa import (
    BASA_TRACE_COLUMNS,
    BernoulliUpdate,
    ClockMode,
    FullUpdate,
    MarkovUpdate,
    NoiseModel,
    RoundRobin,
    StepSchedule,
    run_basa,
)
from .td import (
    FA_TRACE_COLUMNS,
    TABULAR_TRACE_COLUMNS,
    td_fa_fixed_point,
    td_lambda_fa,
    td_lambda_tabular,
)
from .traces import write_json, write_trace_csv

ALGORITHMS = ("solve-mrp", "solve-mdp", "td", "td-fa", "qlearn", "batch-qlearn", "basa-demo")
EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_NUMERIC = 0, 2, 3, 4


@dataclass
class ExperimentConfig:
    algorithm: str
    out: str
    model: str = None
    fixture: str = None
    basis: str = None
    schedule: StepSchedule = field(default_factory=lambda: StepSchedule("power", c=1.0, p=0.8))
    clock: ClockMode = ClockMode.LOCAL
    lam: float = 0.0
    gamma: float = None
    steps: int = 10_000
    seed: int = 0
    start: int = 0
    strict: bool = False
    record_every: int = 1
    epsilon: float = 1.0
    tol: float = 1e-8
    noise_sigma: float = 0.0
    update: str = "round-robin"
    dim: int = 4

    def validate(self):
        """Range checks and file existence, before any computation."""
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm != "basa-demo" and (self.model is None) == (self.fixture is None):
            raise ConfigError("give exactly one of --model and --fixture")
        for path in (self.model, self.basis):
            if path is not None and not os.path.isfile(path):
                raise ConfigError(f"no such file: {path}")
        if self.algorithm == "td-fa" and self.basis is None:
            raise ConfigError("td-fa needs --basis")
        if self.steps < 0 or self.record_every < 1 or self.seed < 0:
            raise ConfigError("steps and seed must be nonnegative, record-every positive")
        if not 0.0 <= self.lam < 1.0:
            raise ConfigError(f"lambda must lie in [0, 1), got {self.lam}")
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.update not in ("full", "round-robin", "markov", "bernoulli"):
            raise ConfigError(f"unknown update process {self.update!r}")
        if self.dim < 1 or self.noise_sigma < 0:
            raise ConfigError("dim must be positive and noise-sigma nonnegative")
        if ClockMode(self.clock) is ClockMode.GLOBAL and not self.schedule.nonincreasing:
            raise ConfigError("a global clock requires a nonincreasing schedule")


def build_parser():
    p = argparse.ArgumentParser(prog="markovrl", description=__doc__.splitlines()[0])
    p.add_argument("algorithm", choices=ALGORITHMS)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", help="JSON model file")
    src.add_argument("--fixture", help="built-in fixture, e.g. snakes-ladders-terminal")
    p.add_argument("--basis", help="JSON basis matrix file (td-fa)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--schedule", default="power:c=1,p=0.8")
    p.add_argument("--clock", choices=[c.value for c in ClockMode], default="local")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--gamma", type=float, help="override the model's discount factor")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--strict", action="store_true", help="fail on reducible sample chains")
    p.add_argument("--start", type=int, default=0, help="initial state")
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=1.0, help="exploration rate (qlearn)")
    p.add_argument("--tol", type=float, default=1e-8, help="solver tolerance")
    p.add_argument("--noise-sigma", type=float, default=0.0, help="basa-demo noise level")
    p.add_argument("--update", default="round-robin", help="basa-demo update process")
    p.add_argument("--dim", type=int, default=4, help="basa-demo dimension")
    return p


def config_from_args(args) -> ExperimentConfig:
    return ExperimentConfig(
        algorithm=args.algorithm, out=args.out, model=args.model, fixture=args.fixture,
        basis=args.basis, schedule=StepSchedule.parse(args.schedule),
        clock=ClockMode(args.clock), lam=args.lam, gamma=args.gamma, steps=args.steps,
        seed=args.seed, start=args.start, strict=args.strict,
        record_every=args.record_every, epsilon=args.epsilon, tol=args.tol,
        noise_sigma=args.noise_sigma, update=args.update, dim=args.dim,
    )


def software_version():
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
            cwd=os.path.dirname(os.path.abspath(__file__)), timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{__version__}+{desc}" if desc else __version__


def _load(config):
    model = load_model(config.model) if config.model else load_fixture(config.fixture)
    if config.gamma is not None:
        if isinstance(model, MarkovRewardProcess):
            model = MarkovRewardProcess(model.A, model.r, config.gamma)
        elif isinstance(model, MarkovDecisionProcess):
            model = MarkovDecisionProcess(model.actions, model.R, config.gamma)
    return model


def _expect(model, cls, algorithm):
    if not isinstance(model, cls):
        raise ModelParseError(f"{algorithm} needs a {cls.__name__}, got {type(model).__name__}")
    return model


def _floats(a):
    return np.asarray(a, dtype=float).tolist()


def _execute(config: ExperimentConfig):
    """Run the configured experiment; returns (summary-final dict, model or None)."""
    alg = config.algorithm
    out = config.out
    if alg == "basa-demo":
        d = config.dim
        b = np.arange(1.0, d + 1.0)
        theta_star = 2.0 * b
        process = {
            "full": lambda: FullUpdate(d),
            "round-robin": lambda: RoundRobin(d),
            "bernoulli": lambda: BernoulliUpdate(d, 0.5),
            "markov": lambda: MarkovUpdate(load_fixture("random-irreducible-chain", n=d, seed=config.seed).A, config.start),
        }[config.update]()
        noise = NoiseModel("iid-bounded", sigma=config.noise_sigma) if config.noise_sigma > 0 else NoiseModel()
        run = run_basa(lambda th: 0.5 * th + b, d, config.schedule, config.clock, process,
                       config.steps, config.seed, noise=noise, theta_star=theta_star,
                       record_every=config.record_every)
        write_trace_csv(os.path.join(out, "trace.csv"), run.trace, BASA_TRACE_COLUMNS)
        final = run.summary()
        final["theta"] = _floats(run.estimate.theta)
        return final, None

    model = _load(config)
    if alg == "solve-mrp":
        mrp = _expect(model, MarkovRewardProcess, alg)
        direct = value_direct(mrp)
        it = value_iterate(mrp, tol=config.tol)
        write_json(os.path.join(out, "value.json"), {"v": _floats(direct.v)})
        final = {
            "v": _floats(direct.v), "residual": direct.residual,
            "iterate_v": _floats(it.v), "iterate_iterations": it.iterations,
            "iterate_gap_inf": float(np.max(np.abs(it.v - direct.v))),
        }
    elif alg == "solve-mdp":
        mdp = _expect(model, MarkovDecisionProcess, alg)
        vstar = solve_optimal_value(mdp, tol=config.tol)
        qstar = solve_optimal_q(mdp, tol=config.tol)
        pi = greedy_policy(qstar)
        write_json(os.path.join(out, "value.json"), {"v": _floats(vstar.v)})
        write_json(os.path.join(out, "q.json"), _floats(qstar.Q))
        final = {
            "v_star": _floats(vstar.v), "q_star": _floats(qstar.Q),
            "policy": [int(k) for k in pi.mapping], "residual_B": vstar.residual,
            "residual_F": qstar.residual,
        }
    elif alg == "td":
        mrp = _expect(model, MarkovRewardProcess, alg)
        vs = value_direct(mrp).v
        run = td_lambda_tabular(mrp, config.lam, config.schedule, config.clock, config.steps,
                                config.seed, start=config.start, v_star=vs,
                                strict=config.strict, record_every=config.record_every)
        write_trace_csv(os.path.join(out, "trace.csv"), run.trace, TABULAR_TRACE_COLUMNS)
        write_json(os.path.join(out, "value.json"), {"v": _floats(run.v_hat)})
        final = {"v_hat": _floats(run.v_hat), "v_star": _floats(vs),
                 "err_inf": float(np.max(np.abs(run.v_hat - vs))),
                 "irreducible": run.irreducible}
    elif alg == "td-fa":
        mrp = _expect(model, MarkovRewardProcess, alg)
        psi = load_basis(config.basis)
        fp = td_fa_fixed_point(mrp, psi, config.lam)
        run = td_lambda_fa(mrp, psi, config.lam, config.schedule, config.steps, config.seed,
                           start=config.start, theta_star=fp.theta, strict=config.strict,
                           record_every=config.record_every)
        write_trace_csv(os.path.join(out, "trace.csv"), run.trace, FA_TRACE_COLUMNS)
        write_json(os.path.join(out, "theta.json"), {"theta": _floats(run.theta)})
        final = {"theta": _floats(run.theta), "theta_star": _floats(fp.theta),
                 "theta_err_2": float(np.linalg.norm(run.theta - fp.theta))}
    else:
        mdp = _expect(model, MarkovDecisionProcess, alg)
        qs = solve_optimal_q(mdp, tol=1e-12).Q
        if alg == "qlearn":
            run = run_q_learning(mdp, config.schedule, config.clock, config.steps, config.seed,
                                 behavior=EpsilonGreedy(config.epsilon), start=config.start,
                                 q_star=qs, record_every=config.record_every)
        else:
            run = run_batch_q_learning(mdp, config.schedule, config.clock, config.steps,
                                       config.seed, q_star=qs, strict=config.strict,
                                       record_every=config.record_every)
        write_trace_csv(os.path.join(out, "trace.csv"), run.trace, Q_TRACE_COLUMNS)
        write_json(os.path.join(out, "q.json"), _floats(run.Q))
        last = run.trace[-1].metrics if run.trace else {}
        final = {"q": _floats(run.Q), "q_star": _floats(qs),
                 "err_inf": last.get("err_inf"), "residual_F": last.get("residual_F")}
    return final, model


def run_experiment(config: ExperimentConfig) -> int:
    """Validate, run and write artifacts; returns the process exit status."""
    try:
        config.validate()
        os.makedirs(config.out, exist_ok=True)
        final, model = _execute(config)
    except (ConfigError, UnknownFixture) as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except (ModelParseError, DimensionMismatch, RowSumError, NegativeEntryError,
            NotIrreducibleError, RankDeficientBasis) as exc:
        return _fail(EXIT_MODEL, "model", exc)
    except (NonFiniteUpdate, MaxItersExceeded, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, "numerical", exc)
    except ValueError as exc:
        return _fail(EXIT_MODEL, "model", exc)
    summary = {
        "algorithm": config.algorithm,
        "model": config.model or config.fixture,
        "model_hash": model_hash(model) if model is not None else None,
        "seed": config.seed,
        "steps": config.steps,
        "schedule": config.schedule.spec(),
        "clock": ClockMode(config.clock).value,
        "lambda": config.lam,
        "gamma": getattr(model, "gamma", None),
        "final": final,
        "version": software_version(),
        "prng": PRNG_ALGORITHM,
    }
    write_json(os.path.join(config.out, "summary.json"), summary)
    return EXIT_OK


def _fail(code, kind, exc):
    print(f"markovrl: {kind} error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        config = config_from_args(args)
    except (ConfigError, ValueError) as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    return run_experiment(config)


if __name__ == "__main__":
    sys.exit(main())

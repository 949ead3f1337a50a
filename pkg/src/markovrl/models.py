"""JSON model files and the built-in fixture corpus.

File layouts::

    matrix: {"n": int, "rows": [[...], ...]}
    MRP:    {"gamma": float, "matrix": <matrix>, "reward": [...]}
            or with "next_state_reward" instead of "reward"
    MDP:    {"gamma": float, "actions": [<matrix>, ...], "reward": [[R(x_i, u_k)]]}
    basis:  {"n": int, "d": int, "rows": [[...], ...]}

Decimal numbers are parsed by Python's float(), which rounds to nearest-even.
"""

from __future__ import annotations

import hashlib
import json
import re

import numpy as np

from .errors import DimensionMismatch, ModelParseError, UnknownFixture
from .markov import StochasticMatrix, make_rng, validate_stochastic
from .mdp import MarkovDecisionProcess
from .mrp import MarkovRewardProcess, reward_from_next_state

SNAKES_LABELS = ("S", "1", "4", "5", "6", "7", "8", "W", "L")

SNAKES_ROWS = [
    [0, 0.25, 0.25, 0.25, 0, 0.25, 0, 0, 0],
    [0, 0, 0.25, 0.50, 0, 0.25, 0, 0, 0],
    [0, 0, 0, 0.25, 0.25, 0.25, 0.25, 0, 0],
    [0, 0.25, 0, 0, 0.25, 0.25, 0.25, 0, 0],
    [0, 0.25, 0, 0, 0, 0.25, 0.25, 0.25, 0],
    [0, 0.25, 0, 0, 0, 0, 0.25, 0.25, 0.25],
    [0, 0.25, 0, 0, 0, 0, 0.25, 0.25, 0.25],
    [0, 0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1],
]

# payoff f(X_{t+1}) collected on landing: win +5, lose -2
SNAKES_LANDING_REWARD = [0, 0, 0, 0, 0, 0, 0, 5, -2]
SNAKES_GAMMA = 0.9


def snakes_state(label):
    return SNAKES_LABELS.index(str(label))


# -- (de)serialization --------------------------------------------------------


def _matrix(obj, where):
    try:
        return StochasticMatrix.from_dict(obj)
    except (KeyError, TypeError) as exc:
        raise ModelParseError(f"{where}: malformed matrix object ({exc})") from exc


def mrp_to_dict(mrp: MarkovRewardProcess):
    return {"gamma": mrp.gamma, "matrix": mrp.A.to_dict(), "reward": mrp.r.tolist()}


def mrp_from_dict(obj) -> MarkovRewardProcess:
    if "matrix" not in obj or "gamma" not in obj:
        raise ModelParseError("MRP needs 'gamma' and 'matrix'")
    has_r, has_f = "reward" in obj, "next_state_reward" in obj
    if has_r == has_f:
        raise ModelParseError("MRP needs exactly one of 'reward' and 'next_state_reward'")
    A = _matrix(obj["matrix"], "matrix")
    r = obj["reward"] if has_r else reward_from_next_state(A, obj["next_state_reward"])
    return MarkovRewardProcess(A, r, float(obj["gamma"]))


def mdp_to_dict(mdp: MarkovDecisionProcess):
    return {
        "gamma": mdp.gamma,
        "actions": [a.to_dict() for a in mdp.actions],
        "reward": mdp.R.tolist(),
    }


def mdp_from_dict(obj) -> MarkovDecisionProcess:
    try:
        acts = [_matrix(a, f"actions[{k}]") for k, a in enumerate(obj["actions"])]
        return MarkovDecisionProcess(tuple(acts), obj["reward"], float(obj["gamma"]))
    except KeyError as exc:
        raise ModelParseError(f"MDP is missing key {exc}") from exc


def basis_to_dict(psi):
    psi = np.asarray(psi, dtype=float)
    return {"n": psi.shape[0], "d": psi.shape[1], "rows": psi.tolist()}


def basis_from_dict(obj) -> np.ndarray:
    try:
        psi = np.array(obj["rows"], dtype=float)
    except (KeyError, ValueError) as exc:
        raise ModelParseError(f"malformed basis object ({exc})") from exc
    if psi.ndim != 2 or psi.shape != (obj.get("n", psi.shape[0]), obj.get("d", psi.shape[-1])):
        raise DimensionMismatch(f"basis rows do not match declared n/d: {psi.shape}")
    return psi


def model_to_dict(model):
    if isinstance(model, MarkovRewardProcess):
        return mrp_to_dict(model)
    if isinstance(model, MarkovDecisionProcess):
        return mdp_to_dict(model)
    if isinstance(model, StochasticMatrix):
        return model.to_dict()
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(obj):
    """Dispatch on keys: 'actions' -> MDP, 'matrix' -> MRP, 'rows' -> matrix."""
    if not isinstance(obj, dict):
        raise ModelParseError("model file must hold a JSON object")
    if "actions" in obj:
        return mdp_from_dict(obj)
    if "matrix" in obj:
        return mrp_from_dict(obj)
    if "rows" in obj:
        return _matrix(obj, "matrix")
    raise ModelParseError("unrecognized model object")


def load_model(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"{path}: {exc}") from exc
    return model_from_dict(obj)


def save_model(path, model):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_basis(path):
    try:
        with open(path) as fh:
            return basis_from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"{path}: {exc}") from exc


def model_hash(model) -> str:
    """sha256 of the canonical JSON form (sorted keys, no whitespace)."""
    text = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# -- fixtures -----------------------------------------------------------------


def snakes_ladders(gamma=SNAKES_GAMMA) -> MarkovRewardProcess:
    """Toy board game with landing rewards folded into r; absorbing W/L keep paying every step."""
    A = validate_stochastic(SNAKES_ROWS)
    return MarkovRewardProcess(A, reward_from_next_state(A, SNAKES_LANDING_REWARD), gamma)


def snakes_ladders_terminal(gamma=SNAKES_GAMMA) -> MarkovRewardProcess:
    """Same board, but the absorbing W and L pay nothing once reached."""
    A = validate_stochastic(SNAKES_ROWS)
    r = reward_from_next_state(A, SNAKES_LANDING_REWARD)
    r[[snakes_state("W"), snakes_state("L")]] = 0.0
    return MarkovRewardProcess(A, r, gamma)


def two_state_mdp() -> MarkovDecisionProcess:
    """u1 stays put, u2 swaps; only (x1, u1) pays 1; gamma = 0.5.  V* = (2, 1)."""
    return MarkovDecisionProcess(
        (np.eye(2), [[0.0, 1.0], [1.0, 0.0]]),
        [[1.0, 0.0], [0.0, 0.0]],
        0.5,
    )


def batch_q_irreducible() -> MarkovDecisionProcess:
    """Two-state MDP whose action matrices are both irreducible."""
    return MarkovDecisionProcess(
        ([[0.1, 0.9], [0.9, 0.1]], [[0.5, 0.5], [0.5, 0.5]]),
        [[1.0, 0.0], [0.0, 0.0]],
        0.5,
    )


def random_stochastic(rng, n, density=1.0) -> np.ndarray:
    """Random row-stochastic matrix; entries zeroed with probability 1 - density."""
    a = rng.random((n, n)) * (rng.random((n, n)) < density)
    for i in np.flatnonzero(a.sum(axis=1) == 0):
        a[i, rng.integers(n)] = 1.0
    return a / a.sum(axis=1, keepdims=True)


def random_irreducible_chain(n, seed, gamma=0.9) -> MarkovRewardProcess:
    """Random MRP whose chain is irreducible: a random cycle plus sparse random mass."""
    rng = make_rng(seed)
    perm = rng.permutation(n)
    a = random_stochastic(rng, n, density=0.5) * 0.7
    for idx in range(n):
        a[perm[idx], perm[(idx + 1) % n]] += 0.3
    a /= a.sum(axis=1, keepdims=True)
    r = rng.uniform(-1.0, 1.0, n)
    return MarkovRewardProcess(validate_stochastic(a), r, gamma)


_FIXTURES = {
    "snakes-ladders": snakes_ladders,
    "snakes-ladders-terminal": snakes_ladders_terminal,
    "two-state-mdp": two_state_mdp,
    "batch-q-irreducible": batch_q_irreducible,
    "random-irreducible-chain": random_irreducible_chain,
}

FIXTURE_NAMES = tuple(_FIXTURES)


def load_fixture(name, **params):
    """Build a fixture by name.

    Parameters may also be embedded in the name, as in
    ``"random-irreducible-chain(n=5, seed=3)"`` or ``"random-irreducible-chain:n=5,seed=3"``.
    """
    m = re.fullmatch(r"\s*([\w-]+)\s*(?:[:(](.*?)\)?)?\s*", name)
    if not m or m.group(1) not in _FIXTURES:
        raise UnknownFixture(name)
    base, args = m.group(1), m.group(2)
    for item in filter(None, (s.strip() for s in (args or "").split(","))):
        key, _, val = item.partition("=")
        try:
            params.setdefault(key.strip(), int(val) if re.fullmatch(r"-?\d+", val.strip()) else float(val))
        except ValueError as exc:
            raise UnknownFixture(f"{name}: bad parameter {item!r}") from exc
    if base == "random-irreducible-chain" and not {"n", "seed"} <= params.keys():
        raise UnknownFixture(f"{name}: random-irreducible-chain needs n and seed")
    try:
        return _FIXTURES[base](**params)
    except TypeError as exc:
        raise UnknownFixture(f"{name}: {exc}") from exc

import numpy as np
import pytest

from markovrl.mdp import MarkovDecisionProcess
from markovrl.models import random_stochastic


def transitive_closure_irreducible(a):
    """Brute-force reachability (Warshall) on the positive-support digraph."""
    n = a.shape[0]
    reach = (a > 0) | np.eye(n, dtype=bool)
    for k in range(n):
        reach = reach | (reach[:, [k]] & reach[[k], :])
    return bool(reach.all())


def random_mdp(rng, n, m, gamma, density=1.0):
    acts = tuple(random_stochastic(rng, n, density) for _ in range(m))
    return MarkovDecisionProcess(acts, rng.uniform(-1, 1, (n, m)), gamma)


def mdp_corpus(count=100, seed=2024):
    """Desk-scale corpus: n <= 4, m <= 3, gamma in {0.5, 0.9}."""
    rng = np.random.default_rng(seed)
    out = []
    for idx in range(count):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 4))
        gamma = (0.5, 0.9)[idx % 2]
        out.append(random_mdp(rng, n, m, gamma, density=rng.choice([0.5, 1.0])))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""
Chains, stationary distributions and the snakes-and-ladders board
==================================================================

Validate a transition matrix, check irreducibility, compute the stationary
distribution and draw a reproducible sample path.
"""

import numpy as np

from markovrl import is_irreducible, sample_path, stationary_distribution, validate_stochastic
from markovrl.markov import transition_counts
from markovrl.models import SNAKES_LABELS, SNAKES_ROWS

# %%
# A two-state chain.  Its stationary distribution is (5/6, 1/6).
A = validate_stochastic([[0.9, 0.1], [0.5, 0.5]])
print("irreducible:", is_irreducible(A))
print("mu:", stationary_distribution(A).mu)

# %%
# The board game has two absorbing squares, W and L, so it is reducible.
board = validate_stochastic(SNAKES_ROWS)
print("board irreducible:", is_irreducible(board))

path = sample_path(board, 0, 20, seed=1)
print("one game:", " -> ".join(SNAKES_LABELS[s] for s in path.states))

# %%
# Empirical transition frequencies approach the matrix entries.
chain = validate_stochastic([[0.2, 0.8, 0.0], [0.0, 0.3, 0.7], [0.6, 0.0, 0.4]])
states = sample_path(chain, 0, 100_000, seed=5).states
counts = transition_counts(states, 3)
print(np.round(counts / counts.sum(axis=1, keepdims=True), 3))

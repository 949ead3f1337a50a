"""
Exact values, value iteration and optimal policies
==================================================

Solve a reward process two ways, then find V*, Q* and a greedy policy for a
small decision process.
"""

import numpy as np

from markovrl import (
    greedy_policy,
    induced_mrp,
    solve_optimal_q,
    solve_optimal_value,
    value_direct,
    value_iterate,
)
from markovrl.mdp import brute_force_optimal_value
from markovrl.models import SNAKES_LABELS, snakes_ladders_terminal, two_state_mdp

# %%
# Snakes and ladders with landing rewards +5 (win) and -2 (lose).
# Folding the landing reward into the square you jump from gives r = A f.
mrp = snakes_ladders_terminal()
direct = value_direct(mrp)
iterated = value_iterate(mrp, tol=1e-10)
for label, v in zip(SNAKES_LABELS, direct.v):
    print(f"{label:>2}  {v: .4f}")
print("iterations:", iterated.iterations, " gap:", np.max(np.abs(iterated.v - direct.v)))

# %%
# Action 0 stays, action 1 swaps; only staying in state 0 pays.
mdp = two_state_mdp()
v = solve_optimal_value(mdp, tol=1e-12)
q = solve_optimal_q(mdp, tol=1e-12)
pi = greedy_policy(q)
print("V* =", v.v, " brute force:", brute_force_optimal_value(mdp))
print("Q* =\n", q.Q)
print("greedy policy:", pi.mapping, " its value:", value_direct(induced_mrp(mdp, pi)).v)

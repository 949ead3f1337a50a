"""
Q-learning and batch Q-learning
===============================

Classic Q-learning on one trajectory, then the batch variant in which one
simulation per action runs in parallel.
"""

import numpy as np

from markovrl import run_batch_q_learning, run_q_learning, solve_optimal_q
from markovrl.models import batch_q_irreducible, two_state_mdp
from markovrl.sa import StepSchedule, power_schedule

mdp = two_state_mdp()
q_star = solve_optimal_q(mdp, tol=1e-12).Q
run = run_q_learning(mdp, power_schedule(0.8), "local", 100_000, seed=1)
print("Q-learning error:", np.max(np.abs(run.Q - q_star)))

# A summable schedule stops learning early.
frozen = run_q_learning(mdp, StepSchedule("geometric", c=1.0, q=0.5), "global", 100_000, seed=1)
print("geometric steps, error:", np.max(np.abs(frozen.Q - q_star)))

# %%
# Batch Q-learning needs each action's chain to be irreducible.
mdp = batch_q_irreducible()
q_star = solve_optimal_q(mdp, tol=1e-12).Q
for clock in ("global", "local"):
    run = run_batch_q_learning(mdp, power_schedule(0.8), clock, 100_000, seed=5, q_star=q_star,
                               record_every=25_000, audit=True)
    print(clock, [f"{r.metrics['err_inf']:.1e}" for r in run.trace], run.audit)

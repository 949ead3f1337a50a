"""
TD(lambda): tabular and with linear features
============================================

Tabular TD(lambda) under both clocks, then TD(lambda) with a three-column
basis compared against its analytic limit.
"""

import numpy as np

from markovrl import td_fa_fixed_point, td_lambda_fa, td_lambda_tabular, value_direct
from markovrl.models import random_irreducible_chain
from markovrl.sa import power_schedule
from markovrl.td import td_fa_error_bound

mrp = random_irreducible_chain(5, 11, gamma=0.5)
v_star = value_direct(mrp).v
schedule = power_schedule(0.8)  # beta_t = 1 / (t + 1)^0.8

for lam in (0.0, 0.5):
    for clock in ("global", "local"):
        run = td_lambda_tabular(mrp, lam, schedule, clock, 200_000, seed=7)
        print(f"lambda={lam} {clock:>6}: sup error {np.max(np.abs(run.v_hat - v_star)):.4f}")

# %%
# With features the iterates settle on the projected fixed point, not on v*.
chain = random_irreducible_chain(8, 21)
psi = np.random.default_rng(5).normal(size=(8, 3))
fp = td_fa_fixed_point(chain, psi, 0.5)
run = td_lambda_fa(chain, psi, 0.5, schedule, 300_000, seed=3)
print("theta* =", fp.theta)
print("theta  =", run.theta)
lhs, rhs = td_fa_error_bound(chain, psi, 0.5)
print(f"approximation error {lhs:.3f} <= bound {rhs:.3f}")

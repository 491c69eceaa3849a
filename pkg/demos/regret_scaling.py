"""
Regret curves and their scaling
===============================

Regret is measured exactly: every episode's policy is evaluated by
dynamic programming against the optimal value. On a tabular MDP the
optimistic agent's cumulative regret bends over, while a uniformly random
policy accrues regret linearly.
"""

import numpy as np

from eleanor import harness

doc = {
    "env": {"name": "tabular_random", "params": {"S": 3, "A": 2, "H": 3}},  # one MDP per seed
    "agent": {"name": "eleanor", "radius": {"c1": 0.2, "c2": 0.2}},
    "episodes": 500,
    "seeds": [0, 1, 2],
}

curves = {}
for agent in ("eleanor", "greedy_lsvi", "uniform_random"):
    cfg = harness.parse_config({**doc, "agent": {**doc["agent"], "name": agent}})
    curves[agent] = harness.aggregate(harness.run_experiment(cfg))["mean_cum"]

###############################################################################
# A log-log slope over the second half of the run summarizes the growth
# rate: 0.5 for square-root regret, 1 for linear.

for agent, mean_cum in curves.items():
    fit = harness.fit_scaling(mean_cum)
    print(f"{agent:>15}: final regret {mean_cum[-1]:7.1f}  slope {fit.slope:.2f}")

checkpoints = [50, 100, 200, 500]
print("episode  " + "  ".join(f"{k:>6}" for k in checkpoints))
print("eleanor  " + "  ".join(f"{curves['eleanor'][k - 1]:6.1f}" for k in checkpoints))
print("ratio to k^0.5: " + str(np.round([curves["eleanor"][k - 1] / np.sqrt(k) for k in checkpoints], 2)))

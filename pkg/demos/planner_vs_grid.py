"""
Checking the optimistic planner against brute force
===================================================

Each episode the agent picks one perturbation per step inside a confidence
ellipsoid so that the predicted start value is as large as possible. The
program is nonconvex, so the planner uses multi-start ascent. On small
problems a dense grid over every ellipsoid gives a reference value.
"""

from eleanor.agents import eleanor_plan, grid_oracle_plan
from eleanor.harness import planning_instance

for seed in range(8):
    env, grams, cfg, k, k_max = planning_instance(seed)
    plan = eleanor_plan(grams, cfg, env, k, k_max)
    ref = grid_oracle_plan(grams, cfg, env, k, k_max, resolution=33)
    print(f"instance {seed}: H={env.horizon} dims={env.feature_dims} "
          f"planner={plan.value:.6f} grid={ref:.6f} diff={plan.value - ref:+.1e}")

###############################################################################
# The planner also reports every restart's value. Spread between restarts
# is a direct view of how rugged the landscape is.

env, grams, cfg, k, k_max = planning_instance(4)
print(eleanor_plan(grams, cfg, env, k, k_max).restart_values.round(4))

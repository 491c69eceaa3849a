"""Optimistic least-squares value iteration for MDPs with low inherent Bellman error."""

from .agents import (
    DimensionBudgetExceeded,
    EleanorAgent,
    GramState,
    LifecycleError,
    MisLinUCB,
    MisLinUCBAgent,
    Plan,
    PlannerBudget,
    RadiusConfig,
    UniformRandomAgent,
    eleanor_plan,
    greedy_lsvi_agent,
    grid_oracle_plan,
    lsq_center,
    plan_value,
    radius,
)
from .envs import (
    EnvError,
    EpisodicLinearMDP,
    Transition,
    load_env,
    make_hard_bandit,
    make_linear_mdp,
    make_misspecified,
    make_random_tabular,
    make_tabular_onehot,
    sample_step,
    save_env,
)
from .harness import ConfigError, ExperimentConfig, fit_scaling, parse_config, run_experiment, sweep
from .oracle import chebyshev_fit, evaluate_policy, exact_dp, ibe_estimate, ibe_profile

__all__ = [name for name in dir() if not name.startswith("_")]

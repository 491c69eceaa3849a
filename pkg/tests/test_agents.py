import math

import numpy as np
import pytest
from scipy.linalg import solve_triangular
from scipy.stats import chisquare

from eleanor import _kernels
from eleanor import envs as E
from eleanor.agents import (
    DimensionBudgetExceeded,
    EleanorAgent,
    GramState,
    LifecycleError,
    MisLinUCB,
    MisLinUCBAgent,
    PlannerBudget,
    RadiusConfig,
    UniformRandomAgent,
    _Problem,
    eleanor_plan,
    greedy_lsvi_agent,
    grid_oracle_plan,
    lsq_center,
    plan_value,
    radius,
)
from eleanor.harness import planning_instance
from eleanor.oracle import evaluate_policy, exact_dp
from eleanor.streams import rng_stream


def tr(t, s, a, r, s2):
    return E.Transition(t, s, a, r, s2)


# -- radius ----------------------------------------------------------------


def test_radius_full_expression():
    cfg = RadiusConfig(ibe_term=0.1)
    got = radius(cfg, 1, 4, 100, horizon=3, ball_radius=8.0, k_max=1000)
    dp = 0.05 / (2 * 3 * 1000)
    ref = 2.0 * math.sqrt(4 * math.log(101 / dp)) + 8.0 + 0.1 * math.sqrt(400)
    assert got == pytest.approx(ref, rel=1e-14)


def test_radius_no_data_limit():
    cfg = RadiusConfig(c1=1e-6, c2=1.0)
    assert radius(cfg, 2, 3, 1, horizon=2, ball_radius=5.0, k_max=10) == pytest.approx(5.0, rel=1e-5)


def test_radius_third_term_scales():
    cfg = RadiusConfig(c1=0, c2=0, ibe_term=0.2)
    r1 = radius(cfg, 1, 2, 50, horizon=1, ball_radius=1.0, k_max=500)
    r2 = radius(cfg, 1, 2, 100, horizon=1, ball_radius=1.0, k_max=500)
    assert r2 / r1 == pytest.approx(math.sqrt(2), rel=1e-14)


def test_radius_validation():
    with pytest.raises(ValueError):
        radius(RadiusConfig(), 1, 2, 0, horizon=1, ball_radius=1.0, k_max=5)
    with pytest.raises(ValueError):
        RadiusConfig(lam=0)


# -- least squares -----------------------------------------------------------


def test_lsq_empty():
    np.testing.assert_array_equal(lsq_center(GramState(3, 1.0, 2)), np.zeros(3))


def test_lsq_hand_one_sample():
    g = GramState(2, 1.0, 1)
    g.add(tr(1, 0, 0, 1.0, 0), np.array([1.0, 0.0]))
    np.testing.assert_allclose(lsq_center(g), [0.5, 0.0])


def test_lsq_replicated_dense(rng):
    S, d = 3, 3
    phi_next = rng.uniform(-1, 1, (S, 2, d))
    theta_next = rng.standard_normal(d)
    data = [(tr(1, 0, 0, rng.random(), int(rng.integers(S))), rng.standard_normal(d)) for _ in range(10)]
    g = GramState(d, 0.5, S)
    for t_, f in data + data:
        g.add(t_, f)
    X = np.array([f for _, f in data + data])
    y = np.array([t_.reward + np.clip((phi_next[t_.s_next] @ theta_next).max(), 0, 2.0) for t_, f in data + data])
    ref = np.linalg.solve(0.5 * np.eye(d) + X.T @ X, X.T @ y)
    np.testing.assert_allclose(lsq_center(g, theta_next, phi_next, 2.0), ref, atol=1e-9)


def test_sufficient_stats_match_raw(rng):
    env = E.make_linear_mdp(2, 4, 2, 2, 3)
    g = GramState(2, 1.0, 4)
    for _ in range(30):
        s, a = int(rng.integers(4)), int(rng.integers(2))
        g.add(E.sample_step(env, 1, s, a, rng), env.features[0][s, a])
    theta_next = rng.standard_normal(2)
    # on values inside the clip range the cached statistics are exact
    v = np.clip((env.features[1] @ theta_next).max(axis=1), 0, 1.0)
    from eleanor.numerics import solve

    via_stats = solve(g.sigma, g.phi_r + g.next_phi @ v)
    np.testing.assert_allclose(via_stats, lsq_center(g, theta_next, env.features[1], 1.0), atol=1e-12)
    np.testing.assert_allclose(np.asarray(g.sigma), g.rebuilt_sigma(), atol=1e-12)


def test_lsq_permutation_invariant(rng):
    data = [(tr(1, 0, 0, rng.random(), 0), rng.standard_normal(3)) for _ in range(15)]
    a, b = GramState(3, 1.0, 1), GramState(3, 1.0, 1)
    for t_, f in data:
        a.add(t_, f)
    for i in rng.permutation(15):
        b.add(*data[i])
    np.testing.assert_allclose(lsq_center(a), lsq_center(b), atol=1e-12)


# -- planner -----------------------------------------------------------------


def bandit_state(rng, d, A, n, lam=1.0):
    feats = rng.standard_normal((A, d))
    feats /= np.maximum(1.0, np.linalg.norm(feats, axis=1, keepdims=True))
    env = E.EpisodicLinearMDP(1, 1, A, 0, (feats[None],), np.ones((1, 1, A, 1)), rng.random((1, 1, A)),
                              np.array([math.sqrt(d)]), {})
    g = GramState(d, lam, 1)
    for _ in range(n):
        a = int(rng.integers(A))
        g.add(tr(1, 0, a, float(rng.random()), 0), feats[a])
    return env, g


def test_h1_closed_form(rng):
    for _ in range(20):
        env, g = bandit_state(rng, int(rng.integers(1, 4)), int(rng.integers(2, 5)), int(rng.integers(0, 20)))
        cfg = RadiusConfig(c1=0.3, c2=0.3)
        plan = eleanor_plan([g], cfg, env, 5, 100)
        M = np.asarray(g.sigma)
        th = np.linalg.solve(M, g.phi_r)
        feats = env.features[0][0]
        r = plan.radii[0]
        ref = max(f @ th + r * math.sqrt(f @ np.linalg.solve(M, f)) for f in feats)
        assert plan.value == pytest.approx(ref, abs=1e-9)
        assert max(feats @ plan.theta_bar[0]) == pytest.approx(ref, abs=1e-9)


def test_ellipsoid_invariants():
    env, grams, cfg, k, k_max = planning_instance(3)
    plan = eleanor_plan(grams, cfg, env, k, k_max)
    for t in range(env.horizon):
        assert np.linalg.norm(plan.u[t]) <= 1 + 1e-9
        diff = plan.theta_bar[t] - plan.theta_hat[t]
        assert math.sqrt(diff @ np.asarray(grams[t].sigma) @ diff) <= plan.radii[t] * (1 + 1e-9) + 1e-12


def test_plan_value_consistent():
    for seed in range(10):
        env, grams, cfg, k, k_max = planning_instance(seed)
        plan = eleanor_plan(grams, cfg, env, k, k_max)
        assert plan_value(grams, env, plan.radii, plan.u) == pytest.approx(plan.value, abs=1e-9)


def test_zero_radii_is_greedy_chain(rng):
    env, grams, cfg, k, k_max = planning_instance(5)
    H = env.horizon
    plan = eleanor_plan(grams, cfg, env, k, k_max, radii=np.zeros(H))
    # independent backward chain through lsq_center on the raw dataset
    theta = None
    for t in range(H, 0, -1):
        if t == H:
            theta = lsq_center(grams[t - 1])
        else:
            theta = lsq_center(grams[t - 1], theta, env.features[t], H - t)
        np.testing.assert_allclose(plan.theta_bar[t - 1], theta, atol=1e-10)
    assert plan.value == pytest.approx(max(env.features[0][0] @ theta), abs=1e-10)
    assert grid_oracle_plan(grams, cfg, env, k, k_max, 5, radii=np.zeros(H)) == pytest.approx(plan.value, abs=1e-10)


def test_kernel_gradient_matches_fd():
    checked = 0
    for seed in range(40):
        env, grams, cfg, k, k_max = planning_instance(seed)
        if env.horizon < 2:
            continue
        prob = _Problem(grams, env, [1.0] * env.horizon)
        g = rng_stream(seed, 99)
        u = np.zeros((env.horizon, prob.dm))
        for t in range(1, env.horizon):
            u[t, : prob.dims[t]] = 0.5 * g.uniform(-1, 1, prob.dims[t])
        args = (prob.phi, prob.center, prob.coupl, prob.pert, prob.caps, prob.bonus, prob.s1)
        grad = np.zeros_like(u)
        _kernels.objective(u, *args, grad, True)
        fd = np.zeros_like(u)
        _kernels._fd_grad(u, *args, prob.dims, 1e-7, fd)
        np.testing.assert_allclose(grad, fd, atol=1e-5)
        checked += 1
    assert checked >= 10


def test_fd_direction_option_runs():
    env, grams, cfg, k, k_max = planning_instance(4)
    a = eleanor_plan(grams, cfg, env, k, k_max, budget=PlannerBudget(fd_step=1e-3))
    b = eleanor_plan(grams, cfg, env, k, k_max)
    assert abs(a.value - b.value) <= 1e-3


def test_grid_refinement_monotone():
    for seed in range(6):
        env, grams, cfg, k, k_max = planning_instance(seed)
        coarse = grid_oracle_plan(grams, cfg, env, k, k_max, 9, refine=False)
        fine = grid_oracle_plan(grams, cfg, env, k, k_max, 17, refine=False)
        assert fine >= coarse - 1e-12


def test_grid_h1_matches_closed_form(rng):
    env, g = bandit_state(rng, 2, 3, 10)
    cfg = RadiusConfig(c1=0.3, c2=0.3)
    plan = eleanor_plan([g], cfg, env, 5, 100)
    approx = grid_oracle_plan([g], cfg, env, 5, 100, 33, exact_first_step=False, refine=False)
    assert approx <= plan.value + 1e-12
    assert plan.value - approx <= plan.radii[0] * (1 - math.cos(math.pi / 64)) + 1e-9


def test_grid_dimension_budget():
    env = E.make_linear_mdp(3, 4, 2, 3, 0)
    grams = [GramState(3, 1.0, 4) for _ in range(3)]
    with pytest.raises(DimensionBudgetExceeded):
        grid_oracle_plan(grams, RadiusConfig(), env, 1, 10)


# -- agents ----------------------------------------------------------------


def test_first_episode_picks_largest_feature():
    feats = np.array([[0.3, 0.0], [0.0, 0.9], [0.5, 0.5]])
    env = E.EpisodicLinearMDP(1, 1, 3, 0, (feats[None],), np.ones((1, 1, 3, 1)), np.full((1, 1, 3), 0.5),
                              np.array([1.0]), {})
    agent = EleanorAgent(env, RadiusConfig(), 10, 0)
    agent.begin_episode(1)
    assert agent.act(1, 0) == 1
    lin = MisLinUCB(2, RadiusConfig(), 10)
    assert lin.act(feats) == 1


def test_lifecycle_errors():
    env = E.make_random_tabular(2, 2, 2, 0)
    agent = EleanorAgent(env, RadiusConfig(c1=0.2, c2=0.2), 10, 0)
    with pytest.raises(LifecycleError):
        agent.act(1, 0)
    with pytest.raises(LifecycleError):
        agent.begin_episode(2)
    agent.begin_episode(1)
    with pytest.raises(LifecycleError):
        agent.act(2, 0)
    a = agent.act(1, 0)
    with pytest.raises(LifecycleError):
        agent.act(1, 0)
    with pytest.raises(LifecycleError):
        agent.begin_episode(2)
    agent.observe(E.sample_step(env, 1, 0, a, 0))
    with pytest.raises(LifecycleError):
        agent.observe(tr(1, 0, 0, 0.0, 0))
    lin = MisLinUCB(2)
    with pytest.raises(LifecycleError):
        lin.observe(1.0)


def run_agent(agent, env, K, seed):
    out = []
    for k in range(1, K + 1):
        agent.begin_episode(k)
        out.append((agent.planned_value, agent.policy_table().copy()))
        s = env.start_state
        for t in range(1, env.horizon + 1):
            a = agent.act(t, s)
            x = E.sample_step(env, t, s, a, rng_stream(seed, k, t, 2))
            agent.observe(x)
            s = x.s_next
    return out


def test_determinism():
    env = E.make_linear_mdp(2, 4, 2, 3, 1)
    a = run_agent(EleanorAgent(env, RadiusConfig(c1=0.2, c2=0.2), 30, 5), env, 30, 5)
    b = run_agent(EleanorAgent(env, RadiusConfig(c1=0.2, c2=0.2), 30, 5), env, 30, 5)
    for (va, pa), (vb, pb) in zip(a, b):
        assert va == vb
        np.testing.assert_array_equal(pa, pb)


def test_greedy_equals_zero_constants():
    env = E.make_random_tabular(3, 2, 2, 3)
    a = run_agent(greedy_lsvi_agent(env, RadiusConfig(), 20, 1), env, 20, 1)
    b = run_agent(EleanorAgent(env, RadiusConfig(c1=0, c2=0, c3=0), 20, 1), env, 20, 1)
    for (va, pa), (vb, pb) in zip(a, b):
        assert va == pytest.approx(vb, abs=1e-12)
        np.testing.assert_array_equal(pa, pb)


def test_h1_agent_matches_mislinucb():
    env = E.make_hard_bandit(2, 0.3, 0.2)
    cfg = RadiusConfig(c1=0.5, c2=0.5, ibe_term=0.3)
    el = EleanorAgent(env, cfg, 300, 0)
    ml = MisLinUCBAgent(env, cfg, 300, 0)
    for k in range(1, 301):
        el.begin_episode(k)
        ml.begin_episode(k)
        a, b = el.act(1, 0), ml.act(1, 0)
        assert a == b
        assert el.planned_value == pytest.approx(ml.planned_value, abs=1e-9)
        x = E.sample_step(env, 1, 0, a, rng_stream(0, k, 1, 2))
        el.observe(x)
        ml.observe(x)


def test_mislinucb_eps_zero_is_plain():
    feats = np.random.default_rng(0).standard_normal((4, 3))
    a = MisLinUCB(3, RadiusConfig(ibe_term=0.0, c3=1.0), 100)
    b = MisLinUCB(3, RadiusConfig(ibe_term=0.5, c3=0.0), 100)
    g = np.random.default_rng(1)
    for _ in range(100):
        ia, ib = a.act(feats), b.act(feats)
        assert ia == ib
        r = float(g.random())
        a.observe(r)
        b.observe(r)


def test_sigma_reconstruction_after_each_observe():
    env = E.make_linear_mdp(2, 4, 2, 2, 0)
    agent = EleanorAgent(env, RadiusConfig(c1=0.2, c2=0.2), 40, 0)
    for k in range(1, 41):
        agent.begin_episode(k)
        s = 0
        for t in (1, 2):
            a = agent.act(t, s)
            x = E.sample_step(env, t, s, a, rng_stream(0, k, t))
            agent.observe(x)
            g = agent.grams[t - 1]
            np.testing.assert_allclose(np.asarray(g.sigma), g.rebuilt_sigma(), atol=1e-10)
            s = x.s_next


def test_uniform_random_regret_on_bandit():
    env = E.make_tabular_onehot(1, 2, 1, np.array([[[0.0, 1.0]]]), np.ones((1, 1, 2, 1)))
    agent = UniformRandomAgent(env, 3)
    v = exact_dp(env).v1(0)
    reg = []
    for k in range(1, 10_001):
        agent.begin_episode(k)
        reg.append(v - evaluate_policy(env, agent.policy_table()))
    assert abs(np.mean(reg) - 0.5) <= 0.02


def test_uniform_random_histogram():
    env = E.make_tabular_onehot(1, 4, 1, np.zeros((1, 1, 4)), np.ones((1, 1, 4, 1)))
    agent = UniformRandomAgent(env, 8)
    counts = np.zeros(4)
    for k in range(1, 100_001):
        agent.begin_episode(k)
        counts[agent.act(1, 0)] += 1
    assert chisquare(counts).pvalue > 0.01

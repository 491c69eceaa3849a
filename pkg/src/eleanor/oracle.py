"""Ground truth for finite MDPs: exact DP, policy evaluation, inherent Bellman error.

The inherent Bellman error at step ``t`` is

    I_t = sup_{theta' in B_{t+1}} inf_{theta in B_t} max_{s,a} |phi_t(s,a).theta - (T theta')(s,a)|

where ``T`` is the Bellman backup of the (clipped) greedy value of
``theta'``. The inner problem is a convex Chebyshev fit and is solved to
optimality. The outer problem is not concave, so :func:`ibe_estimate`
returns the best value found by a search, which is a lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from cvxopt import matrix, solvers
from scipy.optimize import linprog

from .envs import EpisodicLinearMDP
from .streams import IBE, rng_stream

BELLMAN_TOL = 1e-12


@dataclass(frozen=True)
class ValueTables:
    vstar: np.ndarray  # (H + 1, S); last row is zero
    qstar: np.ndarray  # (H, S, A)
    greedy_policy: np.ndarray  # (H, S) action indices

    def v1(self, s1: int) -> float:
        return float(self.vstar[0, s1])


def exact_dp(env: EpisodicLinearMDP) -> ValueTables:
    H, S, A = env.horizon, env.n_states, env.n_actions
    v = np.zeros((H + 1, S))
    q = np.zeros((H, S, A))
    for t in range(H - 1, -1, -1):
        q[t] = env.rewards[t] + env.transitions[t] @ v[t + 1]
        v[t] = q[t].max(axis=1)
    return ValueTables(v, q, q.argmax(axis=2))


def _as_stochastic(env: EpisodicLinearMDP, policy) -> np.ndarray:
    H, S, A = env.horizon, env.n_states, env.n_actions
    pol = np.asarray(policy)
    if pol.shape == (H, S):
        if not np.issubdtype(pol.dtype, np.integer):
            raise ValueError("deterministic policy tables must hold integer actions")
        if np.any(pol < 0) or np.any(pol >= A):
            raise ValueError("policy contains an invalid action index")
        return np.eye(A)[pol]
    if pol.shape == (H, S, A):
        pol = pol.astype(float)
        if np.any(pol < 0) or np.any(np.abs(pol.sum(axis=2) - 1.0) > 1e-12):
            raise ValueError("stochastic policy rows must be distributions")
        return pol
    raise ValueError(f"policy must have shape {(H, S)} or {(H, S, A)}, got {pol.shape}")


def evaluate_policy(env: EpisodicLinearMDP, policy) -> float:
    """Exact value at the start state of a deterministic ``(H, S)`` or stochastic ``(H, S, A)`` policy."""
    pi = _as_stochastic(env, policy)
    v = np.zeros(env.n_states)
    for t in range(env.horizon - 1, -1, -1):
        q = env.rewards[t] + env.transitions[t] @ v
        v = (pi[t] * q).sum(axis=1)
    return float(v[env.start_state])


def bellman_residual(env: EpisodicLinearMDP, vt: ValueTables) -> float:
    res = 0.0
    for t in range(env.horizon):
        target = env.rewards[t] + env.transitions[t] @ vt.vstar[t + 1]
        res = max(res, float(np.max(np.abs(vt.qstar[t] - target))))
        res = max(res, float(np.max(np.abs(vt.vstar[t] - vt.qstar[t].max(axis=1)))))
    return res


def greedy_values(phi_next: np.ndarray, theta_next: np.ndarray, cap: float):
    """Clipped greedy value per state plus the maximizing action indices."""
    q = phi_next @ theta_next
    best = q.argmax(axis=1)
    raw = q[np.arange(q.shape[0]), best]
    return np.clip(raw, 0.0, cap), best, raw


def bellman_backup_table(env: EpisodicLinearMDP, t: int, theta_next) -> np.ndarray:
    """``r_t + P_t V`` where ``V(s') = clip(max_a phi_{t+1}(s',a).theta_next, 0, H - t)``."""
    env._check_t(t)
    H = env.horizon
    if t == H:
        return np.array(env.rewards[t - 1])
    theta_next = np.asarray(theta_next, dtype=float)
    if theta_next.shape != (env.feature_dims[t],):
        raise ValueError(f"theta_next must have dimension {env.feature_dims[t]}")
    v, _, _ = greedy_values(env.features[t], theta_next, H - t)
    return env.rewards[t - 1] + env.transitions[t - 1] @ v


# ---------------------------------------------------------------------------
# Chebyshev fit


@dataclass(frozen=True)
class FitResult:
    theta: np.ndarray
    eps_fit: float
    gap: float
    # derivative of the optimal value with respect to each target b[i]
    sensitivity: np.ndarray


solvers.options["show_progress"] = False


def _fit_socp(Phi: np.ndarray, b: np.ndarray, D: float):
    n, d = Phi.shape
    ones = np.ones((n, 1))
    G = np.block([[Phi, -ones], [-Phi, -ones]])
    h = np.concatenate([b, -b])
    Gq = np.zeros((d + 1, d + 1))
    Gq[1:, :d] = -np.eye(d)
    hq = np.zeros(d + 1)
    hq[0] = D
    sol = solvers.socp(
        matrix(np.r_[np.zeros(d), 1.0]),
        Gl=matrix(G),
        hl=matrix(h),
        Gq=[matrix(Gq)],
        hq=[matrix(hq)],
    )
    x = np.array(sol["x"]).ravel()
    z = np.array(sol["zl"]).ravel()
    return x[:d], float(sol["gap"]), -z[:n] + z[n:]


def solve_chebyshev(Phi, b, D) -> FitResult:
    """Minimize ``max_i |Phi[i].theta - b[i]|`` over ``||theta||_2 <= D``.

    The problem is first solved as an LP without the ball constraint (HiGHS).
    If that optimum already lies in the ball it is optimal for the constrained
    problem too; otherwise the second-order cone program is solved.
    """
    Phi = np.asarray(Phi, dtype=float)
    b = np.asarray(b, dtype=float)
    n, d = Phi.shape
    ones = np.ones((n, 1))
    A_ub = np.block([[Phi, -ones], [-Phi, -ones]])
    b_ub = np.concatenate([b, -b])
    res = linprog(
        np.r_[np.zeros(d), 1.0],
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=[(None, None)] * (d + 1),
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    theta = res.x[:d]
    marg = res.ineqlin.marginals
    if np.linalg.norm(theta) <= D:
        gap = abs(float(res.fun) - float(b_ub @ marg))
        sens = marg[:n] - marg[n:]
    else:
        theta, gap, sens = _fit_socp(Phi, b, D)
    norm = np.linalg.norm(theta)
    if norm > D:
        theta = theta * (D / norm)
    eps_fit = float(np.max(np.abs(Phi @ theta - b)))
    return FitResult(theta, eps_fit, gap, np.asarray(sens, dtype=float))


def chebyshev_fit(phi_table, b_table, D):
    """Best sup-norm linear fit of ``b_table`` by ``phi_table`` within the ball of radius ``D``.

    ``phi_table`` has shape ``(..., d)`` and ``b_table`` the matching leading
    shape. Returns ``(theta, eps_fit)``; ``eps_fit`` is recomputed from the
    returned ``theta``, which is feasible by construction.
    """
    if D <= 0:
        raise ValueError("ball radius must be positive")
    phi_table = np.asarray(phi_table, dtype=float)
    Phi = phi_table.reshape(-1, phi_table.shape[-1])
    b = np.asarray(b_table, dtype=float).reshape(-1)
    fit = solve_chebyshev(Phi, b, D)
    return fit.theta, fit.eps_fit


# ---------------------------------------------------------------------------
# inherent Bellman error search


@dataclass(frozen=True)
class IbeEntry:
    t: int
    ihat: float
    witness_theta_next: np.ndarray
    witness_theta_fit: np.ndarray
    inner_gap: float
    budget: int
    evaluations: int


def _ball_sample(rng: np.random.Generator, d: int, D: float, on_sphere: bool) -> np.ndarray:
    x = rng.standard_normal(d)
    x /= np.linalg.norm(x)
    scale = D if on_sphere else D * rng.random() ** (1.0 / d)
    return scale * x


def _project(x: np.ndarray, D: float) -> np.ndarray:
    n = np.linalg.norm(x)
    return x if n <= D else x * (D / n)


class _InnerValue:
    """Inner fit value as a function of the next-step parameter, with a supergradient."""

    def __init__(self, env: EpisodicLinearMDP, t: int):
        self.env = env
        self.t = t
        self.phi = env.features[t - 1].reshape(-1, env.feature_dims[t - 1])
        self.D = float(env.ball_radii[t - 1])
        self.evaluations = 0

    def __call__(self, theta_next: np.ndarray):
        env, t = self.env, self.t
        b = bellman_backup_table(env, t, theta_next)
        fit = solve_chebyshev(self.phi, b.reshape(-1), self.D)
        self.evaluations += 1
        grad = None
        if t < env.horizon:
            phi_next = env.features[t]
            _, best, raw = greedy_values(phi_next, theta_next, env.horizon - t)
            active = ((raw >= 0.0) & (raw < env.horizon - t)).astype(float)
            # d b[s,a] / d theta_next = sum_s' p[s,a,s'] active[s'] phi_next[s', best[s']]
            chosen = phi_next[np.arange(env.n_states), best] * active[:, None]
            p = env.transitions[t - 1].reshape(-1, env.n_states)
            grad = (fit.sensitivity @ p) @ chosen
        return fit, grad


def ibe_estimate(
    env: EpisodicLinearMDP,
    t: int,
    budget: int = 512,
    seed: int = 0,
    block: int = 32,
    refine_steps: int = 100,
    refine_step: float = 1e-2,
) -> IbeEntry:
    """Lower bound on the inherent Bellman error at step ``t`` by outer search.

    Candidates for the next-step parameter are, in a fixed order: the origin,
    the ``2 d`` coordinate extremes ``+-D e_i`` and then random points of the
    ball (alternating sphere and interior). After every full block of
    ``block`` candidates a local ascent of ``refine_steps`` projected
    supergradient steps starts from the best point of that block. The step
    length starts at ``refine_step * D`` and halves whenever a step fails to
    improve. Candidate lists for different budgets share a prefix, so the
    estimate is nondecreasing in ``budget``.

    For ``t = H`` no search is needed and the value is exact.
    """
    env._check_t(t)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    H = env.horizon
    inner = _InnerValue(env, t)
    if t == H:
        fit, _ = inner(np.zeros(0))
        return IbeEntry(t, fit.eps_fit, np.zeros(0), fit.theta, fit.gap, budget, 1)

    d_next = env.feature_dims[t]
    D_next = float(env.ball_radii[t])
    rng = rng_stream(seed, t, IBE)

    def candidate(i: int) -> np.ndarray:
        if i == 0:
            return np.zeros(d_next)
        if i <= 2 * d_next:
            x = np.zeros(d_next)
            x[(i - 1) // 2] = D_next if i % 2 else -D_next
            return x
        return _ball_sample(rng, d_next, D_next, on_sphere=bool(i % 2))

    best = (-np.inf, None, None)

    def consider(theta_next, fit):
        nonlocal best
        if fit.eps_fit > best[0]:
            best = (fit.eps_fit, theta_next, fit)

    block_best = (-np.inf, None, None, None)
    for i in range(budget):
        x = candidate(i)
        fit, grad = inner(x)
        consider(x, fit)
        if fit.eps_fit > block_best[0]:
            block_best = (fit.eps_fit, x, fit, grad)
        if (i + 1) % block == 0:
            _refine(inner, block_best, D_next, refine_steps, refine_step * D_next, consider)
            block_best = (-np.inf, None, None, None)

    value, theta_next, fit = best
    return IbeEntry(t, value, theta_next, fit.theta, fit.gap, budget, inner.evaluations)


def _refine(inner, start, D, steps, step, consider):
    value, x, _, grad = start
    for _ in range(steps):
        if grad is None or not np.any(grad):
            break
        y = _project(x + step * grad / np.linalg.norm(grad), D)
        fit, g = inner(y)
        consider(y, fit)
        if fit.eps_fit > value:
            value, x, grad = fit.eps_fit, y, g
        else:
            step *= 0.5


def ibe_profile(env: EpisodicLinearMDP, budget: int = 512, seed: int = 0) -> list:
    """:func:`ibe_estimate` at every timestep."""
    return [ibe_estimate(env, t, budget=budget, seed=seed) for t in range(1, env.horizon + 1)]

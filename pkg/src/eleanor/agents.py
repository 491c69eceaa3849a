"""Optimistic least-squares value iteration and its one-step special case.

ELEANOR keeps, for every timestep, a ridge-regularized Gram matrix of the
features it has visited. Each episode it solves a global optimistic program:
choose one perturbation ``u_t`` in the unit ball per timestep so that the
backward least-squares recursion

    theta_bar_t = theta_hat_t(theta_bar_{t+1}) + radius_t * L_t^{-T} u_t

(with ``Sigma_t = L_t L_t^T``) yields the largest value at the start state,
then acts greedily with respect to ``theta_bar``. The perturbation set
``{L^{-T} u : ||u|| <= 1}`` is exactly the ellipsoid ``||xi||_Sigma <= 1``.

With ``H = 1`` the program has the closed form
``max_a phi(a).theta_hat + radius * ||phi(a)||_{Sigma^{-1}}``, i.e. LinUCB.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels
from .envs import EpisodicLinearMDP, Transition
from .numerics import (
    SpdMatrix,
    rank1_update,
    scaled_identity,
    solve,
    solve_many,
)
from .streams import PLANNER, POLICY, rng_stream


class LifecycleError(RuntimeError):
    pass


class DimensionBudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class RadiusConfig:
    lam: float = 1.0
    delta: float = 0.05
    sigma_noise: float = 0.0
    ibe_term: float = 0.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        for name in ("sigma_noise", "ibe_term", "c1", "c2", "c3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


def radius(cfg: RadiusConfig, t: int, d_t: int, k: int, *, horizon: int, ball_radius: float, k_max: int) -> float:
    """Confidence radius at 1-based step ``t`` in episode ``k``.

    ``c1 * sigma_v * sqrt(d_t * log((lam + k) / (lam * delta')))
    + c2 * sqrt(lam) * D_t + c3 * ibe_term * sqrt(d_t * k)``

    with ``delta' = delta / (2 H K_max)`` and value scale
    ``sigma_v = (H - t) + sigma_noise``. The last term is the misspecification
    inflation; it grows like ``sqrt(k)``.
    """
    if k < 1:
        raise ValueError("episode index k starts at 1")
    delta_p = cfg.delta / (2.0 * horizon * k_max)
    sigma_v = (horizon - t) + cfg.sigma_noise
    stat = cfg.c1 * sigma_v * math.sqrt(d_t * math.log((cfg.lam + k) / (cfg.lam * delta_p)))
    reg = cfg.c2 * math.sqrt(cfg.lam) * ball_radius
    mis = cfg.c3 * cfg.ibe_term * math.sqrt(d_t * k)
    return stat + reg + mis


class GramState:
    """Regularized Gram matrix and raw dataset for one timestep.

    Besides the raw transitions, two exact sufficient statistics are kept:
    ``phi_r = sum_i phi_i r_i`` and ``next_phi[:, s'] = sum_{i: s'_i = s'} phi_i``.
    Regression targets ``r_i + V(s'_i)`` change every episode with ``V``, but
    since ``V`` is a function of the next state only,
    ``sum_i phi_i y_i = phi_r + next_phi @ V``.
    """

    def __init__(self, dim: int, lam: float, n_states: int):
        self.dim = dim
        self.lam = lam
        self.sigma: SpdMatrix = scaled_identity(dim, lam)
        self.dataset: list = []
        self.phi_r = np.zeros(dim)
        self.next_phi = np.zeros((dim, n_states))

    def add(self, tr: Transition, phi: np.ndarray):
        phi = np.asarray(phi, dtype=float)
        self.sigma = rank1_update(self.sigma, phi)
        self.dataset.append((tr, phi))
        self.phi_r += phi * tr.reward
        self.next_phi[:, tr.s_next] += phi

    def __len__(self):
        return len(self.dataset)

    def rebuilt_sigma(self) -> np.ndarray:
        """Gram matrix recomputed from the raw dataset."""
        m = self.lam * np.eye(self.dim)
        for _, phi in self.dataset:
            m += np.outer(phi, phi)
        return m


def lsq_center(gram: GramState, theta_next=None, phi_next=None, cap: float = 0.0) -> np.ndarray:
    """Ridge solution on Bellman targets built from the raw dataset.

    ``y_i = r_i + clip(max_a phi_next[s'_i, a].theta_next, 0, cap)``, or
    ``y_i = r_i`` when ``theta_next`` is None (last step).
    """
    b = np.zeros(gram.dim)
    if theta_next is not None:
        theta_next = np.asarray(theta_next, dtype=float)
        if theta_next.shape != (phi_next.shape[-1],):
            raise ValueError("theta_next does not match the next-step feature dimension")
    for tr, phi in gram.dataset:
        y = tr.reward
        if theta_next is not None:
            y += min(max(float(np.max(phi_next[tr.s_next] @ theta_next)), 0.0), cap)
        b += phi * y
    return solve(gram.sigma, b)


def bonus_norms(sigma: SpdMatrix, feats: np.ndarray) -> np.ndarray:
    """``||phi_a||_{Sigma^{-1}}`` for every row of ``feats``."""
    w = solve_triangular(sigma.chol, np.asarray(feats, dtype=float).T, lower=True)
    return np.sqrt(np.sum(w * w, axis=0))


def ucb_scores(sigma: SpdMatrix, theta_hat: np.ndarray, feats: np.ndarray, rad: float) -> np.ndarray:
    """``phi_a.theta_hat + rad * ||phi_a||_{Sigma^{-1}}`` per action."""
    return feats @ theta_hat + rad * bonus_norms(sigma, feats)


@dataclass(frozen=True)
class PlannerBudget:
    restarts: int = 8
    iterations: int = 300
    step: float = 0.1
    min_step: float = 1e-9
    fd_step: float = 0.0


@dataclass
class Plan:
    theta_hat: list
    theta_bar: list
    u: list
    radii: np.ndarray
    value: float
    first_action: int
    restart_values: np.ndarray = field(default_factory=lambda: np.zeros(0))


class _Problem:
    """Per-episode arrays shared by the planner and the grid oracle."""

    def __init__(self, grams, env: EpisodicLinearMDP, radii):
        H, S, A = env.horizon, env.n_states, env.n_actions
        dims = np.array(env.feature_dims, dtype=np.int64)
        dm = int(dims.max())
        self.H, self.S, self.A, self.dims, self.dm = H, S, A, dims, dm
        self.s1 = env.start_state
        self.radii = np.asarray(radii, dtype=float)
        self.grams = grams
        self.env = env
        self.phi = np.zeros((H, S, A, dm))
        self.center = np.zeros((H, dm))
        self.coupl = np.zeros((H, dm, S))
        self.pert = np.zeros((H, dm, dm))
        self.caps = np.array([float(H - t) for t in range(H)])
        for t in range(H):
            d = dims[t]
            g = grams[t]
            self.phi[t, :, :, :d] = env.features[t]
            self.center[t, :d] = solve(g.sigma, g.phi_r)
            if t < H - 1:
                self.coupl[t, :d, :] = solve_many(g.sigma, g.next_phi)
            if self.radii[t] > 0:
                self.pert[t, :d, :d] = self.radii[t] * solve_triangular(g.sigma.chol.T, np.eye(d), lower=False)
        feats1 = env.features[0][self.s1]
        self.bonus = self.radii[0] * bonus_norms(grams[0].sigma, feats1)

    def forward(self, u_rows):
        """theta_bar for steps 2..H (0-based 1..H-1) and theta_hat at step 1."""
        H = self.H
        theta_bar = [None] * H
        theta_hat = [None] * H
        v = None
        for t in range(H - 1, -1, -1):
            d = self.dims[t]
            if t == H - 1:
                th = self.center[t, :d].copy()
            else:
                th = self.center[t, :d] + self.coupl[t, :d, :] @ v
            theta_hat[t] = th
            if t == 0:
                break
            tb = th + self.pert[t, :d, :d] @ u_rows[t][:d]
            theta_bar[t] = tb
            q = self.env.features[t] @ tb
            v = np.clip(q.max(axis=1), 0.0, self.caps[t])
        return theta_hat, theta_bar


def eleanor_plan(
    grams,
    cfg: RadiusConfig,
    env: EpisodicLinearMDP,
    k: int,
    k_max: int,
    rng: np.random.Generator | None = None,
    budget: PlannerBudget = PlannerBudget(),
    radii=None,
) -> Plan:
    """Solve the per-episode optimistic program by multi-start projected ascent.

    The first step's perturbation is maximized in closed form for any fixed
    suffix, so the ascent runs over ``u_2..u_H`` only. Starts are the origin
    followed by ``budget.restarts`` uniform points of the product of balls;
    the best value wins, ties going to the earliest start.
    Only the features, start state, horizon and ball radii of ``env`` are used.
    """
    H = env.horizon
    if radii is None:
        radii = [
            radius(cfg, t, env.feature_dims[t - 1], k, horizon=H, ball_radius=float(env.ball_radii[t - 1]), k_max=k_max)
            for t in range(1, H + 1)
        ]
    prob = _Problem(grams, env, radii)
    u = np.zeros((H, prob.dm))
    values = np.zeros(0)
    if H > 1 and np.any(prob.radii[1:] > 0):
        rng = rng if rng is not None else rng_stream(0)
        starts = [np.zeros((H, prob.dm))]
        for _ in range(budget.restarts):
            s = np.zeros((H, prob.dm))
            for t in range(1, H):
                d = prob.dims[t]
                x = rng.standard_normal(d)
                s[t, :d] = x / np.linalg.norm(x) * rng.random() ** (1.0 / d)
            starts.append(s)
        values = np.empty(len(starts))
        best_j = -np.inf
        for i, s in enumerate(starts):
            ui, ji = _kernels.ascend(
                s, prob.phi, prob.center, prob.coupl, prob.pert, prob.caps, prob.bonus,
                prob.s1, prob.dims, budget.iterations, budget.step, budget.min_step, budget.fd_step,
            )
            values[i] = ji
            if ji > best_j:
                best_j, u = ji, ui
    return _finish(prob, u, values)


def _finish(prob: _Problem, u: np.ndarray, values) -> Plan:
    theta_hat, theta_bar = prob.forward(u)
    sigma1 = prob.grams[0].sigma
    feats1 = prob.env.features[0][prob.s1]
    scores = ucb_scores(sigma1, theta_hat[0], feats1, prob.radii[0])
    a1 = int(np.argmax(scores))
    w = solve_triangular(sigma1.chol, feats1[a1], lower=True)
    nw = np.linalg.norm(w)
    u1 = w / nw if nw > 0 else np.zeros_like(w)
    theta_bar[0] = theta_hat[0] + prob.radii[0] * solve_triangular(sigma1.chol.T, u1, lower=False)
    u_list = [u1] + [u[t, : prob.dims[t]].copy() for t in range(1, prob.H)]
    return Plan(theta_hat, theta_bar, u_list, prob.radii, float(scores[a1]), a1, np.asarray(values))


def plan_value(grams, env: EpisodicLinearMDP, radii, u_list) -> float:
    """Start value for explicit perturbations ``u_1..u_H`` (no closed form at step 1)."""
    prob = _Problem(grams, env, radii)
    rows = np.zeros((prob.H, prob.dm))
    for t, ut in enumerate(u_list):
        rows[t, : len(ut)] = ut
    theta_hat, _ = prob.forward(rows)
    d = prob.dims[0]
    tb = theta_hat[0] + prob.pert[0, :d, :d] @ rows[0, :d]
    return float(np.max(prob.env.features[0][prob.s1] @ tb))


# ---------------------------------------------------------------------------
# brute-force verification of the planner


def ball_grid(d: int, resolution: int) -> np.ndarray:
    """Deterministic grid of the closed unit ball, nested under ``n -> 2n - 1``.

    ``d = 1``: ``linspace(-1, 1, n)``. ``d = 2``: the origin plus ``n - 1``
    circles of radii ``j / (n - 1)``, each with ``4 (n - 1)`` equally spaced
    angles. ``d >= 3``: the cube grid ``linspace(-1, 1, n)^d`` restricted to
    the ball.
    """
    n = int(resolution)
    if n < 2:
        raise ValueError("resolution must be at least 2")
    if d == 1:
        return np.linspace(-1.0, 1.0, n)[:, None]
    if d == 2:
        m = n - 1
        ang = 2.0 * np.pi * np.arange(4 * m) / (4 * m)
        ring = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        shells = [np.zeros((1, 2))] + [ring * (j / m) for j in range(1, m + 1)]
        return np.concatenate(shells)
    axis = np.linspace(-1.0, 1.0, n)
    pts = np.array(list(itertools.product(axis, repeat=d)))
    return pts[np.linalg.norm(pts, axis=1) <= 1.0 + 1e-12]


class _GridModel:
    """Vectorized evaluation of the optimistic program over products of point sets.

    Written independently of the planner: plain dense solves and explicit
    inverses, no shared kernels.
    """

    def __init__(self, grams, env: EpisodicLinearMDP, radii, exact_first_step: bool):
        self.env = env
        self.H = env.horizon
        self.radii = np.asarray(radii, dtype=float)
        self.exact_first_step = exact_first_step
        self.hats, self.coupl, self.maps = [], [], []
        for t in range(self.H):
            g = grams[t]
            sig = g.sigma.entries
            self.hats.append(np.linalg.solve(sig, g.phi_r))
            self.coupl.append(np.linalg.solve(sig, g.next_phi) if t < self.H - 1 else None)
            self.maps.append(self.radii[t] * np.linalg.inv(g.sigma.chol).T)
        feats = env.features[0][env.start_state]
        sig_inv = np.linalg.inv(grams[0].sigma.entries)
        self.first_bonus = self.radii[0] * np.sqrt(np.einsum("ad,de,ae->a", feats, sig_inv, feats))
        self.first_feats = feats
        self.free = list(range(1, self.H)) if exact_first_step else list(range(self.H))

    def values(self, points) -> np.ndarray:
        """Objective on the product of ``points[t]`` over free steps.

        ``points`` maps each free 0-based step to an ``(N_t, d_t)`` array.
        The result has one axis per free step, ordered from step ``H - 1``
        down to the first free step.
        """
        env, H = self.env, self.H
        v = None
        for t in range(H - 1, 0, -1):
            base = self.hats[t] if v is None else self.hats[t] + v @ self.coupl[t].T
            tb = base[..., None, :] + points[t] @ self.maps[t].T
            q = np.einsum("...d,sad->...sa", tb, env.features[t])
            v = np.clip(q.max(axis=-1), 0.0, H - t)
        base = self.hats[0] if v is None else self.hats[0] + v @ self.coupl[0].T
        if self.exact_first_step:
            return np.max(base @ self.first_feats.T + self.first_bonus, axis=-1)
        tb = base[..., None, :] + points[0] @ self.maps[0].T
        return np.max(tb @ self.first_feats.T, axis=-1)

    def chunked_values(self, points, max_rows: int = 2_000_000) -> np.ndarray:
        lead = self.free[-1]
        n_lead = len(points[lead])
        inner = math.prod(len(points[t]) for t in self.free[:-1]) * self.env.n_states * self.env.n_actions
        chunk = max(1, max_rows // max(inner, 1))
        parts = []
        for lo in range(0, n_lead, chunk):
            sub = dict(points)
            sub[lead] = points[lead][lo : lo + chunk]
            parts.append(self.values(sub))
        return np.concatenate(parts, axis=0)


def _local_offsets(d: int, h: float, m: int = 9) -> np.ndarray:
    axis = np.linspace(-h, h, m)
    return np.array(list(itertools.product(axis, repeat=d)))


def _to_ball(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x, axis=-1, keepdims=True)
    return x / np.maximum(n, 1.0)


def grid_oracle_plan(
    grams,
    cfg: RadiusConfig,
    env: EpisodicLinearMDP,
    k: int,
    k_max: int,
    resolution: int = 33,
    radii=None,
    exact_first_step: bool = True,
    refine: bool = True,
    n_refine: int = 8,
    refine_levels: int = 24,
    max_points: int = 40_000_000,
) -> float:
    """Brute-force maximum of the optimistic program.

    Each free step's perturbation ranges over :func:`ball_grid` and the
    objective is evaluated on the full product. With ``exact_first_step`` the
    first step uses the exact maximum over its ball instead of a grid. With
    ``refine`` the ``n_refine`` best grid cells are then zoomed into: a
    ``9^d`` local grid per step, again evaluated on the full product, with
    the local spacing halved at each of ``refine_levels`` levels. The pure
    grid value (``refine=False``) is monotone under grid refinement.
    """
    H = env.horizon
    dims = env.feature_dims
    if sum(dims) > 6:
        raise DimensionBudgetExceeded(f"grid oracle needs sum(d_t) <= 6, got {sum(dims)}")
    if radii is None:
        radii = [
            radius(cfg, t, dims[t - 1], k, horizon=H, ball_radius=float(env.ball_radii[t - 1]), k_max=k_max)
            for t in range(1, H + 1)
        ]
    model = _GridModel(grams, env, radii, exact_first_step)
    if not model.free:
        return float(model.values({}))
    grids = {t: ball_grid(dims[t], resolution) for t in model.free}
    total = math.prod(len(g) for g in grids.values())
    if total > max_points:
        raise DimensionBudgetExceeded(f"grid has {total} points (limit {max_points})")
    vals = model.chunked_values(grids)
    best = float(vals.max())
    if not refine:
        return best

    order = model.free[::-1]  # axis order of ``vals``
    flat = vals.ravel()
    top = np.argsort(-flat, kind="stable")[:n_refine]
    h0 = 2.0 / (resolution - 1)
    for idx in top:
        cell = np.unravel_index(idx, vals.shape)
        center = {t: grids[t][i] for t, i in zip(order, cell)}
        h = h0
        for _ in range(refine_levels):
            pts = {t: _to_ball(center[t] + _local_offsets(dims[t], h)) for t in model.free}
            local = model.values(pts)
            j = np.unravel_index(int(np.argmax(local)), local.shape)
            center = {t: pts[t][i] for t, i in zip(order, j)}
            best = max(best, float(local[j]))
            h *= 0.5
    return best


# ---------------------------------------------------------------------------
# agents


class EleanorAgent:
    """Plan once per episode, then act greedily on the planned parameters.

    Call order per episode: ``begin_episode(k)``, then for ``t = 1..H``
    ``act(t, s)`` followed by ``observe(transition)``. With ``zero_radius``
    all radii are forced to zero, which is greedy least-squares value
    iteration on the same code path.
    """

    def __init__(
        self,
        env: EpisodicLinearMDP,
        cfg: RadiusConfig = RadiusConfig(),
        k_max: int = 1000,
        seed: int = 0,
        budget: PlannerBudget = PlannerBudget(),
        zero_radius: bool = False,
    ):
        self.env = env
        self.cfg = cfg
        self.k_max = k_max
        self.seed = seed
        self.budget = budget
        self.zero_radius = zero_radius
        self.grams = [GramState(d, cfg.lam, env.n_states) for d in env.feature_dims]
        self.plan: Plan | None = None
        self.k = 0
        self._t = None
        self._phase = "idle"

    @property
    def planned_value(self) -> float:
        return self.plan.value

    def begin_episode(self, k: int):
        if self._phase not in ("idle", "done"):
            raise LifecycleError("begin_episode called before the previous episode finished")
        if k != self.k + 1:
            raise LifecycleError(f"expected episode {self.k + 1}, got {k}")
        H = self.env.horizon
        radii = np.zeros(H) if self.zero_radius else None
        self.plan = eleanor_plan(
            self.grams, self.cfg, self.env, k, self.k_max,
            rng=rng_stream(self.seed, k, PLANNER), budget=self.budget, radii=radii,
        )
        self.k = k
        self._t = 1
        self._phase = "act"

    def action(self, t: int, s: int) -> int:
        if t == 1 and s == self.env.start_state:
            return self.plan.first_action
        return int(np.argmax(self.env.features[t - 1][s] @ self.plan.theta_bar[t - 1]))

    def policy_table(self) -> np.ndarray:
        H, S = self.env.horizon, self.env.n_states
        return np.array([[self.action(t, s) for s in range(S)] for t in range(1, H + 1)], dtype=np.int64)

    def act(self, t: int, s: int) -> int:
        if self._phase != "act" or t != self._t:
            raise LifecycleError(f"act({t}, ...) out of order")
        self._phase = "observe"
        return self.action(t, s)

    def observe(self, tr: Transition):
        if self._phase != "observe" or tr.t != self._t:
            raise LifecycleError("observe out of order")
        self.grams[tr.t - 1].add(tr, self.env.features[tr.t - 1][tr.s, tr.a])
        if tr.t == self.env.horizon:
            self._phase = "done"
        else:
            self._t += 1
            self._phase = "act"


def greedy_lsvi_agent(env, cfg: RadiusConfig = RadiusConfig(), k_max: int = 1000, seed: int = 0, budget=PlannerBudget()):
    return EleanorAgent(env, cfg, k_max, seed, budget, zero_radius=True)


class MisLinUCB:
    """LinUCB whose radius carries the ``c3 * eps * sqrt(d k)`` misspecification term.

    ``cfg.ibe_term = eps`` gives the inflated variant; ``c3 = 0`` (or
    ``ibe_term = 0``) gives plain LinUCB.
    """

    def __init__(self, dim: int, cfg: RadiusConfig = RadiusConfig(), k_max: int = 1000, ball_radius: float = 1.0):
        self.dim = dim
        self.cfg = cfg
        self.k_max = k_max
        self.ball_radius = ball_radius
        self.sigma = scaled_identity(dim, cfg.lam)
        self.b = np.zeros(dim)
        self.k = 0
        self._pending = None
        self.last_scores = None

    def theta_hat(self) -> np.ndarray:
        return solve(self.sigma, self.b)

    def current_radius(self) -> float:
        return radius(self.cfg, 1, self.dim, self.k + 1, horizon=1, ball_radius=self.ball_radius, k_max=self.k_max)

    def act(self, feats) -> int:
        if self._pending is not None:
            raise LifecycleError("act called twice without observe")
        feats = np.asarray(feats, dtype=float)
        self.last_scores = ucb_scores(self.sigma, self.theta_hat(), feats, self.current_radius())
        a = int(np.argmax(self.last_scores))
        self._pending = feats[a]
        return a

    def observe(self, reward: float):
        if self._pending is None:
            raise LifecycleError("observe called before act")
        phi = self._pending
        self.sigma = rank1_update(self.sigma, phi)
        self.b += phi * reward
        self.k += 1
        self._pending = None


class MisLinUCBAgent:
    """Episode-lifecycle wrapper of :class:`MisLinUCB` for one-step environments."""

    def __init__(self, env: EpisodicLinearMDP, cfg: RadiusConfig = RadiusConfig(), k_max: int = 1000, seed: int = 0):
        if env.horizon != 1:
            raise ValueError("mislinucb needs a horizon-1 environment")
        self.env = env
        self.learner = MisLinUCB(env.feature_dims[0], cfg, k_max, float(env.ball_radii[0]))
        self._choice = None
        self.planned_value = float("nan")

    def begin_episode(self, k: int):
        if k != self.learner.k + 1:
            raise LifecycleError(f"expected episode {self.learner.k + 1}, got {k}")
        s1 = self.env.start_state
        self._choice = self.learner.act(self.env.features[0][s1])
        self.planned_value = float(self.learner.last_scores[self._choice])

    def policy_table(self) -> np.ndarray:
        pol = np.zeros((1, self.env.n_states), dtype=np.int64)
        pol[0, :] = self._choice
        return pol

    def act(self, t: int, s: int) -> int:
        if t != 1 or self._choice is None:
            raise LifecycleError("act out of order")
        return self._choice

    def observe(self, tr: Transition):
        self.learner.observe(tr.reward)
        self._choice = None


class UniformRandomAgent:
    """Draws a fresh uniformly random deterministic policy table each episode."""

    def __init__(self, env: EpisodicLinearMDP, seed: int = 0, **_):
        self.env = env
        self.seed = seed
        self.table = None
        self.planned_value = float("nan")

    def begin_episode(self, k: int):
        rng = rng_stream(self.seed, k, POLICY)
        self.table = rng.integers(0, self.env.n_actions, size=(self.env.horizon, self.env.n_states))

    def policy_table(self) -> np.ndarray:
        return self.table

    def act(self, t: int, s: int) -> int:
        return int(self.table[t - 1, s])

    def observe(self, tr: Transition):
        pass

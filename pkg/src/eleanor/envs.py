"""Finite episodic MDPs with per-timestep linear feature maps.

Timesteps are 1-based in every public function (``t`` in ``1..H``); arrays are
stored 0-based, so ``env.rewards[t - 1]`` is the reward table at step ``t``.
Rewards live in [0, 1], hence the value of steps ``t..H`` lies in
``[0, H - t + 1]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .streams import as_generator

PROB_TOL = 1e-12
NORM_TOL = 1e-12

ENV_FIELDS = (
    "horizon",
    "n_states",
    "n_actions",
    "start_state",
    "feature_dims",
    "features",
    "transitions",
    "rewards",
    "ball_radii",
    "meta",
)


class EnvError(ValueError):
    pass


class Transition(NamedTuple):
    t: int
    s: int
    a: int
    reward: float
    s_next: int


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class EpisodicLinearMDP:
    """Immutable finite-horizon MDP with features ``features[t-1][s, a] in R^{d_t}``.

    ``meta`` carries generator metadata (JSON-compatible values only). The key
    ``reward_noise`` selects how :func:`sample_step` perturbs rewards:
    ``{"kind": "none"}`` (default), ``{"kind": "uniform", "scale": sigma}`` or
    ``{"kind": "bernoulli"}``.
    """

    horizon: int
    n_states: int
    n_actions: int
    start_state: int
    features: tuple
    transitions: np.ndarray
    rewards: np.ndarray
    ball_radii: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        H, S, A = self.horizon, self.n_states, self.n_actions
        if H < 1 or S < 1 or A < 1:
            raise EnvError("horizon, n_states and n_actions must be positive")
        if not 0 <= self.start_state < S:
            raise EnvError(f"start_state {self.start_state} out of range")
        feats = tuple(_frozen(f) for f in self.features)
        if len(feats) != H:
            raise EnvError(f"need {H} feature tables, got {len(feats)}")
        for t, f in enumerate(feats, start=1):
            if f.ndim != 3 or f.shape[:2] != (S, A) or f.shape[2] < 1:
                raise EnvError(f"feature table at t={t} has shape {f.shape}")
            if np.any(np.linalg.norm(f, axis=2) > 1.0 + NORM_TOL):
                raise EnvError(f"feature norm exceeds 1 at t={t}")
        p = _frozen(self.transitions)
        if p.shape != (H, S, A, S):
            raise EnvError(f"transitions must have shape {(H, S, A, S)}, got {p.shape}")
        if np.any(p < 0) or np.any(np.abs(p.sum(axis=3) - 1.0) > PROB_TOL):
            raise EnvError("transition rows must be nonnegative and sum to 1")
        r = _frozen(self.rewards)
        if r.shape != (H, S, A):
            raise EnvError(f"rewards must have shape {(H, S, A)}, got {r.shape}")
        if np.any(r < 0) or np.any(r > 1):
            raise EnvError("rewards must lie in [0, 1]")
        D = _frozen(self.ball_radii)
        if D.shape != (H,) or np.any(D <= 0):
            raise EnvError("ball_radii must be H positive numbers")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "transitions", p)
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "ball_radii", D)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def feature_dims(self) -> tuple:
        return tuple(int(f.shape[2]) for f in self.features)

    def phi(self, t: int) -> np.ndarray:
        """Feature table ``(S, A, d_t)`` at 1-based step ``t``."""
        self._check_t(t)
        return self.features[t - 1]

    def _check_t(self, t: int):
        if not 1 <= t <= self.horizon:
            raise EnvError(f"timestep {t} outside 1..{self.horizon}")


def sample_step(env: EpisodicLinearMDP, t: int, s: int, a: int, rng) -> Transition:
    """Draw one transition from ``(t, s, a)`` using the generator ``rng``."""
    env._check_t(t)
    if not 0 <= s < env.n_states or not 0 <= a < env.n_actions:
        raise EnvError(f"state/action ({s}, {a}) out of range")
    rng = as_generator(rng)
    mean = float(env.rewards[t - 1, s, a])
    noise = env.meta.get("reward_noise", {"kind": "none"})
    kind = noise.get("kind", "none")
    if kind == "none":
        reward = mean
    elif kind == "uniform":
        scale = float(noise["scale"])
        reward = mean + rng.uniform(-scale, scale)
    elif kind == "bernoulli":
        reward = float(rng.random() < mean)
    else:
        raise EnvError(f"unknown reward noise kind {kind!r}")
    s_next = int(rng.choice(env.n_states, p=env.transitions[t - 1, s, a]))
    return Transition(t, s, a, reward, s_next)


# ---------------------------------------------------------------------------
# generators


def _onehot_features(S: int, A: int) -> np.ndarray:
    return np.eye(S * A).reshape(S, A, S * A)


def make_tabular_onehot(S, A, H, reward_table, transition_table, start_state=0, meta=None):
    """Tabular MDP with indicator features of dimension ``S * A``."""
    rewards = np.asarray(reward_table, dtype=float)
    p = np.asarray(transition_table, dtype=float)
    if p.shape != (H, S, A, S):
        raise EnvError(f"transition table must have shape {(H, S, A, S)}")
    if np.any(np.abs(p.sum(axis=3) - 1.0) > PROB_TOL) or np.any(p < 0):
        raise EnvError("transition rows must be probability vectors")
    phi = _onehot_features(S, A)
    info = {"generator": "tabular_onehot", "linear_structure": True, "feature_scale": 1.0}
    info.update(meta or {})
    return EpisodicLinearMDP(
        horizon=H,
        n_states=S,
        n_actions=A,
        start_state=start_state,
        features=tuple(phi for _ in range(H)),
        transitions=p,
        rewards=rewards,
        ball_radii=np.array([math.sqrt(S * A) * (H - t + 1) for t in range(1, H + 1)]),
        meta=info,
    )


def _normalize_rows(p: np.ndarray) -> np.ndarray:
    return p / p.sum(axis=-1, keepdims=True)


def make_random_tabular(S, A, H, rng, concentration=0.5):
    """Tabular one-hot MDP with Dirichlet transitions and uniform rewards."""
    g = as_generator(rng)
    p = _normalize_rows(g.dirichlet(np.full(S, concentration), size=(H, S, A)))
    r = g.uniform(0.0, 1.0, size=(H, S, A))
    return make_tabular_onehot(S, A, H, r, p, meta={"generator": "tabular_random"})


def make_linear_mdp(d, S, A, H, rng, onehot=False, concentration=0.5):
    """Random low-rank MDP: ``p = phi @ mu`` and ``r = phi @ eta``.

    Features are points of the probability simplex over ``d`` anchors and the
    rows of ``mu[t]`` are ``d`` base distributions over next states, so every
    transition row is a convex combination of valid distributions. The first
    ``d`` state-action pairs are pinned to the anchors so that the features
    span ``R^d``. With ``onehot=True`` (requires ``d == S * A``) every pair is
    its own anchor and the result is a tabular MDP.
    """
    if d < 1 or d > S * A:
        raise EnvError(f"need 1 <= d <= S*A, got d={d}, S*A={S * A}")
    if onehot and d != S * A:
        raise EnvError("onehot features require d == S*A")
    g = as_generator(rng)
    feats = []
    for _ in range(H):
        if onehot:
            f = _onehot_features(S, A)
        else:
            flat = g.dirichlet(np.full(d, concentration), size=S * A)
            flat[:d] = np.eye(d)
            f = flat.reshape(S, A, d)
        feats.append(f)
    mu = _normalize_rows(g.dirichlet(np.full(S, concentration), size=(H, d)))
    eta = g.uniform(0.0, 1.0, size=(H, d))
    p = np.stack([_normalize_rows(np.clip(feats[t] @ mu[t], 0.0, None)) for t in range(H)])
    r = np.stack([np.clip(feats[t] @ eta[t], 0.0, 1.0) for t in range(H)])
    return EpisodicLinearMDP(
        horizon=H,
        n_states=S,
        n_actions=A,
        start_state=0,
        features=tuple(feats),
        transitions=p,
        rewards=r,
        ball_radii=np.array([math.sqrt(d) * (H - t + 1) for t in range(1, H + 1)]),
        meta={
            "generator": "linear_mdp",
            "linear_structure": True,
            "feature_scale": 1.0,
            "mu": mu.tolist(),
            "eta": eta.tolist(),
        },
    )


def make_misspecified(env: EpisodicLinearMDP, eps: float, rng) -> EpisodicLinearMDP:
    """Perturb every reward by an independent ``U[-eps, eps]`` draw.

    Rewards are clamped back into [0, 1]; the perturbation actually applied is
    recorded in ``meta["reward_perturbation"]``. ``eps == 0`` returns ``env``.
    """
    if eps < 0:
        raise EnvError("eps must be nonnegative")
    if not env.meta.get("linear_structure", False):
        raise EnvError("make_misspecified needs an env with recorded linear structure")
    if eps == 0:
        return env
    g = as_generator(rng)
    bump = g.uniform(-eps, eps, size=env.rewards.shape)
    r = np.clip(env.rewards + bump, 0.0, 1.0)
    meta = dict(env.meta)
    meta.update(
        {
            "linear_structure": False,
            "base_generator": env.meta.get("generator"),
            "generator": "misspecified",
            "eps": float(eps),
            "reward_perturbation": (r - env.rewards).tolist(),
        }
    )
    return EpisodicLinearMDP(
        horizon=env.horizon,
        n_states=env.n_states,
        n_actions=env.n_actions,
        start_state=env.start_state,
        features=env.features,
        transitions=env.transitions,
        rewards=r,
        ball_radii=env.ball_radii,
        meta=meta,
    )


def sign_patterns(d: int) -> np.ndarray:
    """All ``2**d`` sign vectors; bit ``j`` of the action index set means ``-1`` in slot ``j``."""
    idx = np.arange(2**d)[:, None]
    bits = (idx >> np.arange(d)[None, :]) & 1
    return 1.0 - 2.0 * bits


def make_hard_bandit(d, eps, gap, bumped_action=None):
    """One-step linear bandit over sign-vector arms with one bumped arm.

    Arm ``a`` has sign vector ``s(a)`` and mean
    ``0.5 + gap * s_1(a) / sqrt(d) + eps * [a == bumped]``. The features are
    ``(1, s(a) / sqrt(d)) / sqrt(2)``: the leading constant coordinate makes
    the 0.5 offset representable, so ``eps = 0`` is exactly realizable. The
    bumped arm defaults to the all-minus arm, which is the worst arm of the
    linear part. Rewards are Bernoulli.

    This is a small demonstrative instance, not the adversarial family used
    in minimax lower-bound proofs.
    """
    if d < 2:
        raise EnvError("make_hard_bandit needs d >= 2")
    if d > 12:
        raise EnvError("d too large for arm enumeration (d > 12)")
    if eps < 0 or gap <= 0:
        raise EnvError("need eps >= 0 and gap > 0")
    A = 2**d
    signs = sign_patterns(d)
    bumped = A - 1 if bumped_action is None else int(bumped_action)
    feats = np.concatenate([np.ones((A, 1)), signs / math.sqrt(d)], axis=1) / math.sqrt(2)
    mean = 0.5 + gap * signs[:, 0] / math.sqrt(d)
    mean[bumped] += eps
    mean = np.clip(mean, 0.0, 1.0)
    return EpisodicLinearMDP(
        horizon=1,
        n_states=1,
        n_actions=A,
        start_state=0,
        features=(feats[None, :, :],),
        transitions=np.ones((1, 1, A, 1)),
        rewards=mean[None, None, :],
        ball_radii=np.array([math.sqrt(d + 1)]),
        meta={
            "generator": "hard_bandit",
            "label": "demonstrative stand-in, not the minimax lower-bound construction",
            "linear_structure": eps == 0,
            "d": d,
            "eps": float(eps),
            "gap": float(gap),
            "bumped_action": bumped,
            "theta_star": [math.sqrt(2) * 0.5, math.sqrt(2) * gap] + [0.0] * (d - 1),
            "reward_noise": {"kind": "bernoulli"},
        },
    )


# ---------------------------------------------------------------------------
# canonical text format


def env_to_dict(env: EpisodicLinearMDP) -> dict:
    return {
        "horizon": env.horizon,
        "n_states": env.n_states,
        "n_actions": env.n_actions,
        "start_state": env.start_state,
        "feature_dims": list(env.feature_dims),
        "features": [f.tolist() for f in env.features],
        "transitions": env.transitions.tolist(),
        "rewards": env.rewards.tolist(),
        "ball_radii": env.ball_radii.tolist(),
        "meta": env.meta,
    }


def env_from_dict(doc: dict) -> EpisodicLinearMDP:
    missing = [k for k in ENV_FIELDS if k not in doc]
    unknown = [k for k in doc if k not in ENV_FIELDS]
    if missing or unknown:
        raise EnvError(f"env document: missing {missing}, unknown {unknown}")
    env = EpisodicLinearMDP(
        horizon=int(doc["horizon"]),
        n_states=int(doc["n_states"]),
        n_actions=int(doc["n_actions"]),
        start_state=int(doc["start_state"]),
        features=tuple(np.array(f, dtype=float) for f in doc["features"]),
        transitions=np.array(doc["transitions"], dtype=float),
        rewards=np.array(doc["rewards"], dtype=float),
        ball_radii=np.array(doc["ball_radii"], dtype=float),
        meta=doc["meta"],
    )
    if list(env.feature_dims) != list(doc["feature_dims"]):
        raise EnvError("feature_dims disagree with the feature tables")
    return env


def dumps_env(env: EpisodicLinearMDP) -> str:
    """Canonical JSON text: one top-level field per line, fixed key order."""
    doc = env_to_dict(env)
    lines = [f"  {json.dumps(k)}: {json.dumps(doc[k], sort_keys=True)}" for k in ENV_FIELDS]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def loads_env(text: str) -> EpisodicLinearMDP:
    return env_from_dict(json.loads(text))


def save_env(env: EpisodicLinearMDP, path) -> None:
    Path(path).write_text(dumps_env(env))


def load_env(path) -> EpisodicLinearMDP:
    return loads_env(Path(path).read_text())

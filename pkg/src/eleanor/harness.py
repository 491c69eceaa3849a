"""Experiment orchestration: configs, seeded replications, exact regret, CSV output.

Regret is always computed by exact policy evaluation against the optimal
start value, never by Monte Carlo rollouts.
"""

from __future__ import annotations

import copy
import csv
import inspect
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import envs as E
from .agents import (
    EleanorAgent,
    GramState,
    MisLinUCBAgent,
    PlannerBudget,
    RadiusConfig,
    UniformRandomAgent,
    eleanor_plan,
    grid_oracle_plan,
    radius,
)
from .oracle import evaluate_policy, exact_dp
from .streams import ENV, TRANSITION, rng_stream


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


# ---------------------------------------------------------------------------
# registries


def _bandit(means, noise=None):
    means = np.asarray(means, dtype=float)
    A = len(means)
    meta = {"generator": "bandit"}
    if noise:
        meta["reward_noise"] = noise
    return E.make_tabular_onehot(1, A, 1, means[None, None, :], np.ones((1, 1, A, 1)), meta=meta)


def _tabular(S, A, H, rewards, transitions, start_state=0):
    return E.make_tabular_onehot(S, A, H, rewards, transitions, start_state=start_state)


ENV_BUILDERS = {
    "tabular_random": (lambda S, A, H, seed, concentration=0.5: E.make_random_tabular(S, A, H, rng_stream(seed, ENV), concentration), True),
    "tabular": (_tabular, False),
    "bandit": (_bandit, False),
    "linear_mdp": (lambda d, S, A, H, seed: E.make_linear_mdp(d, S, A, H, rng_stream(seed, ENV)), True),
    "misspecified_linear": (
        lambda d, S, A, H, seed, eps, perturb_seed=None: E.make_misspecified(
            E.make_linear_mdp(d, S, A, H, rng_stream(seed, ENV)),
            eps,
            rng_stream(seed if perturb_seed is None else perturb_seed, ENV, 1),
        ),
        True,
    ),
    "hard_bandit": (lambda d, eps, gap, bumped_action=None: E.make_hard_bandit(d, eps, gap, bumped_action), False),
}

AGENTS = ("eleanor", "greedy_lsvi", "uniform_random", "mislinucb")


def build_env(spec: dict, replication_seed: int = 0) -> E.EpisodicLinearMDP:
    """Build from ``{"path": ...}`` or ``{"name": ..., "params": {...}}``.

    Random generators without an explicit ``seed`` parameter are keyed by the
    replication seed.
    """
    if "path" in spec:
        return E.load_env(spec["path"])
    name = spec.get("name")
    if name not in ENV_BUILDERS:
        raise ConfigError(f"env.name: unknown environment {name!r}; known: {sorted(ENV_BUILDERS)}")
    builder, seeded = ENV_BUILDERS[name]
    params = dict(spec.get("params", {}))
    if seeded and "seed" not in params:
        params["seed"] = replication_seed
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConfigError(f"env.params: {exc}") from None


def build_agent(spec: dict, env, seed: int, k_max: int):
    name = spec["name"]
    cfg = RadiusConfig(**spec.get("radius", {}))
    budget = PlannerBudget(**spec.get("planner", {}))
    if name == "eleanor":
        return EleanorAgent(env, cfg, k_max, seed, budget)
    if name == "greedy_lsvi":
        return EleanorAgent(env, cfg, k_max, seed, budget, zero_radius=True)
    if name == "uniform_random":
        return UniformRandomAgent(env, seed)
    if name == "mislinucb":
        return MisLinUCBAgent(env, cfg, k_max, seed)
    raise ConfigError(f"agent.name: unknown agent {name!r}; known: {list(AGENTS)}")


# ---------------------------------------------------------------------------
# config


TOP_KEYS = {"env", "agent", "episodes", "seeds", "k_max", "output", "workers", "fit_window", "grid", "grid_mode", "oracle_check"}
AGENT_KEYS = {"name", "radius", "planner"}
ORACLE_KEYS = {"instances", "resolution", "tolerance", "min_pass", "seed", "max_samples"}


@dataclass(frozen=True)
class ExperimentConfig:
    env: dict
    agent: dict
    episodes: int
    seeds: tuple
    k_max: int
    output: str | None = None
    workers: int = 1
    fit_window: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "env": self.env,
            "agent": self.agent,
            "episodes": self.episodes,
            "seeds": list(self.seeds),
            "k_max": self.k_max,
            "output": self.output,
            "workers": self.workers,
            "fit_window": list(self.fit_window) if self.fit_window else None,
        }


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _check_keys(d, allowed, where):
    _require(isinstance(d, dict), f"{where}: expected an object")
    unknown = sorted(set(d) - set(allowed))
    _require(not unknown, f"{where}: unknown key(s) {unknown}")


def parse_config(doc: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Validate a config document; unknown keys anywhere are errors."""
    doc = copy.deepcopy(doc)
    for k, v in (overrides or {}).items():
        if v is None:
            doc.pop(k, None)
        else:
            doc[k] = v
    _check_keys(doc, TOP_KEYS, "config")
    for key in ("env", "agent", "episodes", "seeds"):
        _require(key in doc, f"config: missing required key {key!r}")
    env = doc["env"]
    _check_keys(env, {"name", "params", "path"}, "env")
    _require(("path" in env) != ("name" in env), "env: give exactly one of 'name' or 'path'")
    if "name" in env:
        _require(env["name"] in ENV_BUILDERS, f"env.name: unknown environment {env['name']!r}")
        params = env.get("params", {})
        _check_keys(params, inspect.signature(ENV_BUILDERS[env["name"]][0]).parameters, f"env.params ({env['name']})")
    agent = doc["agent"]
    _check_keys(agent, AGENT_KEYS, "agent")
    _require(agent.get("name") in AGENTS, f"agent.name: unknown agent {agent.get('name')!r}")
    _check_keys(agent.get("radius", {}), set(RadiusConfig.__dataclass_fields__), "agent.radius")
    _check_keys(agent.get("planner", {}), set(PlannerBudget.__dataclass_fields__), "agent.planner")
    try:
        RadiusConfig(**agent.get("radius", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"agent.radius: {exc}") from None
    K = doc["episodes"]
    _require(isinstance(K, int) and K >= 1, "episodes: must be an integer >= 1")
    seeds = doc["seeds"]
    if isinstance(seeds, int):
        seeds = [seeds]
    _require(isinstance(seeds, list) and seeds and all(isinstance(s, int) and s >= 0 for s in seeds),
             "seeds: must be a nonempty list of nonnegative integers")
    k_max = doc.get("k_max") or K
    _require(isinstance(k_max, int) and k_max >= K, "k_max: must be an integer >= episodes")
    workers = doc.get("workers", 1)
    _require(isinstance(workers, int) and workers >= 1, "workers: must be a positive integer")
    window = doc.get("fit_window")
    if window is not None:
        _require(isinstance(window, list) and len(window) == 2 and 1 <= window[0] < window[1] <= K,
                 "fit_window: must be [lo, hi] with 1 <= lo < hi <= episodes")
        window = tuple(window)
    return ExperimentConfig(env, agent, K, tuple(seeds), k_max, doc.get("output"), workers, window)


def load_config_text(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _require(isinstance(doc, dict), "config: top level must be an object")
    return doc


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return load_config_text(text)


# ---------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class RegretCurve:
    seed: int
    per_episode: np.ndarray
    cumulative: np.ndarray
    planned: np.ndarray
    vstar: float


def run_seed(cfg: ExperimentConfig, seed: int) -> RegretCurve:
    env = build_env(cfg.env, seed)
    vstar = exact_dp(env).v1(env.start_state)
    agent = build_agent(cfg.agent, env, seed, cfg.k_max)
    K = cfg.episodes
    regret = np.zeros(K)
    planned = np.zeros(K)
    for k in range(1, K + 1):
        agent.begin_episode(k)
        policy = agent.policy_table()
        regret[k - 1] = vstar - evaluate_policy(env, policy)
        planned[k - 1] = agent.planned_value
        s = env.start_state
        for t in range(1, env.horizon + 1):
            a = agent.act(t, s)
            tr = E.sample_step(env, t, s, a, rng_stream(seed, k, t, TRANSITION))
            agent.observe(tr)
            s = tr.s_next
    return RegretCurve(seed, regret, np.cumsum(regret), planned, vstar)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def curve_csv(curve: RegretCurve) -> str:
    buf = io.StringIO()
    buf.write("episode,per_episode_regret,cumulative_regret,planned_value,vstar\n")
    for k in range(len(curve.per_episode)):
        buf.write(f"{k + 1},{_fmt(curve.per_episode[k])},{_fmt(curve.cumulative[k])},{_fmt(curve.planned[k])},{_fmt(curve.vstar)}\n")
    return buf.getvalue()


def aggregate(curves) -> dict:
    cum = np.stack([c.cumulative for c in curves])
    return {
        "mean_cum": cum.mean(axis=0),
        "regret_p10": np.percentile(cum, 10, axis=0),
        "regret_p90": np.percentile(cum, 90, axis=0),
        "n_seeds": len(curves),
    }


def aggregate_csv(curves) -> str:
    agg = aggregate(curves)
    buf = io.StringIO()
    buf.write("episode,mean_cum,regret_p10,regret_p90,n_seeds\n")
    for k in range(len(agg["mean_cum"])):
        buf.write(f"{k + 1},{_fmt(agg['mean_cum'][k])},{_fmt(agg['regret_p10'][k])},{_fmt(agg['regret_p90'][k])},{agg['n_seeds']}\n")
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> list:
    """Run every seed and write ``seed_<n>.csv`` files plus ``aggregate.csv``.

    With ``workers > 1`` seeds run in separate processes; results are
    collected in seed order, so output does not depend on scheduling.
    """
    if cfg.workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            curves = list(pool.map(run_seed, [cfg] * len(cfg.seeds), cfg.seeds))
    else:
        curves = [run_seed(cfg, s) for s in cfg.seeds]
    out_dir = out_dir if out_dir is not None else cfg.output
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for c in curves:
            (out / f"seed_{c.seed}.csv").write_text(curve_csv(c))
        (out / "aggregate.csv").write_text(aggregate_csv(curves))
    return curves


def read_curve_csv(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


# ---------------------------------------------------------------------------
# scaling fits


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    ok: bool
    message: str = ""


def fit_scaling(cumulative, window=None) -> ScalingFit:
    """OLS slope of ``log R_k`` against ``log k`` over 1-based episodes ``window = (lo, hi)``.

    The default window is ``[K // 2, K]``. A window containing nonpositive
    regret yields ``ok=False`` and NaN coefficients instead of raising.
    """
    R = np.asarray(cumulative, dtype=float)
    K = len(R)
    lo, hi = window if window is not None else (max(1, K // 2), K)
    if not (1 <= lo < hi <= K):
        return ScalingFit(math.nan, math.nan, False, f"window {lo}..{hi} outside 1..{K}")
    ks = np.arange(lo, hi + 1)
    y = R[lo - 1 : hi]
    if np.any(y <= 0):
        return ScalingFit(math.nan, math.nan, False, "nonpositive cumulative regret in window")
    x = np.log(ks)
    X = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(X, np.log(y), rcond=None)
    return ScalingFit(float(slope), float(intercept), True)


# ---------------------------------------------------------------------------
# sweeps


def _set_path(doc: dict, path: str, value):
    keys = path.split(".")
    node = doc
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value


def sweep_cells(doc: dict) -> list:
    grid = doc.get("grid")
    _require(isinstance(grid, dict) and grid, "grid: must be a nonempty object of path -> list of values")
    mode = doc.get("grid_mode", "product")
    _require(mode in ("product", "zip"), "grid_mode: must be 'product' or 'zip'")
    paths = list(grid)
    for p in paths:
        _require(isinstance(grid[p], list) and grid[p], f"grid.{p}: must be a nonempty list")
    if mode == "zip":
        n = {len(grid[p]) for p in paths}
        _require(len(n) == 1, "grid: zip mode needs lists of equal length")
        combos = list(zip(*(grid[p] for p in paths)))
    else:
        combos = list(itertools.product(*(grid[p] for p in paths)))
    return [dict(zip(paths, c)) for c in combos]


def sweep(doc: dict, out_dir, overrides: dict | None = None) -> list:
    """Run one experiment per grid cell and write ``sweep.csv``.

    A failing cell records its error message and does not stop the others.
    """
    cells = sweep_cells(doc)
    base = {k: v for k, v in doc.items() if k not in ("grid", "grid_mode")}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, cell in enumerate(cells):
        row = {"cell": i, **{p: json.dumps(v) for p, v in cell.items()}}
        try:
            cell_doc = copy.deepcopy(base)
            for p, v in cell.items():
                _set_path(cell_doc, p, v)
            cfg = parse_config(cell_doc, overrides)
            curves = run_experiment(cfg, out / f"cell_{i}")
            finals = np.array([c.cumulative[-1] for c in curves])
            fit = fit_scaling(aggregate(curves)["mean_cum"], cfg.fit_window)
            row.update(
                final_cum_mean=_fmt(finals.mean()),
                final_cum_std=_fmt(finals.std(ddof=1) if len(finals) > 1 else 0.0),
                n_seeds=len(finals),
                slope=_fmt(fit.slope),
                intercept=_fmt(fit.intercept),
                error="" if fit.ok else fit.message,
            )
        except Exception as exc:  # noqa: BLE001 - isolate cells
            row.update(final_cum_mean="nan", final_cum_std="nan", n_seeds=0, slope="nan", intercept="nan",
                       error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    fields = ["cell", *cells[0].keys(), "final_cum_mean", "final_cum_std", "n_seeds", "slope", "intercept", "error"]
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return rows


# ---------------------------------------------------------------------------
# planner vs brute-force oracle


def planning_instance(seed: int, max_samples: int = 50):
    """Random small planning problem: ``H <= 3``, ``d_t <= 2``, up to ``max_samples`` samples per step.

    Returns ``(env, grams, cfg, k, k_max)``; radii follow from
    :func:`~eleanor.agents.radius` with randomly drawn constants.
    """
    g = rng_stream(seed, ENV, 7)
    H = int(g.integers(1, 4))
    S = int(g.integers(2, 4))
    A = int(g.integers(2, 4))
    dims = [int(g.integers(1, 3)) for _ in range(H)]
    feats = []
    for d in dims:
        f = g.standard_normal((S, A, d))
        f /= np.maximum(1.0, np.linalg.norm(f, axis=2, keepdims=True))
        feats.append(f)
    p = g.dirichlet(np.ones(S), size=(H, S, A))
    r = g.random((H, S, A))
    env = E.EpisodicLinearMDP(H, S, A, 0, tuple(feats), p, r,
                              np.array([math.sqrt(d) * (H - t) for t, d in enumerate(dims)]), {"generator": "planning_instance"})
    n = int(g.integers(0, max_samples + 1))
    grams = [GramState(d, 1.0, S) for d in dims]
    for t in range(1, H + 1):
        for _ in range(n):
            s, a = int(g.integers(S)), int(g.integers(A))
            grams[t - 1].add(E.sample_step(env, t, s, a, g), env.features[t - 1][s, a])
    cfg = RadiusConfig(lam=1.0, c1=float(g.uniform(0, 0.3)), c2=float(g.uniform(0, 0.3)), c3=0.0)
    return env, grams, cfg, n + 1, 1000


@dataclass(frozen=True)
class OracleRow:
    instance: int
    horizon: int
    dims: tuple
    planner: float
    oracle: float
    passed: bool


def oracle_check(instances=100, resolution=33, tolerance=1e-3, seed=0, max_samples=50, budget=PlannerBudget()):
    rows = []
    for i in range(instances):
        env, grams, cfg, k, k_max = planning_instance(seed * 100_003 + i, max_samples)
        plan = eleanor_plan(grams, cfg, env, k, k_max, rng=rng_stream(seed, i, 3), budget=budget)
        ref = grid_oracle_plan(grams, cfg, env, k, k_max, resolution)
        rows.append(OracleRow(i, env.horizon, env.feature_dims, plan.value, ref, abs(plan.value - ref) <= tolerance))
    return rows


def parse_oracle_config(doc: dict, seed=None) -> dict:
    _check_keys(doc, TOP_KEYS, "config")
    _require("oracle_check" in doc, "config: missing 'oracle_check' section")
    oc = doc["oracle_check"]
    _check_keys(oc, ORACLE_KEYS, "oracle_check")
    out = {"instances": 100, "resolution": 33, "tolerance": 1e-3, "min_pass": 95, "seed": 0, "max_samples": 50}
    out.update(oc)
    if seed is not None:
        out["seed"] = seed
    for key in ("instances", "resolution", "min_pass", "seed", "max_samples"):
        _require(isinstance(out[key], int) and out[key] >= 0, f"oracle_check.{key}: must be a nonnegative integer")
    _require(out["resolution"] >= 2, "oracle_check.resolution: must be >= 2")
    return out


# ---------------------------------------------------------------------------
# generator specs for the ibe command


def parse_generator_spec(text: str) -> dict:
    """``"name:key=value,key=value"`` -> env spec dict (values parsed as JSON when possible)."""
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            _require(eq == "=" and key, f"generator spec: malformed item {item!r}")
            try:
                params[key.strip()] = json.loads(val)
            except json.JSONDecodeError:
                params[key.strip()] = val
    _require(name in ENV_BUILDERS, f"generator spec: unknown environment {name!r}")
    return {"name": name, "params": params}


def radius_table(cfg: RadiusConfig, env, k: int, k_max: int) -> list:
    return [radius(cfg, t, env.feature_dims[t - 1], k, horizon=env.horizon, ball_radius=float(env.ball_radii[t - 1]), k_max=k_max)
            for t in range(1, env.horizon + 1)]

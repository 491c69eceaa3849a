import csv
import json

import numpy as np
import pytest

from eleanor import harness as Hn
from eleanor.envs import make_random_tabular, save_env

BASE = {
    "env": {"name": "tabular_random", "params": {"S": 2, "A": 2, "H": 2, "seed": 0}},
    "agent": {"name": "eleanor", "radius": {"c1": 0.2, "c2": 0.2}},
    "episodes": 20,
    "seeds": [0, 1, 2],
}


def test_fit_exact_power_laws():
    k = np.arange(1, 1001, dtype=float)
    assert Hn.fit_scaling(np.sqrt(k)).slope == pytest.approx(0.5, abs=1e-9)
    assert Hn.fit_scaling(k).slope == pytest.approx(1.0, abs=1e-9)


def test_fit_noisy_power_law():
    g = np.random.default_rng(0)
    k = np.arange(1, 5001, dtype=float)
    R = 3 * k**0.7 * (1 + g.uniform(-0.01, 0.01, k.size))
    assert 0.68 <= Hn.fit_scaling(R).slope <= 0.72


def test_fit_flags_nonpositive():
    res = Hn.fit_scaling(np.zeros(10))
    assert not res.ok and np.isnan(res.slope)
    assert not Hn.fit_scaling(np.ones(10), (5, 20)).ok


def test_fit_intercept():
    k = np.arange(1, 101, dtype=float)
    res = Hn.fit_scaling(4 * k**0.5, (10, 100))
    assert res.intercept == pytest.approx(np.log(4), abs=1e-9)


def test_parse_rejects_unknown_keys():
    for bad in (
        {**BASE, "episods": 3},
        {**BASE, "agent": {"name": "eleanor", "radius": {"c4": 1}}},
        {**BASE, "agent": {"name": "eleanor", "planer": {}}},
        {**BASE, "env": {"name": "tabular_random", "params": {"S": 2, "A": 2, "H": 2, "sed": 0}}},
    ):
        with pytest.raises(Hn.ConfigError):
            Hn.parse_config(bad)


def test_parse_rejects_invalid_values():
    for bad in (
        {**BASE, "episodes": 0},
        {**BASE, "seeds": []},
        {**BASE, "agent": {"name": "nope"}},
        {**BASE, "env": {"name": "nope"}},
        {**BASE, "k_max": 5},
    ):
        with pytest.raises(Hn.ConfigError):
            Hn.parse_config(bad)


def test_json_syntax_error_has_location():
    with pytest.raises(Hn.ConfigError, match="line 2"):
        Hn.load_config_text('{\n "env": }')


def test_single_row_bandit(tmp_path):
    cfg = Hn.parse_config({
        "env": {"name": "bandit", "params": {"means": [0.7]}},
        "agent": {"name": "greedy_lsvi"},
        "episodes": 1,
        "seeds": [0],
    })
    Hn.run_experiment(cfg, tmp_path)
    rows = list(csv.DictReader(open(tmp_path / "seed_0.csv")))
    assert len(rows) == 1
    assert rows[0]["per_episode_regret"] == rows[0]["cumulative_regret"]


def test_outputs_bitwise_reproducible(tmp_path):
    cfg = Hn.parse_config(BASE)
    Hn.run_experiment(cfg, tmp_path / "a")
    Hn.run_experiment(cfg, tmp_path / "b")
    for name in ("seed_0.csv", "seed_1.csv", "seed_2.csv", "aggregate.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_matches_serial(tmp_path):
    Hn.run_experiment(Hn.parse_config(BASE), tmp_path / "s")
    Hn.run_experiment(Hn.parse_config({**BASE, "workers": 2}), tmp_path / "p")
    for name in ("seed_0.csv", "seed_2.csv", "aggregate.csv"):
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()


def test_curve_invariants_and_aggregate_recomputable(tmp_path):
    cfg = Hn.parse_config(BASE)
    Hn.run_experiment(cfg, tmp_path)
    cums = []
    for s in cfg.seeds:
        c = Hn.read_curve_csv(tmp_path / f"seed_{s}.csv")
        assert np.all(c["per_episode_regret"] >= -1e-9)
        assert np.all(np.diff(c["cumulative_regret"]) >= -1e-12)
        cums.append(c["cumulative_regret"])
    agg = Hn.read_curve_csv(tmp_path / "aggregate.csv")
    cums = np.array(cums)
    np.testing.assert_array_equal(agg["mean_cum"], cums.mean(axis=0))
    np.testing.assert_array_equal(agg["regret_p10"], np.percentile(cums, 10, axis=0))
    np.testing.assert_array_equal(agg["regret_p90"], np.percentile(cums, 90, axis=0))


def test_env_from_path(tmp_path):
    env = make_random_tabular(2, 2, 2, 4)
    save_env(env, tmp_path / "env.json")
    cfg = Hn.parse_config({**BASE, "env": {"path": str(tmp_path / "env.json")}, "seeds": [0]})
    curve = Hn.run_experiment(cfg)[0]
    assert len(curve.cumulative) == 20


def test_sweep_degenerate_grid_matches_run(tmp_path):
    doc = {**BASE, "grid": {"agent.radius.c1": [0.2]}}
    rows = Hn.sweep(doc, tmp_path)
    curves = Hn.run_experiment(Hn.parse_config(BASE))
    fit = Hn.fit_scaling(Hn.aggregate(curves)["mean_cum"])
    finals = np.array([c.cumulative[-1] for c in curves])
    assert float(rows[0]["slope"]) == fit.slope
    assert float(rows[0]["final_cum_mean"]) == finals.mean()
    assert float(rows[0]["final_cum_std"]) == finals.std(ddof=1)


def test_sweep_isolates_bad_cell(tmp_path):
    doc = {**BASE, "seeds": [0], "grid": {"agent.radius.c1": [0.2, -1.0, 0.5]}}
    rows = Hn.sweep(doc, tmp_path)
    assert rows[1]["error"] and rows[1]["n_seeds"] == 0
    assert not rows[0]["error"] and not rows[2]["error"]
    text = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(text) == 4


def test_sweep_zip_mode():
    doc = {**BASE, "grid": {"env.params.seed": [0, 1], "agent.radius.c1": [0.1, 0.2]}, "grid_mode": "zip"}
    assert Hn.sweep_cells(doc) == [{"env.params.seed": 0, "agent.radius.c1": 0.1},
                                   {"env.params.seed": 1, "agent.radius.c1": 0.2}]
    assert len(Hn.sweep_cells({**doc, "grid_mode": "product"})) == 4


def test_generator_spec():
    spec = Hn.parse_generator_spec("linear_mdp:d=3,S=6,A=2,H=3,seed=7")
    assert spec == {"name": "linear_mdp", "params": {"d": 3, "S": 6, "A": 2, "H": 3, "seed": 7}}
    with pytest.raises(Hn.ConfigError):
        Hn.parse_generator_spec("nothing:d=1")


def test_oracle_config_defaults():
    oc = Hn.parse_oracle_config({"oracle_check": {"instances": 3}}, seed=4)
    assert oc["instances"] == 3 and oc["seed"] == 4 and oc["resolution"] == 33
    with pytest.raises(Hn.ConfigError):
        Hn.parse_oracle_config({"oracle_check": {"instancez": 3}})

import json
import subprocess
import sys

import pytest

from eleanor.cli import main

CFG = {
    "env": {"name": "tabular_random", "params": {"S": 2, "A": 2, "H": 2, "seed": 0}},
    "agent": {"name": "eleanor", "radius": {"c1": 0.2, "c2": 0.2}},
    "episodes": 10,
    "seeds": [0, 1],
}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_run_and_overrides(tmp_path, capsys):
    cfg = write(tmp_path, CFG)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o"), "--seed", "5", "--episodes", "4"]) == 0
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["aggregate.csv", "seed_5.csv"]
    assert len((tmp_path / "o" / "seed_5.csv").read_text().splitlines()) == 5


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, {**CFG, "bogus": 1})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "bogus" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 2


def test_runtime_error_exit_code(tmp_path, capsys):
    # horizon-2 env with the one-step agent: valid config, fails while running
    cfg = write(tmp_path, {**CFG, "agent": {"name": "mislinucb"}})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_sweep(tmp_path, capsys):
    cfg = write(tmp_path, {**CFG, "grid": {"agent.radius.c1": [0.1, 0.3]}})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    assert len((tmp_path / "s" / "sweep.csv").read_text().splitlines()) == 3


def test_ibe_generator_spec(capsys):
    assert main(["ibe", "--env", "tabular_random:S=2,A=2,H=2,seed=0", "--budget", "8"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "t,ihat,inner_gap,budget"
    assert len(lines) == 3
    assert all(float(line.split(",")[1]) <= 1e-6 for line in lines[1:])


def test_ibe_bad_spec(capsys):
    assert main(["ibe", "--env", "nope:x=1"]) == 2


def test_oracle_check_small(tmp_path, capsys):
    cfg = write(tmp_path, {"oracle_check": {"instances": 3, "min_pass": 3}})
    assert main(["oracle-check", "--config", cfg]) == 0
    assert "PASS: 3/3" in capsys.readouterr().out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "eleanor", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "oracle-check" in out.stdout

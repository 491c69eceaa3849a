"""Command line entry point: ``eleanor {run,sweep,ibe,oracle-check}``.

Exit status is 0 on success, 2 for configuration errors and 1 for runtime
failures (including a failed oracle check).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness as Hn
from .envs import EnvError
from .oracle import ibe_profile


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eleanor", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, help="replace the config's seed list with this single seed")
        sp.add_argument("--episodes", type=int, help="override the number of episodes")

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (default: config 'output')")
    common(run)

    sw = sub.add_parser("sweep", help="run a grid of experiment configs")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", required=True)
    common(sw)

    ibe = sub.add_parser("ibe", help="estimate the inherent Bellman error profile")
    ibe.add_argument("--env", required=True, help="env JSON path or generator spec such as linear_mdp:d=3,S=6,A=2,H=3,seed=7")
    ibe.add_argument("--budget", type=int, default=512)
    ibe.add_argument("--seed", type=int, default=0)

    oc = sub.add_parser("oracle-check", help="compare the planner with a brute-force grid oracle")
    oc.add_argument("--config", help="optional JSON config with an 'oracle_check' section")
    oc.add_argument("--seed", type=int)
    oc.add_argument("--instances", type=int)
    return p


def _overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["seeds"] = [args.seed]
    if args.episodes is not None:
        out["episodes"] = args.episodes
        out["k_max"] = None
    return out


def _cmd_run(args) -> int:
    doc = Hn.load_config(args.config)
    cfg = Hn.parse_config(doc, _overrides(args))
    out = args.out or cfg.output
    if out is None:
        raise Hn.ConfigError("output: no output directory (set 'output' or pass --out)")
    curves = Hn.run_experiment(cfg, out)
    fit = Hn.fit_scaling(Hn.aggregate(curves)["mean_cum"], cfg.fit_window)
    mean_final = sum(c.cumulative[-1] for c in curves) / len(curves)
    print(f"seeds={len(curves)} episodes={cfg.episodes} mean_final_regret={mean_final:.6g} slope={fit.slope:.4f}")
    print(f"wrote {Path(out) / 'aggregate.csv'}")
    return 0


def _cmd_sweep(args) -> int:
    doc = Hn.load_config(args.config)
    Hn.sweep_cells(doc)
    rows = Hn.sweep(doc, args.out, _overrides(args))
    failed = [r for r in rows if r["error"] and r["n_seeds"] == 0]
    print(f"cells={len(rows)} failed={len(failed)}")
    print(f"wrote {Path(args.out) / 'sweep.csv'}")
    return 1 if failed else 0


def _cmd_ibe(args) -> int:
    from .envs import load_env

    if Path(args.env).exists():
        env = load_env(args.env)
    else:
        env = Hn.build_env(Hn.parse_generator_spec(args.env))
    print("t,ihat,inner_gap,budget")
    for e in ibe_profile(env, args.budget, args.seed):
        print(f"{e.t},{e.ihat:.17g},{e.inner_gap:.17g},{e.budget}")
    return 0


def _cmd_oracle(args) -> int:
    doc = Hn.load_config(args.config) if args.config else {"oracle_check": {}}
    oc = Hn.parse_oracle_config(doc, args.seed)
    if args.instances is not None:
        oc["instances"] = args.instances
    rows = Hn.oracle_check(oc["instances"], oc["resolution"], oc["tolerance"], oc["seed"], oc["max_samples"])
    print("instance,H,dims,planner,oracle,abs_diff,result")
    for r in rows:
        dims = "x".join(map(str, r.dims))
        print(f"{r.instance},{r.horizon},{dims},{r.planner:.10f},{r.oracle:.10f},{abs(r.planner - r.oracle):.3e},{'pass' if r.passed else 'FAIL'}")
    n = sum(r.passed for r in rows)
    need = min(oc["min_pass"], len(rows))
    ok = n >= need
    print(f"{'PASS' if ok else 'FAIL'}: {n}/{len(rows)} within {oc['tolerance']:g} (need {need})")
    return 0 if ok else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "ibe": _cmd_ibe, "oracle-check": _cmd_oracle}[args.command]
    try:
        return handler(args)
    except (Hn.ConfigError, EnvError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line experiment runner."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, kernels
from .errors import InvariantViolation, ParameterError
from .xlab.report import aggregates_from_csv, rows_to_csv, summary_json
from .xlab.scenarios import SCENARIOS, ScenarioConfig, run_scenario, worker_count


def build_parser():
    p = argparse.ArgumentParser(prog="marginlab", description="Run margin-bound experiments.")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--u", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--theta", type=float, default=0.02)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--c-exp", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path, one row per trial")
    p.add_argument("--summary", help="JSON summary path (default: OUT with .json suffix)")
    p.add_argument("--n-nominal", type=float, default=2.0,
                   help="nominal hypothesis-class size N from which u and d derive")
    p.add_argument("--m-ratio", type=float, default=10.0, help="theorem1 requires m >= M_RATIO * u")
    p.add_argument("--learner-rounds", type=int, help="theorem1 AdaBoost rounds (default: k)")
    p.add_argument("--labeling-mode", choices=("uniform", "sparsity-uniform"), default="uniform")
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--bias-alpha", type=float, default=0.1)
    p.add_argument("--timing", action="store_true", help="record runtime_ms (breaks byte-identical reruns)")
    return p


def config_from_args(a):
    return ScenarioConfig(
        scenario=a.scenario, u=a.u, d=a.d, m=a.m, theta=a.theta, tau=a.tau, delta=a.delta,
        c_exp=a.c_exp, trials=a.trials, seed=a.seed, out_path=a.out, n_nominal=a.n_nominal,
        m_ratio=a.m_ratio, learner_rounds=a.learner_rounds, labeling_mode=a.labeling_mode,
        beta=a.beta, eps=a.eps, bias_alpha=a.bias_alpha, timing=a.timing)


def execute(cfg, summary_path=None):
    rows, scenario_summary = run_scenario(cfg)
    text = rows_to_csv(rows)
    out = Path(cfg.out_path)
    out.write_bytes(text.encode("ascii"))
    summary = {
        "scenario": cfg.scenario,
        "config": cfg.echo(),
        "software": {"name": "marginlab", "version": __version__, "backend": kernels.BACKEND},
        "aggregates": aggregates_from_csv(text),
        "scenario_summary": scenario_summary,
        "trials": [r.extras for r in rows],
    }
    path = Path(summary_path) if summary_path else out.with_suffix(".json")
    path.write_bytes(summary_json(summary).encode("ascii"))
    return rows, summary


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        worker_count()
        execute(config_from_args(args), args.summary)
    except ParameterError as exc:
        print(f"marginlab: parameter error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"marginlab: invariant violated: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: run convergence experiments, export grids, and
fire the empirical inequality probes."""
from __future__ import annotations

import argparse
import json
import sys

from .bench import ExperimentConfig, export_grids, run_experiment


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    report = run_experiment(cfg)
    for name, fit in report["fits"].items():
        slope = fit.get("slope")
        slope_txt = f"{slope:+.3f}" if slope is not None else "   n/a"
        print(f"{name:>16s}  slope {slope_txt}  "
              f"predicted -{fit['predicted_exponent']:.3f}  "
              f"[{fit['status']}]")
    print(f"overall: {report['status']}  "
          f"(report in {cfg.output_dir}/report.json)")
    return {"pass": 0, "inconclusive": 2, "fail": 1}[report["status"]]


def _cmd_grids(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    for path in export_grids(cfg):
        print(path)
    return 0


def _cmd_probe(args) -> int:
    from .metrics import inequality_probe
    from .orthopoly import build_recurrence
    from .weights import INF, WeightSpec

    spec = (WeightSpec.quartic() if args.weight == "quartic"
            else WeightSpec.hermite())
    q = INF if args.q == "inf" else float(args.q)
    table = build_recurrence(spec, max(args.degrees) + 4)
    report = inequality_probe(args.kind, spec, table, float(args.p), q,
                              degrees=args.degrees, trials=args.trials,
                              seed=args.seed)
    print(json.dumps(report, indent=2))
    maxima = [row["max_ratio"] for row in report["rows"]]
    # fail on a monotone blow-up trend across the degree sweep
    growing = all(b > a * 1.10 for a, b in zip(maxima, maxima[1:]))
    print(f"max ratios: {[round(v, 4) for v in maxima]}  "
          f"{'GROWING' if growing else 'bounded'}")
    return 1 if growing else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark harness for weighted sampling-recovery "
                    "operators")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a convergence experiment")
    p_run.add_argument("config", help="TOML or JSON experiment config")
    p_run.set_defaults(fn=_cmd_run)

    p_grids = sub.add_parser("grids", help="export operator sample grids")
    p_grids.add_argument("config")
    p_grids.set_defaults(fn=_cmd_grids)

    p_probe = sub.add_parser("probe", help="run an inequality probe")
    p_probe.add_argument("kind", choices=["bernstein", "nikolskii",
                                          "restricted_support"])
    p_probe.add_argument("--weight", default="hermite",
                         choices=["hermite", "quartic"])
    p_probe.add_argument("--p", default="2")
    p_probe.add_argument("--q", default="inf")
    p_probe.add_argument("--degrees", type=int, nargs="+",
                         default=[16, 32, 64])
    p_probe.add_argument("--trials", type=int, default=30)
    p_probe.add_argument("--seed", type=int, default=0)
    p_probe.set_defaults(fn=_cmd_probe)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

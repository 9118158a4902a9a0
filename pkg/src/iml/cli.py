"""Command line entry point: ``iml benchmark`` and ``iml sweep``."""
from __future__ import annotations

import argparse
import logging
import sys

from .dataset import builtin_registry_path
from .harness import ExperimentConfig, Method, run_benchmark, run_sweep
from .solver import SolverOptions


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iml", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("benchmark", "repeated-split F1 benchmark (tables)"),
                            ("sweep", "F1/accuracy under increasing imbalance (curves)")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON experiment config; flags override it")
        p.add_argument("--registry", help="dataset registry JSON (default: bundled datasets)")
        p.add_argument("--datasets", type=_csv_list, help="comma-separated dataset names")
        p.add_argument("--methods", type=_csv_list,
                       help="comma-separated subset of euclidean,iml,ml2,ml1")
        p.add_argument("--preprocess", choices=["none", "smote", "rus"])
        p.add_argument("--seed", type=int)
        p.add_argument("--splits", type=int)
        p.add_argument("--candidates", type=int, help="random hyperparameter combinations")
        p.add_argument("--out", help="output directory")
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("--verbose", action="store_true", help="JSON-lines telemetry on stderr")
        if name == "sweep":
            p.add_argument("--fractions", type=lambda s: [float(x) for x in _csv_list(s)])
            p.add_argument("--min-minority", type=int,
                           help="skip variants keeping fewer positives than this (default 20)")
            p.add_argument("--ablation", action="store_true", help="run iml, ml2 and ml1")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "registry": args.registry,
        "datasets": args.datasets,
        "methods": args.methods,
        "preprocess": args.preprocess,
        "seed": args.seed,
        "splits": args.splits,
        "candidates": args.candidates,
        "out": args.out,
        "jobs": args.jobs,
    }
    if getattr(args, "fractions", None):
        overrides["sweep_fractions"] = args.fractions
    if getattr(args, "min_minority", None) is not None:
        overrides["min_minority"] = args.min_minority
    if getattr(args, "ablation", False):
        overrides["methods"] = [Method.IML, Method.ML2, Method.ML1]
    if args.verbose:
        overrides["solver"] = SolverOptions(verbose=True)
    if args.config:
        return ExperimentConfig.from_json(args.config, **overrides)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    overrides.setdefault("registry", builtin_registry_path())
    if "datasets" not in overrides:
        raise SystemExit("iml: --datasets or --config is required")
    return ExperimentConfig(**overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        raise SystemExit(f"iml: {exc}") from None
    if args.command == "benchmark":
        run_benchmark(cfg)
        print(f"wrote {cfg.out / 'summary.csv'}")
    else:
        run_sweep(cfg)
        print(f"wrote {cfg.out / 'sweep.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

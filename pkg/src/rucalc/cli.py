"""Command-line entry point.

    rucalc run --config exp.yaml [--seed N] [--out DIR] [--formats csv,json,svg] [--jobs N]
    rucalc wg-table --n 4 --p 3

Exit status: 0 when every tolerance gate passes, 1 on a gate failure, 2 on a
usage error (bad config, unknown experiment, cap exceeded, unwritable output).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .experiments import EXPERIMENTS, ConfigError, run_experiment
from .permkit import CapExceeded
from .render import FORMATS, render_outputs, write_rows

EXIT_PASS, EXIT_GATE, EXIT_USAGE = 0, 1, 2


def load_config(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must be a mapping of parameters")
    return cfg


def _formats(text: str) -> list[str]:
    fmts = [f.strip() for f in text.split(",") if f.strip()]
    bad = sorted(set(fmts) - set(FORMATS))
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {', '.join(bad)}; choose from {', '.join(FORMATS)}")
    return fmts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rucalc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment described by a YAML config",
                         description=f"experiments: {', '.join(EXPERIMENTS)}")
    run.add_argument("--config", required=True, help="YAML experiment config")
    run.add_argument("--seed", type=int, help="root seed (overrides config)")
    run.add_argument("--out", help="output directory (overrides config 'out')")
    run.add_argument("--formats", type=_formats, default=["csv", "json"],
                     help="comma-separated subset of csv,json,svg (default csv,json)")
    run.add_argument("--jobs", type=int, help="worker processes for Monte Carlo trials")
    run.add_argument("--bits", action="store_true", help="report entropies in bits instead of nats")

    wg = sub.add_parser("wg-table", help="print the Weingarten table for (n, p) as CSV")
    wg.add_argument("--n", type=int, required=True)
    wg.add_argument("--p", type=int, required=True)
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.bits:
        cfg["bits"] = True
    out = args.out or cfg.get("out")
    if args.formats and out is None:
        raise ConfigError("no output directory: set 'out' in the config or pass --out")
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    record = run_experiment(cfg, seed=args.seed, jobs=args.jobs)
    try:
        paths = render_outputs(record, args.formats, out) if args.formats else []
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    for gate in record.gates:
        status = "PASS" if gate.passed else "FAIL"
        print(f"{status} {gate.name}: {gate.value:.6g} (threshold {gate.threshold:.6g})")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_PASS if record.passed else EXIT_GATE


def _cmd_wg_table(args) -> int:
    record = run_experiment({"experiment": "wg-table", "n": args.n, "p": args.p})
    table = record.tables["wg_table"]
    write_rows(sys.stdout, table.columns, table.rows)
    return EXIT_PASS if record.passed else EXIT_GATE


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_wg_table(args)
    except CapExceeded as exc:
        print(f"error: cap exceeded: {exc}", file=sys.stderr)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

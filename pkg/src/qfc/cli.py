"""Command-line entry point: ``qfc <task> --config <path> [--out <dir>]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import TASKS, ConfigError, load_config, run_config

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfc",
        description="Design and simulation of cavity-enhanced frequency conversion in poled microrings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "execute every task listed in the config",
        "design": "QPM order, poling period, efficiency ceilings, resonance checks",
        "simulate": "calibrate g, conversion curve, ODE cross-check",
        "sweep": "eta_max versus one coupling or loss parameter",
        "fit": "Lorentzian fits of through-port spectra",
        "bend": "Euler bend and taper polylines",
        "budget": "pump channels, loss chains, DFB tuning, noise",
    }
    for name in ("run",) + TASKS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", required=True, help="JSON config path, or 'reference' for the bundled design")
        p.add_argument("--out", help="directory for report.json and CSV/JSON outputs")
    return parser


def main(argv: list[str] | None = None) -> int:
    level = LOG_LEVELS.get(os.environ.get("QFC_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg, base = load_config(args.config)
        tasks = None if args.command == "run" else [args.command]
        report = run_config(cfg, tasks, base)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - every runtime failure maps to exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for line in report.summary:
        print(line)
    for w in report.warnings:
        print(f"warning: {w}")
    if args.out:
        report.write(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

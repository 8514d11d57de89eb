"""Command line entry point: ``kamprop {fig1,fig2,optimize,scaling,sweep}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import ConfigError, ExperimentConfig, load_config
from .errors import KamPropError
from .experiments import COMMANDS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kamprop", description="Optimized KAM perturbation theory for pulse-driven two-level systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fig1": "scan t1: first-order errors and the eigenvalue objective",
        "fig2": "scan t2 at fixed t1: second-order errors",
        "optimize": "minimize the eigenvalue objective over one free time",
        "scaling": "error versus epsilon with fitted log-log slopes",
        "sweep": "generic parameter sweep over all configured methods",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="key = value configuration file")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)")
        p.add_argument("--svg", action="store_true", help="also write SVG line plots")
        p.add_argument("--points", type=int, metavar="N", help="grid points for scans and sweeps")
        p.add_argument("--quiet", action="store_true", help="print nothing on success")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config) if args.config else ExperimentConfig().validate()
        if args.points is not None:
            config = replace(config, scan_points=args.points, sweep_points=args.points).validate()
        if args.out:
            config = replace(config, output_dir=args.out)
        if args.svg:
            config = replace(config, svg=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = COMMANDS[args.command](config)
    except KamPropError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    if result.get("warning"):
        print(f"warning: {result['warning']}", file=sys.stderr)
    if not args.quiet:
        if "summary" in result:
            print(result["summary"])
        for path in result["paths"]:
            print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

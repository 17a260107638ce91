"""Command-line entry point.

    kgpml run <config> [--out DIR] [--seedless] [--demo-stability]
    kgpml converge <config> --axis tau|h --levels K [--out DIR]
    kgpml sweep <config> [--out DIR] [--workers N]

``<config>`` is a key=value file (see :mod:`kgpml.config` for the
grammar).  All runs are deterministic; ``--seedless`` is accepted and
reserved.  ``--demo-stability`` admits a complex shift R and replaces
the error columns by the max-norm probe.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import parse_config
from .errors import ConfigurationError
from .runner import run_convergence, run_single, run_sweep


def _load(path: str, **overrides):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgpml", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="single simulation with error/energy series")
    run_p.add_argument("config")
    run_p.add_argument("--out", default=None, help="output directory (default: config 'output')")
    run_p.add_argument("--seedless", action="store_true", help="reserved; runs are always deterministic")
    run_p.add_argument("--demo-stability", action="store_true", help="admit complex R, record the max-norm probe")

    conv_p = sub.add_parser("converge", help="self-convergence study")
    conv_p.add_argument("config")
    conv_p.add_argument("--axis", choices=("tau", "h"), required=True)
    conv_p.add_argument("--levels", type=int, required=True, help="number of halvings")
    conv_p.add_argument("--out", default=None)

    sweep_p = sub.add_parser("sweep", help="parameter sweep from the [sweep] section")
    sweep_p.add_argument("config")
    sweep_p.add_argument("--out", default=None)
    sweep_p.add_argument("--workers", type=int, default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run" and args.demo_stability:
            cfg = _load(args.config, demo_stability=True)
        else:
            cfg = _load(args.config)
        if args.command == "run":
            manifest = run_single(cfg, out_dir=args.out)
        elif args.command == "converge":
            manifest = run_convergence(cfg, axis=args.axis, levels=args.levels, out_dir=args.out)
        else:
            manifest = run_sweep(cfg, out_dir=args.out, workers=args.workers)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in manifest.outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

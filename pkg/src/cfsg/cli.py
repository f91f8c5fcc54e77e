"""Command-line entry point: ``cfsg run | figure | validate``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import dump_config, load_config
from .errors import ConfigurationError
from .experiments import FIGURES, SCALES, load_sweep, reproduce_figure, run_sweep


def _threads(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfsg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a parameter sweep")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--sweep", required=True, type=Path)
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--seed", type=int, help="master seed (overrides the config)")
    run.add_argument("--threads", type=_threads, help="worker threads (overrides CFSG_THREADS)")
    run.add_argument("--no-svg", action="store_true", help="skip the SVG plot")

    fig = sub.add_parser("figure", help="reproduce one of the reference figures")
    fig.add_argument("name", choices=sorted(FIGURES))
    fig.add_argument("--scale", choices=sorted(SCALES), default="desk")
    fig.add_argument("--out", required=True, type=Path)
    fig.add_argument("--config", type=Path, help="base config (default: built-in defaults)")
    fig.add_argument("--seed", type=int)
    fig.add_argument("--threads", type=_threads)

    val = sub.add_parser("validate", help="check a config file and print it fully resolved")
    val.add_argument("--config", required=True, type=Path)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            sys.stdout.write(dump_config(load_config(args.config)))
            return 0
        if args.command == "run":
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg = cfg.replace(seed=args.seed)
            spec = load_sweep(args.sweep)
            res = run_sweep(cfg, spec, args.out, args.threads, name=args.sweep.stem, svg=not args.no_svg)
            print(f"{len(res.rows)} rows -> {args.out / (args.sweep.stem + '.csv')}")
            if res.truncated:
                print("warning: wall-clock budget exceeded; result truncated", file=sys.stderr)
            return 0
        cfg = load_config(args.config) if args.config else None
        if args.seed is not None:
            from .config import SystemConfig
            cfg = (cfg or SystemConfig()).replace(seed=args.seed)
        results = reproduce_figure(args.name, args.scale, args.out, cfg, args.threads)
        for s, r in results.items():
            print(f"{s}: {len(r.rows)} rows" + (" (truncated)" if r.truncated else ""))
        return 0
    except (ConfigurationError, OSError) as exc:
        print(f"cfsg: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

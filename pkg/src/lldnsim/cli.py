"""Command-line entry point: ``lldnsim {analyze,simulate,placement,figures}``.

On failure the last stderr line is a JSON object ``{"error": ..., "message": ...}``
and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from lldnsim.config import ConfigError, load_config
from lldnsim.reporting import cmd_analyze, cmd_figures, cmd_placement, cmd_simulate
from lldnsim.schedule import InfeasibleScheduleError

COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "placement": cmd_placement,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lldnsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=" ".join(func.__doc__.split("\n\n")[0].split()))
        p.add_argument("--config", type=Path, help="key = value configuration file")
        p.add_argument("--out", type=Path, help="output directory (default: output.dir)")
        p.add_argument("--seed", type=int, help="override simulate.seed")
        p.add_argument("--superframes", type=int, help="override simulate.superframes")
        p.add_argument("--workers", type=int, help="override simulate.workers")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["simulate.seed"] = args.seed
        if args.superframes is not None:
            if args.superframes < 1:
                raise ConfigError("--superframes must be >= 1")
            overrides["simulate.superframes"] = args.superframes
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            overrides["simulate.workers"] = args.workers
        if overrides:
            config = config.with_overrides(**overrides)
        out = args.out if args.out is not None else Path(config["output.dir"])
        written = COMMANDS[args.command](config, out)
    except (ConfigError, InfeasibleScheduleError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

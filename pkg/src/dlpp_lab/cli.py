"""Command line entry point.

    dlpp-lab <solve|simulate|compare|path|tasep|convergence>
             --config FILE [--out DIR] [--seed S] [--threads K]

DLPP_LAB_THREADS is the fallback for --threads.  Schema and I/O failures exit
nonzero with a machine-readable JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis
from .config import ConfigError, load_config

COMMANDS = {
    "solve": analysis.run_solve,
    "simulate": analysis.run_simulate,
    "compare": analysis.run_compare,
    "path": analysis.run_path,
    "tasep": analysis.run_tasep,
    "convergence": analysis.run_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlpp-lab",
                                     description="Inhomogeneous DLPP simulation and PDE cross-validation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default=None, help="output directory (default: config 'out' or cwd)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: env DLPP_LAB_THREADS or 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("DLPP_LAB_THREADS", "1"))
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        out = Path(args.out if args.out is not None else cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        result = COMMANDS[args.command](cfg, out, threads=threads)
    except ConfigError as e:
        json.dump(e.payload, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (OSError, ValueError) as e:
        json.dump({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    json.dump({"command": args.command, "out": str(out), "result": result},
              sys.stdout, sort_keys=True, default=float)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

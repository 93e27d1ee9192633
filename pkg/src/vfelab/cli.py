"""Command line entry point: ``vfelab run --config cfg.json [--output DIR] [--override k=v ...]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

THREAD_ENV = "VFELAB_MAX_THREADS"
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS")


def _cap_threads() -> None:
    cap = os.environ.get(THREAD_ENV)
    if cap:
        for var in _THREAD_VARS:
            os.environ[var] = cap


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vfelab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--config", help="JSON configuration file (defaults are used when omitted)")
    run.add_argument("--output", help="output directory (overrides output_dir)")
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                     help="dotted-key override, value parsed as JSON; repeatable")
    run.add_argument("--scenario", help="scenario name (overrides the config)")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    _cap_threads()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    from .runner import main_run

    return main_run(args.config, args.output, args.override, args.scenario)


if __name__ == "__main__":
    sys.exit(main())

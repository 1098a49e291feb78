"""Command-line entry point: ``run``, ``verify`` and ``lp-dump``.

Exit codes: 0 success, 1 a verification check failed, 2 bad config or input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiment import ConfigError, ExperimentConfig, run_experiment
from .lp import build_lpr, dump_lp
from .problem import ProblemInstance
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irsplace", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run a parameter sweep and write CSV results")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--timing", action="store_true",
                     help="fill runtime_micros (output is then no longer reproducible)")

    ver = sub.add_parser("verify", help="run a self-check suite and print a JSON report")
    ver.add_argument("suite", choices=SUITES)
    ver.add_argument("--trials", type=int, default=None)
    ver.add_argument("--seed", type=int, default=0)

    dump = sub.add_parser("lp-dump", help="print the relaxation of an instance as a table")
    dump.add_argument("instance", type=Path)
    return p


def _cmd_run(args) -> int:
    try:
        cfg = ExperimentConfig.from_json(args.config.read_text())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = run_experiment(cfg, args.out, timing=args.timing)
    for kind, path in out["paths"].items():
        print(f"{kind}: {path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.trials is not None and args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    report = run_suite(args.suite, args.trials, args.seed)
    print(json.dumps(report, indent=2, default=str))
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _cmd_lp_dump(args) -> int:
    try:
        inst = ProblemInstance.from_json(args.instance.read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot load instance: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(dump_lp(build_lpr(inst)))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "verify": _cmd_verify, "lp-dump": _cmd_lp_dump}[args.verb]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())

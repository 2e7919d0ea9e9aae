"""Command line entry point.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on input
errors (bad arguments, unreadable or invalid scenario files).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import emit_report, run_checks
from .scenario import STOCK_SCENARIOS, Scenario, ScenarioError, load_scenario, load_stock

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, help="override the scenario's Monte Carlo seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmeasure", description="Simulate quantum measurement models.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("--scenario", required=True, type=Path)
    _add_output_args(run)

    val = sub.add_parser("validate", help="parse and validate a scenario file")
    val.add_argument("--scenario", required=True, type=Path)

    demo = sub.add_parser("demo", help="run a shipped scenario")
    demo.add_argument("name", choices=STOCK_SCENARIOS)
    _add_output_args(demo)
    return parser


def _execute(scenario: Scenario, args: argparse.Namespace) -> int:
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    report = run_checks(scenario)
    data = emit_report(report, args.format)
    if args.out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        args.out.write_bytes(data)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            load_scenario(args.scenario)
            print(f"{args.scenario}: ok")
            return EXIT_OK
        if args.command == "run":
            return _execute(load_scenario(args.scenario), args)
        return _execute(load_stock(args.name), args)
    except (ScenarioError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        # validate reports any invalid input with exit code 1
        return EXIT_CHECK_FAILED if args.command == "validate" else EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())

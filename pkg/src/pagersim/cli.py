"""Command-line front end.

Runs a scenario file under one scheme (or all four), optionally writing
the trace, checking the scenario's expect lines, verifying cross-scheme
equivalence, and printing the overhead comparison report.

Exit status: 0 on success, 1 when a requested check failed, 2 for usage,
parse, or simulation errors.
"""

import argparse
import sys
from pathlib import Path

from .errors import SimulationError
from .scenario import ScenarioError, parse_scenario
from .schemes import (
    ALL_SCHEMES,
    Scheme,
    check_expectations,
    overhead_report,
    simulate,
    verify_equivalence,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pagersim",
        description="Deterministic page-fault dispatch simulator.",
    )
    parser.add_argument(
        "--scenario", required=True, metavar="FILE",
        help="scenario file to run",
    )
    parser.add_argument(
        "--scheme",
        choices=[s.value for s in ALL_SCHEMES] + ["all"],
        default="all",
        help="dispatch scheme to simulate (default: all)",
    )
    parser.add_argument(
        "--trace", metavar="FILE",
        help="write the event trace here; with --scheme all the scheme "
        "name is inserted before the file extension",
    )
    parser.add_argument(
        "--report", choices=["table", "kv"],
        help="print the cross-scheme overhead report (runs every scheme)",
    )
    parser.add_argument(
        "--seed", type=int, default=None,
        help="override the scenario's round-robin schedule seed",
    )
    parser.add_argument(
        "--check", action="store_true",
        help="verify the scenario's expect lines; failures exit 1",
    )
    parser.add_argument(
        "--verify-equivalence", action="store_true",
        help="run all schemes and check that they agree on verdicts and "
        "final page tables, with costs ordered; failures exit 1",
    )
    return parser


def _trace_path(base: str, scheme: Scheme, multi: bool) -> Path:
    path = Path(base)
    if not multi:
        return path
    if path.suffix:
        return path.with_name(f"{path.stem}.{scheme.value}{path.suffix}")
    return path.with_name(f"{path.name}.{scheme.value}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.scenario).read_text()
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_ERROR

    try:
        scenario = parse_scenario(text)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    if args.scheme == "all" or args.verify_equivalence or args.report:
        schemes = list(ALL_SCHEMES)
    else:
        schemes = [Scheme.from_token(args.scheme)]
    multi = len(schemes) > 1

    results = {}
    try:
        for scheme in schemes:
            results[scheme.value] = simulate(scheme, scenario, seed=args.seed)
    except (SimulationError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    for token, res in results.items():
        print(
            f"{token}: faults={len(res.cycles)} events={len(res.trace)} "
            f"warnings={len(res.warnings)}"
        )
        if args.trace:
            path = _trace_path(args.trace, res.scheme, multi)
            path.write_text(res.trace.to_text())
            print(f"{token}: trace written to {path}")

    failed = False

    if args.check:
        failures = check_expectations(results, scenario)
        for msg in failures:
            print(f"check: {msg}")
        n = len(scenario.expectations)
        print(f"check: {n} expectation line(s), {len(failures)} failure(s)")
        failed = failed or bool(failures)

    if args.verify_equivalence:
        problems = verify_equivalence(results)
        for msg in problems:
            print(f"equivalence: {msg}")
        verdict = "ok" if not problems else f"{len(problems)} problem(s)"
        print(f"equivalence: {verdict}")
        failed = failed or bool(problems)

    if args.report:
        report = overhead_report(scenario, seed=args.seed)
        rendered = report.as_table() if args.report == "table" else report.as_kv()
        print(rendered, end="")

    return EXIT_CHECK_FAILED if failed else EXIT_OK


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()

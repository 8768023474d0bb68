"""Command-line scenario runner."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import FairThreshError, InconsistentInput, ParseError, UnsupportedCriterion, ValidationError
from .scenario import (
    build_population,
    emit_outputs,
    load_scenario,
    run_scenario,
    sensitivity_reports,
    with_overrides,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

log = logging.getLogger("fairthresh")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairthresh", description="Sweep data-bias levels and score fair threshold policies on ground truth."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "sweep bias levels and write the results table"),
        ("contour", "write the utility contour over selection-rate pairs"),
        ("sensitivity", "write closed-form and finite-difference threshold sensitivities"),
        ("validate", "check a scenario file without solving anything"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scenario", type=Path)
        p.add_argument("--out-dir", type=Path, default=None, help="output directory (default: next to the scenario)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--oracle", action="store_true", default=None, help="add grid-search cross-check columns")
        p.add_argument("--grid-step", type=float, default=None, help="lattice step for soft constraints")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _dispatch(args)
    except (ValidationError, ParseError, InconsistentInput, UnsupportedCriterion) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FairThreshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def _dispatch(args) -> int:
    scenario = load_scenario(args.scenario)
    scenario = with_overrides(scenario, seed=args.seed, oracle=args.oracle, grid_step=args.grid_step)
    out_dir = args.out_dir if args.out_dir is not None else scenario.base_dir
    truth = build_population(scenario)

    if args.command == "validate":
        print(
            f"{args.scenario}: ok ({scenario.source} source, {scenario.family}, "
            f"{len(scenario.betas)} bias levels, specs {', '.join(s.label for s in scenario.fairness_specs())})"
        )
        return EXIT_OK
    if args.command == "contour":
        paths = emit_outputs(None, out_dir, contour_pop=truth)
    elif args.command == "sensitivity":
        paths = emit_outputs(None, out_dir, sensitivity=sensitivity_reports(scenario, truth))
    else:
        sr = run_scenario(scenario, truth)
        failed = [r for r in sr.rows if r.error is not None]
        for r in failed:
            log.warning("%s at beta=%g: %s", r.spec.label, r.beta, r.error)
        reports = sensitivity_reports(scenario, truth) if scenario.sensitivity else None
        paths = emit_outputs(sr, out_dir, truth if scenario.contour else None, reports)
        for p in paths:
            print(p)
        return EXIT_INFEASIBLE if sr.all_failed else EXIT_OK
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Machine-readable CSV goes to stdout; human-readable progress and
summaries go to stderr.  Exit codes: 0 for success (including a timeout
that still returned an incumbent), 1 for a roster failing hard checks in
``validate``, 2 for input errors, 3 for internal failures.  The
``NURSE_BNP_LOG`` environment variable (debug/info/warning) controls log
verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from . import bnp, colgen, labeling, oracle
from .graphs import BranchConstraintSet, DualValues, build_graph
from .instance import (
    Instance,
    InstanceFormatError,
    generate_instance,
    parse_instance,
    parse_roster,
    restrict_to_preferred,
    serialize_instance,
    serialize_roster,
    validate_roster,
)
from .labeling import PricingConfig, Variant

SUITE_DIMS = [
    (nurses, weeks, units)
    for weeks in (2, 4)
    for units in (2, 3, 4)
    for nurses in (10, 20, 30, 40, 50)
]


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_instance(path: str) -> Instance:
    return parse_instance(Path(path).read_text())


def _variants(name: str) -> list[Variant]:
    if name == "all":
        return [Variant.DPB, Variant.DPU, Variant.DPP, Variant.DPPI]
    return [Variant(name)]


def _duals_from_spec(spec: str, instance: Instance) -> DualValues:
    if spec == "zero":
        return DualValues.zero(instance)
    if spec.startswith("random:"):
        return DualValues.seeded_random(instance, int(spec.split(":", 1)[1]))
    raise InstanceFormatError(f"bad duals spec {spec!r}; use 'zero' or 'random:SEED'")


def cmd_generate(args) -> int:
    instance = generate_instance(args.nurses, args.weeks, args.units, args.seed)
    Path(args.out).write_text(serialize_instance(instance))
    _say(
        f"wrote {args.out}: {args.nurses} nurses, {args.weeks} weeks, "
        f"{args.units} units, seed {args.seed}"
    )
    return 0


def _solve_one(instance: Instance, name: str, mode: str, args) -> tuple[str, bnp.SolveOutcome]:
    if mode == "single":
        instance = restrict_to_preferred(instance)
    config = bnp.BnpConfig(
        time_limit_s=args.time_limit,
        variant=Variant(args.variant),
        workers=args.workers,
        skip_heuristic=not args.no_skip_heuristic,
        penalize_trailing=not args.no_trailing_stint_penalty,
    )
    outcome = bnp.branch_and_price(instance, config)
    row = (
        f"{name},{mode},{outcome.root_lower_bound:g},{outcome.upper_bound:g},"
        f"{str(outcome.proved).lower()},{outcome.nodes_explored},{outcome.wall_ms:.0f}"
    )
    return row, outcome


def cmd_solve(args) -> int:
    instance = _load_instance(args.instance)
    print("instance,mode,LB,UB,proved,nodes,timeMs")
    row, outcome = _solve_one(instance, args.instance, args.mode, args)
    print(row)
    _say(
        f"{'proved optimal' if outcome.proved else 'time limit reached'}: "
        f"UB={outcome.upper_bound:g} LB={outcome.root_lower_bound:g} "
        f"nodes={outcome.nodes_explored} time={outcome.wall_ms / 1000:.1f}s"
    )
    if args.save_roster and outcome.best_roster is not None:
        solved = restrict_to_preferred(instance) if args.mode == "single" else instance
        Path(args.save_roster).write_text(serialize_roster(solved, outcome.best_roster))
        _say(f"roster written to {args.save_roster}")
    return 0


def cmd_price(args) -> int:
    instance = _load_instance(args.instance)
    try:
        nurse = instance.nurse(args.nurse)
    except KeyError:
        raise InstanceFormatError(f"unknown nurse {args.nurse!r}") from None
    duals = _duals_from_spec(args.duals, instance)
    print("subInstance,variant,timeMs,labelsExtended,reducedCost")
    for variant in _variants(args.variant):
        graph = build_graph(instance, nurse, duals, BranchConstraintSet())
        config = PricingConfig(
            penalize_trailing=not args.no_trailing_stint_penalty,
            deadline=time.monotonic() + args.time_limit,
            max_labels=args.max_labels,
        )
        result = labeling.solve_pricing(graph, nurse, duals, variant, config)
        rc = "" if result.timed_out else f"{result.reduced_cost:g}"
        print(
            f"{args.instance}:{args.nurse},{variant.value},{result.wall_ms:.0f},"
            f"{result.labels_extended},{rc}"
        )
        if result.timed_out:
            _say(f"{variant.value}: time limit hit after {result.labels_extended} labels")
    return 0


def cmd_validate(args) -> int:
    instance = _load_instance(args.instance)
    roster = parse_roster(instance, Path(args.roster).read_text())
    report = validate_roster(instance, roster)
    sys.stdout.write(report.to_csv())
    _say(
        f"objective {report.total_objective} "
        f"(schedules {report.schedule_cost}, understaffing {report.understaff_cost})"
    )
    if not report.hard_feasible:
        for hv in report.hard_violations:
            _say(f"hard violation: nurse {hv.nurse_id}: {hv.detail}")
        return 1
    return 0


def cmd_suite(args) -> int:
    print("instance,mode,LB,UB,proved,nodes,timeMs")
    modes = args.modes.split(",")
    for idx, (nurses, weeks, units) in enumerate(SUITE_DIMS, start=1):
        instance = generate_instance(nurses, weeks, units, args.seed)
        name = f"gen-{idx:02d}-n{nurses}-w{weeks}-u{units}"
        for mode in modes:
            row, outcome = _solve_one(instance, name, mode, args)
            print(row, flush=True)
            _say(
                f"{name} [{mode}]: UB={outcome.upper_bound:g} "
                f"proved={outcome.proved} time={outcome.wall_ms / 1000:.1f}s"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nurse-bnp",
        description="Branch-and-price solver for nurse rostering with multiple units",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded benchmark instance")
    p.add_argument("--nurses", type=int, required=True)
    p.add_argument("--weeks", type=int, required=True)
    p.add_argument("--units", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    def add_solve_options(p):
        p.add_argument("--variant", default="DPPI", choices=["DPB", "DPU", "DPP", "DPPI"])
        p.add_argument("--time-limit", type=float, default=3600.0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--no-skip-heuristic", action="store_true")
        p.add_argument("--no-trailing-stint-penalty", action="store_true")

    p = sub.add_parser("solve", help="solve an instance to proven optimality")
    p.add_argument("instance")
    p.add_argument("--mode", default="full", choices=["full", "single"])
    p.add_argument("--save-roster")
    add_solve_options(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("price", help="benchmark the pricing subproblem of one nurse")
    p.add_argument("instance")
    p.add_argument("--nurse", required=True)
    p.add_argument("--variant", default="DPPI", choices=["DPB", "DPU", "DPP", "DPPI", "all"])
    p.add_argument("--duals", default="zero")
    p.add_argument("--time-limit", type=float, default=15.0)
    p.add_argument("--max-labels", type=int, default=2_000_000)
    p.add_argument("--no-trailing-stint-penalty", action="store_true")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("validate", help="score a roster file against an instance")
    p.add_argument("instance")
    p.add_argument("roster")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("suite", help="generate and solve the full benchmark suite")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--modes", default="full", help="comma-separated: full,single")
    add_solve_options(p)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("NURSE_BNP_LOG", "warning").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceFormatError, FileNotFoundError, ValueError) as exc:
        _say(f"input error: {exc}")
        return 2
    except Exception as exc:  # pragma: no cover - internal failures
        logging.getLogger("nurse_bnp").exception("internal failure")
        _say(f"internal error: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())

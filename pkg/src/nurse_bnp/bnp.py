"""Branch-and-price tree search.

Nodes are explored best-first by their parent's LP bound (ties broken
depth-first).  At each node the branching-restricted master is solved to
LP optimality by column generation; fractional nodes branch on the
nurse-day-unit-shift assignment closest to 1, forcing it in one child
and forbidding it in the other.  Children inherit every
branching-consistent column of the parent pool.  All penalties are
integral, so a node whose bound cannot be beaten by at least one is
pruned.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass

from . import colgen, labeling, lp, oracle
from .graphs import BranchConstraintSet, DualValues, EMPTY_BRANCHING, build_graph
from .instance import InfeasibleSubproblemError, Instance, Roster, Schedule, validate_roster
from .labeling import PricingConfig, Variant

__all__ = ["BnpConfig", "BnbNode", "SolveOutcome", "initial_roster", "select_branch", "branch_and_price"]

logger = logging.getLogger("nurse_bnp.bnp")

FRAC_TOL = 1e-6
GAP_EPS = 1e-6


@dataclass(frozen=True)
class BnpConfig:
    time_limit_s: float = 3600.0
    variant: Variant = Variant.DPPI
    workers: int = 1
    skip_heuristic: bool = True
    columns_per_nurse: int = 1
    penalize_trailing: bool = True
    exact_dfa_bounds: bool = True


@dataclass
class BnbNode:
    branching: BranchConstraintSet
    parent_lb: float
    depth: int
    column_pool: list[lp.Column]


@dataclass(frozen=True)
class SolveOutcome:
    best_roster: Roster | None
    upper_bound: float
    lower_bound: float
    root_lower_bound: float
    nodes_explored: int
    proved: bool
    wall_ms: float


def initial_roster(instance: Instance, *, penalize_trailing: bool = True) -> list[lp.Column]:
    """Deterministic greedy start: one hard-feasible schedule per nurse.

    Day by day, each nurse takes the currently most understaffed
    (unit, shift) among its required units, unless the rotation rules or
    an exhausted consecutive-work allowance force a rest day.
    """
    remaining = dict(instance.cover)
    assignments: dict[str, list] = {n.nurse_id: [] for n in instance.nurses}
    prev_shift: dict[str, int | None] = {n.nurse_id: None for n in instance.nurses}
    streak: dict[str, int] = {n.nurse_id: 0 for n in instance.nurses}

    for d in range(instance.num_days):
        for nurse in instance.nurses:
            nid = nurse.nurse_id
            best = None
            if streak[nid] < nurse.consec_work.max_len:
                for u in sorted(nurse.required_units):
                    for s in range(len(instance.shifts)):
                        if prev_shift[nid] is not None and not instance.rotation_ok(prev_shift[nid], s):
                            continue
                        short = remaining.get((d, u, s), 0)
                        if short > 0 and (best is None or short > best[0]):
                            best = (short, u, s)
            if best is None:
                assignments[nid].append(None)
                prev_shift[nid] = None
                streak[nid] = 0
            else:
                _, u, s = best
                assignments[nid].append((u, s))
                prev_shift[nid] = s
                streak[nid] += 1
                remaining[(d, u, s)] -= 1

    columns = []
    for nurse in instance.nurses:
        schedule = Schedule(tuple(assignments[nurse.nurse_id]))
        cost = oracle.schedule_penalty(
            instance, nurse, schedule, close_trailing=penalize_trailing
        ).total
        columns.append(lp.Column(nurse.nurse_id, schedule, cost))
    return columns


def select_branch(solution: lp.RmpSolution, columns_of, instance: Instance):
    """Most fractional assignment to branch on, or None when integral.

    ``columns_of`` maps a column index to its :class:`lp.Column`.
    Aggregates per-assignment weights over the fractional columns and
    returns the (nurse, day, unit, shift) whose weight is closest to 1,
    ties broken lexicographically.
    """
    theta: dict[tuple[str, int, int, int], float] = {}
    for j, value in solution.column_values.items():
        if value <= FRAC_TOL:
            continue
        col = columns_of(j)
        for d, u, s in col.schedule.assignments():
            key = (col.nurse_id, d, u, s)
            theta[key] = theta.get(key, 0.0) + value
    fractional = [
        (value, key) for key, value in theta.items() if FRAC_TOL < value < 1 - FRAC_TOL
    ]
    if not fractional:
        return None
    best_value = max(value for value, _ in fractional)
    candidates = sorted(key for value, key in fractional if value >= best_value - 1e-12)
    return candidates[0]


def _roster_from_solution(solution: lp.RmpSolution, model: lp.RmpModel, instance: Instance) -> Roster:
    """Per nurse, the column carrying the most LP weight.

    For an integral solution this reads off the roster exactly; for a
    fractional one it is a rounding whose schedules are all feasible and
    branching-consistent, usable as an incumbent candidate.
    """
    weight: dict[str, float] = {}
    schedules: dict[str, Schedule] = {}
    for j, value in sorted(solution.column_values.items()):
        col = model.columns[j]
        if value > weight.get(col.nurse_id, 0.0):
            weight[col.nurse_id] = value
            schedules[col.nurse_id] = col.schedule
    for nurse in instance.nurses:
        if nurse.nurse_id not in schedules:
            schedules[nurse.nurse_id] = Schedule((None,) * instance.num_days)
    return Roster(schedules)


def _ensure_pool_covers(instance, pool, branching, config):
    """Guarantee one branching-consistent column per nurse, pricing if needed."""
    have = {col.nurse_id for col in pool}
    for nurse in instance.nurses:
        if nurse.nurse_id in have:
            continue
        graph = build_graph(instance, nurse, DualValues.zero(instance), branching)
        result = labeling.solve_pricing(
            graph,
            nurse,
            DualValues.zero(instance),
            config.variant,
            PricingConfig(
                penalize_trailing=config.penalize_trailing,
                exact_dfa_bounds=config.exact_dfa_bounds,
            ),
        )
        cost = oracle.schedule_penalty(
            instance, nurse, result.best_schedule, close_trailing=config.penalize_trailing
        ).total
        pool.append(lp.Column(nurse.nurse_id, result.best_schedule, cost))


def branch_and_price(instance: Instance, config: BnpConfig = BnpConfig()) -> SolveOutcome:
    """Solve the rostering problem to proven optimality (or best incumbent).

    Returns the incumbent roster, upper and global lower bounds, the root
    LP bound, and whether optimality was proved within the time limit.
    """
    t0 = time.monotonic()
    deadline = t0 + config.time_limit_s

    start_columns = initial_roster(instance, penalize_trailing=config.penalize_trailing)
    start_roster = Roster({col.nurse_id: col.schedule for col in start_columns})
    report = validate_roster(instance, start_roster, close_trailing=config.penalize_trailing)
    incumbent_value = report.total_objective
    incumbent = start_roster

    cg_config = colgen.CgConfig(
        variant=config.variant,
        workers=config.workers,
        skip_heuristic=config.skip_heuristic,
        columns_per_nurse=config.columns_per_nurse,
        penalize_trailing=config.penalize_trailing,
        exact_dfa_bounds=config.exact_dfa_bounds,
        deadline=deadline,
    )

    # Every penalty is weight * violation-count, so objectives move in
    # steps of the weight gcd; a node needs a full quantum below the
    # incumbent to be worth exploring.
    quantum = instance.objective_quantum()

    counter = itertools.count()
    root = BnbNode(EMPTY_BRANCHING, float("-inf"), 0, list(start_columns))
    heap: list[tuple[float, int, BnbNode]] = [(root.parent_lb, -next(counter), root)]
    nodes_explored = 0
    root_lb = float("-inf")
    global_lb = float("-inf")
    proved = True

    while heap:
        if time.monotonic() > deadline:
            proved = False
            break
        node_lb_key, _, node = heapq.heappop(heap)
        global_lb = max(global_lb, min([node_lb_key] + [entry[0] for entry in heap]))
        if node.parent_lb >= incumbent_value - (quantum - GAP_EPS):
            # Best-first order: every remaining node is prunable too.
            global_lb = max(global_lb, incumbent_value)
            break

        pool = list(node.column_pool)
        try:
            _ensure_pool_covers(instance, pool, node.branching, config)
            outcome = colgen.run_column_generation(instance, pool, node.branching, cg_config)
        except InfeasibleSubproblemError:
            nodes_explored += 1
            continue
        except colgen.CgTimeout:
            proved = False
            break
        nodes_explored += 1
        node_lb = outcome.lower_bound
        if node.depth == 0:
            root_lb = node_lb
        logger.info(
            "node %d: depth=%d lb=%.6g incumbent=%.6g open=%d",
            nodes_explored,
            node.depth,
            node_lb,
            incumbent_value,
            len(heap),
        )

        if node_lb >= incumbent_value - (quantum - GAP_EPS):
            continue

        # Harvest an incumbent from the node solution: rounding to each
        # nurse's heaviest column costs nothing and is always feasible.
        roster = _roster_from_solution(outcome.solution, outcome.model, instance)
        report = validate_roster(instance, roster, close_trailing=config.penalize_trailing)
        if report.total_objective < incumbent_value:
            incumbent_value = report.total_objective
            incumbent = roster
            logger.info("new incumbent: %d", incumbent_value)

        branch = select_branch(outcome.solution, lambda j: outcome.model.columns[j], instance)
        if branch is None:
            continue

        nurse_id, d, u, s = branch
        forced = node.branching.with_forced(nurse_id, d, u, s)
        forbidden = node.branching.with_forbidden(nurse_id, d, u, s)
        # Pushed last wins depth-first ties: explore the forcing child
        # first, it drives the relaxation toward integrality.
        for child_branching in (forbidden, forced):
            child_pool = [
                col
                for col in outcome.columns
                if child_branching.allows_schedule(col.nurse_id, col.schedule)
            ]
            child = BnbNode(child_branching, node_lb, node.depth + 1, child_pool)
            heapq.heappush(heap, (node_lb, -next(counter), child))

    if not heap and proved:
        global_lb = incumbent_value
    if root_lb == float("-inf"):
        root_lb = global_lb if global_lb > float("-inf") else incumbent_value
        proved = False

    wall = (time.monotonic() - t0) * 1000
    return SolveOutcome(
        best_roster=incumbent,
        upper_bound=incumbent_value,
        lower_bound=min(global_lb, incumbent_value) if global_lb > float("-inf") else incumbent_value,
        root_lower_bound=root_lb,
        nodes_explored=nodes_explored,
        proved=proved,
        wall_ms=wall,
    )

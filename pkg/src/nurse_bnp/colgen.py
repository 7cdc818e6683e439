"""Column generation over the restricted master.

Each iteration solves the master LP, prices every non-skipped nurse
against the current duals, and adds one (optionally several) negative
reduced-cost schedules per nurse.  Nurses whose pricing came back
nonnegative are skipped in later iterations; before declaring
convergence a full sweep re-prices every nurse, so the returned value is
the true optimum of the branching-restricted master.  The skip set is
also cleared whenever the objective stalls, which can only cost extra
pricing calls, never change the converged value.

Pricing subproblems for distinct nurses are independent; with
``workers > 1`` they run on a thread pool and their results are applied
in nurse order, so the trajectory does not depend on the worker count.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import labeling, lp, oracle
from .graphs import BranchConstraintSet, DualValues, EMPTY_BRANCHING, build_graph
from .instance import InfeasibleSubproblemError, Instance
from .labeling import PricingConfig, Variant

__all__ = ["CgConfig", "CgStats", "CgOutcome", "CgTimeout", "run_column_generation"]

logger = logging.getLogger("nurse_bnp.colgen")

RC_TOL = -1e-7


class CgTimeout(Exception):
    """Deadline reached before the master converged."""


@dataclass(frozen=True)
class CgConfig:
    variant: Variant = Variant.DPPI
    workers: int = 1
    skip_heuristic: bool = True
    columns_per_nurse: int = 1
    penalize_trailing: bool = True
    exact_dfa_bounds: bool = True
    stall_reset: int = 3
    deadline: float | None = None  # time.monotonic() timestamp


@dataclass
class CgStats:
    iterations: int = 0
    columns_added: int = 0
    pricing_calls: int = 0
    nurses_skipped: int = 0
    pricing_ms: dict[str, float] = field(default_factory=dict)
    trace: list[tuple[int, float, int, int, float]] = field(default_factory=list)

    def trace_csv(self) -> str:
        rows = ["iteration,rmpObjective,columnsAdded,nursesSkipped,elapsedMs"]
        for it, obj, added, skipped, ms in self.trace:
            rows.append(f"{it},{obj!r},{added},{skipped},{ms:.1f}")
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class CgOutcome:
    solution: lp.RmpSolution
    stats: CgStats
    columns: list[lp.Column]
    lower_bound: float
    lower_bound_exact: Fraction
    model: lp.RmpModel


def _price_nurse(instance, nurse, duals, branching, config):
    graph = build_graph(instance, nurse, duals, branching)
    return labeling.solve_pricing(
        graph,
        nurse,
        duals,
        config.variant,
        PricingConfig(
            penalize_trailing=config.penalize_trailing,
            exact_dfa_bounds=config.exact_dfa_bounds,
            k_best=config.columns_per_nurse,
        ),
    )


def run_column_generation(
    instance: Instance,
    initial_columns: list[lp.Column],
    branching: BranchConstraintSet = EMPTY_BRANCHING,
    config: CgConfig = CgConfig(),
) -> CgOutcome:
    """Solve the branching-restricted master LP to optimality.

    ``initial_columns`` must contain at least one branching-consistent
    schedule per nurse.  Raises :class:`InfeasibleSubproblemError` when
    branching makes some nurse's subproblem empty and
    :class:`CgTimeout` when the deadline passes before convergence.
    """
    t0 = time.monotonic()
    model = lp.RmpModel(instance, initial_columns)
    stats = CgStats()
    skip: set[str] = set()
    nurses = list(instance.nurses)
    stall = 0
    last_objective = None
    solution = None

    def price_many(targets, duals):
        if config.workers > 1 and len(targets) > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                futures = {
                    n.nurse_id: pool.submit(
                        _price_nurse, instance, n, duals, branching, config
                    )
                    for n in targets
                }
            return {nurse_id: fut.result() for nurse_id, fut in futures.items()}
        return {
            n.nurse_id: _price_nurse(instance, n, duals, branching, config)
            for n in targets
        }

    while True:
        if config.deadline is not None and time.monotonic() > config.deadline:
            raise CgTimeout()
        stats.iterations += 1
        solution = lp.solve_rmp(model)
        if last_objective is not None and solution.objective > last_objective - 1e-9:
            stall += 1
            if config.skip_heuristic and stall >= config.stall_reset and skip:
                logger.debug("objective stalled; clearing skip set")
                skip.clear()
                stall = 0
        else:
            stall = 0
        last_objective = solution.objective

        final_sweep = not config.skip_heuristic or not skip
        targets = [n for n in nurses if n.nurse_id not in skip]
        stats.nurses_skipped += len(nurses) - len(targets)
        results = price_many(targets, solution.duals)
        stats.pricing_calls += len(targets)

        added = 0
        for nurse in nurses:
            result = results.get(nurse.nurse_id)
            if result is None:
                continue
            stats.pricing_ms[nurse.nurse_id] = (
                stats.pricing_ms.get(nurse.nurse_id, 0.0) + result.wall_ms
            )
            if result.reduced_cost < RC_TOL:
                skip.discard(nurse.nurse_id)
                for rc, schedule in result.ranked:
                    if rc >= RC_TOL:
                        break
                    cost = oracle.schedule_penalty(
                        instance,
                        nurse,
                        schedule,
                        close_trailing=config.penalize_trailing,
                    ).total
                    if model.add_column(lp.Column(nurse.nurse_id, schedule, cost)) is not None:
                        added += 1
            elif config.skip_heuristic:
                skip.add(nurse.nurse_id)

        elapsed = (time.monotonic() - t0) * 1000
        stats.columns_added += added
        stats.trace.append(
            (stats.iterations, solution.objective, added, len(nurses) - len(targets), elapsed)
        )
        logger.info(
            "cg iteration %d: objective=%.6g, added=%d, skipped=%d, %.0fms",
            stats.iterations,
            solution.objective,
            added,
            len(nurses) - len(targets),
            elapsed,
        )

        if added == 0:
            if final_sweep:
                break
            # Re-check every skipped nurse before declaring optimality.
            skip.clear()

    exact = lp.exact_objective(model, solution.basis)
    columns = [col for col in model.columns if col is not None]
    return CgOutcome(
        solution=solution,
        stats=stats,
        columns=columns,
        lower_bound=float(exact),
        lower_bound_exact=exact,
        model=model,
    )

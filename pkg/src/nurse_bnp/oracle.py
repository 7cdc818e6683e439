"""Ground-truth evaluation: exact schedule penalties and exhaustive search.

These routines are deliberately direct: they evaluate the objective
definitions with no pruning cleverness beyond hard-constraint filtering,
and serve as the reference the pricing engine and the tree search are
checked against.  Enumeration sizes are guarded so a misuse fails loudly
instead of hanging.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import dfa as dfa_mod
from .instance import (
    Instance,
    NurseContract,
    Roster,
    Schedule,
    HardViolationError,
    InfeasibleSubproblemError,
)

__all__ = [
    "PenaltyBreakdown",
    "EnumerationGuardError",
    "schedule_penalty",
    "enumerate_schedules",
    "brute_force_roster",
]


class EnumerationGuardError(ValueError):
    """The requested enumeration is too large to run exhaustively."""


@dataclass(frozen=True)
class PenaltyBreakdown:
    """Soft-constraint penalties of one schedule, itemised.

    ``items`` maps constraint name to (violation units, cost).  The
    aggregate properties group them the way the objective is usually
    reported: counter limits, series limits, day requests, shift
    requests, and unit-preference penalties.
    """

    CONSTRAINTS = (
        "total_days",
        "unit_days",
        "weekends",
        "consec_work",
        "consec_rest",
        "day_requests",
        "shift_requests",
        "non_preferred",
    )

    items: dict[str, tuple[int, int]]

    @property
    def counter_cost(self) -> int:
        return self.items["total_days"][1] + self.items["unit_days"][1] + self.items["weekends"][1]

    @property
    def series_cost(self) -> int:
        return self.items["consec_work"][1] + self.items["consec_rest"][1]

    @property
    def day_request_cost(self) -> int:
        return self.items["day_requests"][1]

    @property
    def shift_request_cost(self) -> int:
        return self.items["shift_requests"][1]

    @property
    def preference_cost(self) -> int:
        return self.items["non_preferred"][1]

    @property
    def total(self) -> int:
        return sum(cost for _, cost in self.items.values())


def _stint_violations(bits, spec, close_trailing: bool) -> int:
    """Violation units over maximal runs of 1s (shortfall + excess days)."""
    count = 0
    run = 0
    for b in bits:
        if b:
            run += 1
            if run > spec.max_len:
                count += 1
        else:
            if 0 < run < spec.min_len:
                count += spec.min_len - run
            run = 0
    if close_trailing and 0 < run < spec.min_len:
        count += spec.min_len - run
    return count


def schedule_penalty(
    instance: Instance,
    nurse: NurseContract,
    schedule: Schedule,
    *,
    close_trailing: bool = True,
    check_hard: bool = True,
) -> PenaltyBreakdown:
    """Exact soft-constraint penalty of one schedule.

    Counter penalties cover total working days, per-unit working days and
    working weekends; series penalties run the work and rest automata over
    the assignment bits; the remaining terms sum request and preference
    costs day by day.
    """
    if check_hard:
        errs = instance.schedule_hard_errors(nurse, schedule)
        if errs:
            raise HardViolationError("; ".join(errs))

    work_bits = schedule.work_bits()
    work_days = sum(work_bits)
    unit_count: dict[int, int] = {}
    for _, u, _s in schedule.assignments():
        unit_count[u] = unit_count.get(u, 0) + 1

    items: dict[str, tuple[int, int]] = {}
    items["total_days"] = (
        nurse.total_days.violation(work_days),
        nurse.total_days.penalty(work_days),
    )
    uv = uc = 0
    for u, spec in nurse.unit_days.items():
        n = unit_count.get(u, 0)
        uv += spec.violation(n)
        uc += spec.penalty(n)
    items["unit_days"] = (uv, uc)

    weekends = 0
    for d in range(0, instance.num_days, 7):
        sat, sun = d + 5, d + 6
        worked = (sat < instance.num_days and work_bits[sat]) or (
            sun < instance.num_days and work_bits[sun]
        )
        if worked:
            weekends += 1
    wv = max(0, weekends - nurse.max_weekends)
    items["weekends"] = (wv, wv * nurse.weekend_cost)

    work_dfa = dfa_mod.build_consecutive_dfa(nurse.consec_work)
    rest_dfa = dfa_mod.build_consecutive_dfa(nurse.consec_rest)
    rest_bits = tuple(1 - b for b in work_bits)
    items["consec_work"] = (
        _stint_violations(work_bits, nurse.consec_work, close_trailing),
        dfa_mod.evaluate_sequence(work_dfa, work_bits, close_trailing),
    )
    items["consec_rest"] = (
        _stint_violations(rest_bits, nurse.consec_rest, close_trailing),
        dfa_mod.evaluate_sequence(rest_dfa, rest_bits, close_trailing),
    )

    dv = dc = 0
    for d, (on_cost, off_cost) in nurse.day_requests.items():
        if work_bits[d]:
            if off_cost:
                dv += 1
                dc += off_cost
        else:
            if on_cost:
                dv += 1
                dc += on_cost
    items["day_requests"] = (dv, dc)

    sv = sc = 0
    for (d, s), (on_cost, off_cost) in nurse.shift_requests.items():
        assignment = schedule.days[d]
        works_s = assignment is not None and assignment[1] == s
        if works_s:
            if off_cost:
                sv += 1
                sc += off_cost
        else:
            if on_cost:
                sv += 1
                sc += on_cost
    items["shift_requests"] = (sv, sc)

    pv = pc = 0
    for d, u, _s in schedule.assignments():
        if u not in nurse.preferred_units:
            cost = nurse.non_preferred_cost.get((d, u), 0)
            if cost:
                pv += 1
                pc += cost
    items["non_preferred"] = (pv, pc)

    return PenaltyBreakdown(items=items)


# ---------------------------------------------------------------------------
# Exhaustive pricing enumeration


def _day_options(instance, nurse, branching, nurse_id):
    """Per-day assignment options respecting skills and branching."""
    forced = {}
    forbidden = set()
    if branching is not None:
        for n, d, u, s in branching.forced:
            if n == nurse_id:
                forced[d] = (u, s)
        for n, d, u, s in branching.forbidden:
            if n == nurse_id:
                forbidden.add((d, u, s))
    options = []
    req = sorted(nurse.required_units)
    for d in range(instance.num_days):
        if d in forced:
            u, s = forced[d]
            if u not in nurse.required_units or (d, u, s) in forbidden:
                raise InfeasibleSubproblemError(
                    f"nurse {nurse_id}: forced assignment on day {d} is not allowed"
                )
            options.append([(u, s)])
        else:
            opts: list[tuple[int, int] | None] = [None]
            for u in req:
                for s in range(len(instance.shifts)):
                    if (d, u, s) not in forbidden:
                        opts.append((u, s))
            options.append(opts)
    return options


def enumerate_schedules(
    instance: Instance,
    nurse: NurseContract,
    duals,
    branching=None,
    *,
    close_trailing: bool = True,
    guard: int = 10**6,
):
    """Exhaustive minimum-reduced-cost schedule for one nurse.

    Walks every hard-feasible assignment vector, accumulating counters and
    automaton states day by day, and returns ``(min_reduced_cost,
    schedule)``.  Guarded by the worst-case enumeration size
    ``(|U|*|S|+1) ** num_days``.
    """
    size = (len(instance.units) * len(instance.shifts) + 1) ** instance.num_days
    if size > guard:
        raise EnumerationGuardError(
            f"enumeration would visit up to {size} schedules (guard {guard})"
        )

    work_dfa = dfa_mod.build_consecutive_dfa(nurse.consec_work)
    rest_dfa = dfa_mod.build_consecutive_dfa(nurse.consec_rest)
    options = _day_options(instance, nurse, branching, nurse.nurse_id)
    units = sorted(nurse.required_units)
    num_shifts = len(instance.shifts)
    lam = duals.cover

    # Per-day marginal cost of each option: requests, preference, duals.
    day_cost: list[dict[tuple[int, int] | None, float]] = []
    for d in range(instance.num_days):
        on_d, off_d = nurse.day_requests.get(d, (0, 0))
        son = [nurse.shift_requests.get((d, s), (0, 0))[0] for s in range(num_shifts)]
        soff = [nurse.shift_requests.get((d, s), (0, 0))[1] for s in range(num_shifts)]
        all_on = sum(son)
        costs: dict[tuple[int, int] | None, float] = {None: on_d + all_on}
        for u in units:
            for s in range(num_shifts):
                c = off_d + (all_on - son[s]) + soff[s]
                if u not in nurse.preferred_units:
                    c += nurse.non_preferred_cost.get((d, u), 0)
                costs[(u, s)] = c - lam.get((d, u, s), 0)
        day_cost.append(costs)

    best_cost = None
    best_days = None
    days: list[tuple[int, int] | None] = [None] * instance.num_days
    unit_counts = {u: 0 for u in units}

    def finish_cost(work_total, wk_count, ws, rs):
        cost = nurse.total_days.penalty(work_total)
        for u in units:
            cost += nurse.unit_spec(u).penalty(unit_counts[u])
        cost += nurse.weekend_cost * max(0, wk_count - nurse.max_weekends)
        if close_trailing:
            cost += work_dfa.closure_cost[ws] + rest_dfa.closure_cost[rs]
        return cost

    def rec(d, prev_shift, acc, work_total, wk_count, wk_bit, ws, rs):
        nonlocal best_cost, best_days
        if d == instance.num_days:
            total = acc + finish_cost(work_total, wk_count, ws, rs)
            if best_cost is None or total < best_cost:
                best_cost = total
                best_days = tuple(days)
            return
        if d % 7 == 0:
            wk_bit = 0
        for opt in options[d]:
            if opt is None:
                ws2, wc = work_dfa.transitions[ws][0]
                rs2, rc = rest_dfa.transitions[rs][1]
                days[d] = None
                rec(d + 1, None, acc + day_cost[d][None] + wc + rc, work_total, wk_count, wk_bit, ws2, rs2)
            else:
                u, s = opt
                if prev_shift is not None and not instance.rotation_ok(prev_shift, s):
                    continue
                ws2, wc = work_dfa.transitions[ws][1]
                rs2, rc = rest_dfa.transitions[rs][0]
                wk2, bit2 = wk_count, wk_bit
                if d % 7 >= 5:
                    if not wk_bit:
                        wk2 += 1
                    bit2 = 1
                days[d] = opt
                unit_counts[u] += 1
                rec(d + 1, s, acc + day_cost[d][opt] + wc + rc, work_total + 1, wk2, bit2, ws2, rs2)
                unit_counts[u] -= 1

    rec(0, None, 0, 0, 0, 0, work_dfa.initial_state, rest_dfa.initial_state)
    if best_days is None:
        raise InfeasibleSubproblemError(f"nurse {nurse.nurse_id}: no feasible schedule")
    reduced = best_cost - duals.nurse.get(nurse.nurse_id, 0)
    schedule = Schedule(best_days)
    return reduced, schedule


# ---------------------------------------------------------------------------
# Exhaustive roster search


def _all_schedules(instance, nurse, close_trailing, max_count):
    """All hard-feasible schedules of one nurse with their penalties."""
    out = []
    options = _day_options(instance, nurse, None, nurse.nurse_id)

    days: list[tuple[int, int] | None] = [None] * instance.num_days

    def rec(d, prev_shift):
        if d == instance.num_days:
            if len(out) >= max_count:
                raise EnumerationGuardError(
                    f"nurse {nurse.nurse_id} alone has more than {max_count} schedules"
                )
            schedule = Schedule(tuple(days))
            cost = schedule_penalty(
                instance, nurse, schedule, close_trailing=close_trailing, check_hard=False
            ).total
            out.append((Schedule(tuple(days), penalty=cost), cost))
            return
        for opt in options[d]:
            if opt is not None:
                if prev_shift is not None and not instance.rotation_ok(prev_shift, opt[1]):
                    continue
                days[d] = opt
                rec(d + 1, opt[1])
            else:
                days[d] = None
                rec(d + 1, None)

    rec(0, None)
    return out


def brute_force_roster(
    instance: Instance, *, close_trailing: bool = True, guard: int = 10**7
):
    """Exact minimum-cost roster by exhausting all schedule combinations.

    Returns ``(optimum, roster)``.  Guarded by the product of per-nurse
    schedule counts.
    """
    import numpy as np

    per_nurse = []
    total = 1
    for nurse in instance.nurses:
        schedules = _all_schedules(instance, nurse, close_trailing, guard // total + 1)
        per_nurse.append(schedules)
        total *= max(1, len(schedules))
        if total > guard:
            raise EnumerationGuardError(
                f"roster enumeration exceeds guard {guard} (at least {total} combinations)"
            )

    slots = sorted(instance.cover)
    slot_index = {key: i for i, key in enumerate(slots)}
    need = np.array([instance.cover[k] for k in slots], dtype=np.int64)
    under_cost = np.array([instance.understaff_cost[k] for k in slots], dtype=np.int64)

    incidence = []
    for schedules in per_nurse:
        rows = np.zeros((len(schedules), len(slots)), dtype=np.int64)
        for i, (schedule, _cost) in enumerate(schedules):
            for d, u, s in schedule.assignments():
                rows[i, slot_index[(d, u, s)]] += 1
        incidence.append(rows)

    # Suffix minima of pure schedule cost let us prune partial combinations.
    suffix_min = [0] * (len(per_nurse) + 1)
    for i in range(len(per_nurse) - 1, -1, -1):
        suffix_min[i] = suffix_min[i + 1] + min(c for _, c in per_nurse[i])

    best_value = None
    best_pick: list[int] = []
    pick = [0] * len(per_nurse)
    coverage = np.zeros(len(slots), dtype=np.int64)

    def rec(n, acc):
        nonlocal best_value, best_pick, coverage
        if best_value is not None and acc + suffix_min[n] >= best_value:
            return
        if n == len(per_nurse):
            value = acc + int((np.maximum(need - coverage, 0) * under_cost).sum())
            if best_value is None or value < best_value:
                best_value = value
                best_pick = pick.copy()
            return
        for i, (_schedule, cost) in enumerate(per_nurse[n]):
            pick[n] = i
            coverage += incidence[n][i]
            rec(n + 1, acc + cost)
            coverage -= incidence[n][i]

    rec(0, 0)
    assert best_value is not None
    roster = Roster(
        {
            instance.nurses[n].nurse_id: per_nurse[n][best_pick[n]][0]
            for n in range(len(per_nurse))
        }
    )
    return best_value, roster

"""Shared test fixtures and independent oracles.

The oracles here are deliberately written from first principles (run
arithmetic over bit vectors, a dense tableau simplex) so that the
production code is checked against a second, unrelated derivation.
"""

from __future__ import annotations

import random

import numpy as np

from nurse_bnp.instance import (
    Instance,
    NurseContract,
    RangedCounterSpec,
    Schedule,
    SeriesSpec,
)


# ---------------------------------------------------------------------------
# Stint arithmetic: the reference for automaton costs.


def stint_cost(spec: SeriesSpec, bits, close_at_end: bool) -> int:
    """Cost of a bit vector by splitting it into maximal runs of 1s.

    Each run of length L costs ``excess * max(0, L - max_len)``; a run
    ended by a 0 also costs ``shortfall * max(0, min_len - L)``, and the
    trailing run's shortfall is charged only when ``close_at_end``.
    """
    total = 0
    run = 0
    for b in bits:
        if b:
            run += 1
        else:
            if run:
                total += spec.excess_cost * max(0, run - spec.max_len)
                total += spec.shortfall_cost * max(0, spec.min_len - run)
            run = 0
    if run:
        total += spec.excess_cost * max(0, run - spec.max_len)
        if close_at_end:
            total += spec.shortfall_cost * max(0, spec.min_len - run)
    return total


# ---------------------------------------------------------------------------
# Instance factories for small deterministic test problems.


def neutral_contract(
    nurse_id: str,
    num_days: int,
    units=(0,),
    preferred=None,
    **overrides,
) -> NurseContract:
    """Contract where nothing is penalised unless a field is overridden."""
    units = frozenset(units)
    fields = dict(
        nurse_id=nurse_id,
        required_units=units,
        preferred_units=frozenset(preferred) if preferred is not None else units,
        total_days=RangedCounterSpec(0, num_days, 0, 0),
        unit_days={},
        max_weekends=num_days // 7 + 1,
        weekend_cost=0,
        consec_work=SeriesSpec(1, num_days, 0, 0),
        consec_rest=SeriesSpec(1, num_days, 0, 0),
        day_requests={},
        shift_requests={},
        non_preferred_cost={},
    )
    fields.update(overrides)
    return NurseContract(**fields)


def small_instance(
    num_days: int,
    num_units: int = 1,
    num_shifts: int = 1,
    nurses=None,
    cover=None,
    understaff=30,
    rotations=(),
) -> Instance:
    """Hand-rolled instance; horizon need not be whole weeks."""
    units = tuple(f"u{i}" for i in range(num_units))
    shifts = ("early", "late", "night")[:num_shifts]
    if nurses is None:
        nurses = (neutral_contract("n0", num_days, units=range(num_units)),)
    cover_map = {}
    under_map = {}
    for d in range(num_days):
        for u in range(num_units):
            for s in range(num_shifts):
                cover_map[(d, u, s)] = 0 if cover is None else cover.get((d, u, s), 0)
                under_map[(d, u, s)] = understaff
    return Instance(
        num_days=num_days,
        units=units,
        shifts=shifts,
        nurses=tuple(nurses),
        cover=cover_map,
        understaff_cost=under_map,
        forbidden_rotations=frozenset(rotations),
    )


def random_small_instance(rng: random.Random, *, max_days=7, max_units=2, max_shifts=2) -> Instance:
    """Random tiny instance with noisy penalties for cross-checking."""
    num_days = rng.randint(3, max_days)
    num_units = rng.randint(1, max_units)
    num_shifts = rng.randint(1, max_shifts)
    rotations = set()
    if num_shifts >= 2 and rng.random() < 0.7:
        rotations.add((1, 0))
    nurses = []
    for i in range(rng.randint(1, 2)):
        required = sorted(rng.sample(range(num_units), rng.randint(1, num_units)))
        preferred = [required[0]]
        total = RangedCounterSpec(
            rng.randint(0, num_days // 2),
            rng.randint(num_days // 2, num_days),
            rng.choice([0, 10, 20]),
            rng.choice([0, 10, 20]),
        )
        unit_days = {}
        for u in required:
            if rng.random() < 0.7:
                lo = rng.randint(0, num_days // 2)
                unit_days[u] = RangedCounterSpec(
                    lo, rng.randint(lo, num_days), rng.choice([0, 5, 10]), rng.choice([0, 5, 10])
                )
        day_requests = {}
        for d in range(num_days):
            roll = rng.random()
            if roll < 0.15:
                day_requests[d] = (rng.choice([5, 10]), 0)
            elif roll < 0.3:
                day_requests[d] = (0, rng.choice([5, 10]))
        shift_requests = {}
        for d in range(num_days):
            for s in range(num_shifts):
                if rng.random() < 0.15:
                    shift_requests[(d, s)] = (rng.choice([0, 5]), rng.choice([0, 5]))
        non_pref = {}
        for u in required:
            if u not in preferred:
                for d in range(num_days):
                    non_pref[(d, u)] = 5
        nurses.append(
            NurseContract(
                nurse_id=f"n{i}",
                required_units=frozenset(required),
                preferred_units=frozenset(preferred),
                total_days=total,
                unit_days=unit_days,
                max_weekends=rng.randint(0, 2),
                weekend_cost=rng.choice([0, 15, 30]),
                consec_work=SeriesSpec(
                    rng.randint(1, 2), rng.randint(2, max(2, num_days - 1)), 15, 15
                ),
                consec_rest=SeriesSpec(
                    rng.randint(1, 2), rng.randint(2, max(2, num_days - 1)), 15, 15
                ),
                day_requests=day_requests,
                shift_requests=shift_requests,
                non_preferred_cost=non_pref,
            )
        )
    cover = {}
    for d in range(num_days):
        for u in range(num_units):
            for s in range(num_shifts):
                cover[(d, u, s)] = rng.choice([0, 0, 1, 1, 2])
    return small_instance(
        num_days,
        num_units,
        num_shifts,
        nurses=nurses,
        cover=cover,
        understaff=rng.choice([10, 30]),
        rotations=rotations,
    )


def random_schedule(rng: random.Random, instance: Instance, nurse: NurseContract) -> Schedule:
    """Random hard-feasible schedule via a per-day filtered choice."""
    days = []
    prev = None
    req = sorted(nurse.required_units)
    for d in range(instance.num_days):
        options = [None]
        for u in req:
            for s in range(len(instance.shifts)):
                if prev is None or instance.rotation_ok(prev, s):
                    options.append((u, s))
        pick = rng.choice(options)
        days.append(pick)
        prev = None if pick is None else pick[1]
    return Schedule(tuple(days))


# ---------------------------------------------------------------------------
# Independent LP oracle: dense two-phase tableau simplex.


def tableau_simplex(a_mat, b_vec, c_vec, n_ge_rows):
    """Solve min c x s.t. first ``n_ge_rows`` rows >= b, rest == b, x >= 0.

    Textbook two-phase full-tableau method with Bland's rule throughout.
    Returns (objective, duals).  Independent of the production solver:
    no shared code, no basis inverse, no warm starts.
    """
    a = np.array(a_mat, dtype=float)
    b = np.array(b_vec, dtype=float)
    c = np.array(c_vec, dtype=float)
    m, n = a.shape

    # Surplus columns for the >= rows, then artificials for every row.
    surplus = np.zeros((m, n_ge_rows))
    for i in range(n_ge_rows):
        surplus[i, i] = -1.0
    full = np.hstack([a, surplus, np.eye(m)])
    cost_full = np.concatenate([c, np.zeros(n_ge_rows), np.zeros(m)])
    art_start = n + n_ge_rows
    basis = list(range(art_start, art_start + m))

    tableau = np.hstack([full, b.reshape(-1, 1)])

    def pivot(row, col):
        tableau[row] /= tableau[row, col]
        for r in range(m):
            if r != row and abs(tableau[r, col]) > 1e-12:
                tableau[r] -= tableau[r, col] * tableau[row]
        basis[row] = col

    def run_phase(cost, allowed):
        while True:
            cb = cost[basis]
            z = cb @ tableau[:, :-1]
            rc = cost[: tableau.shape[1] - 1] - z
            entering = -1
            for j in range(allowed):  # Bland: first eligible index
                if j in basis:
                    continue
                if rc[j] < -1e-9:
                    entering = j
                    break
            if entering < 0:
                return
            rows = [i for i in range(m) if tableau[i, entering] > 1e-9]
            if not rows:
                raise RuntimeError("unbounded")
            ratios = [(tableau[i, -1] / tableau[i, entering], basis[i], i) for i in rows]
            ratios.sort()
            pivot(ratios[0][2], entering)

    # Phase 1: drive artificials to zero.
    phase1_cost = np.zeros(tableau.shape[1] - 1)
    phase1_cost[art_start:] = 1.0
    run_phase(phase1_cost, tableau.shape[1] - 1)
    if phase1_cost[basis] @ tableau[:, -1] > 1e-7:
        raise RuntimeError("infeasible")

    # Phase 2 on the real objective; artificials may not re-enter.
    run_phase(cost_full, art_start)

    x = np.zeros(tableau.shape[1] - 1)
    for i, j in enumerate(basis):
        x[j] = tableau[i, -1]
    objective = float(cost_full @ x)
    # Duals read off the artificial columns: y_i = 0 - rc(artificial_i).
    cb = cost_full[basis]
    z = cb @ tableau[:, :-1]
    duals = np.array([z[art_start + i] for i in range(m)])
    return objective, duals

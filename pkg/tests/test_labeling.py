import random

import pytest

from nurse_bnp.dfa import build_consecutive_dfa
from nurse_bnp.graphs import BranchConstraintSet, DualValues, build_graph
from nurse_bnp.instance import RangedCounterSpec, Schedule, SeriesSpec
from nurse_bnp.labeling import (
    DominanceContext,
    DominanceVerdict,
    ExtendContext,
    Label,
    PricingConfig,
    Variant,
    _remaining_weekends,
    dfa_diff_bounds,
    dominates,
    extend,
    penalty_diff_bounds,
    solve_pricing,
)
from nurse_bnp.oracle import enumerate_schedules, schedule_penalty

from helpers import neutral_contract, random_small_instance, small_instance

ALL_VARIANTS = [Variant.DPB, Variant.DPU, Variant.DPP, Variant.DPPI]


def _pen(spec, x):
    return spec.shortfall_cost * max(0, spec.lo - x) + spec.excess_cost * max(0, x - spec.hi)


# ---------------------------------------------------------------------------
# Counter bounds


def test_penalty_diff_bounds_at_zero_extension():
    spec = RangedCounterSpec(3, 6, 10, 10)
    assert penalty_diff_bounds(spec, 1, 2, 0) == (10, 10)


def test_penalty_diff_bounds_with_slack():
    spec = RangedCounterSpec(3, 6, 10, 10)
    lo, hi = penalty_diff_bounds(spec, 1, 2, 10)
    assert hi == _pen(spec, 1) - _pen(spec, 2) == 10
    assert lo == _pen(spec, 11) - _pen(spec, 12) == -10


def test_penalty_diff_bounds_equal_counters():
    spec = RangedCounterSpec(2, 9, 7, 13)
    assert penalty_diff_bounds(spec, 4, 4, 5) == (0, 0)


def test_case_formulas_below_minimum_and_saturated():
    # Both counters under the minimum with no room to extend: the
    # difference is exactly (r2 - r1) * shortfall_cost.
    spec = RangedCounterSpec(5, 8, 11, 17)
    lo, hi = penalty_diff_bounds(spec, 1, 3, 0)
    assert lo == hi == (3 - 1) * 11
    # With enough extension days both counters saturate past the maximum:
    # the difference settles at (r1 - r2) * excess_cost.
    lo, hi = penalty_diff_bounds(spec, 1, 3, 20)
    assert lo == (1 - 3) * 17
    assert hi == (3 - 1) * 11


def test_monotonicity_and_containment_sampled():
    rng = random.Random(17)
    for _ in range(300):
        spec = RangedCounterSpec(
            rng.randint(0, 6),
            rng.randint(6, 12),
            rng.choice([0, 5, 10, 20]),
            rng.choice([0, 5, 10, 20]),
        )
        r1, r2 = rng.randint(0, 10), rng.randint(0, 10)
        max_extra = rng.randint(0, 12)
        lo, hi = penalty_diff_bounds(spec, r1, r2, max_extra)
        values = [_pen(spec, r1 + e) - _pen(spec, r2 + e) for e in range(max_extra + 1)]
        assert min(values) == lo
        assert max(values) == hi
        if r1 < r2:
            assert all(a >= b for a, b in zip(values, values[1:]))
        elif r1 > r2:
            assert all(a <= b for a, b in zip(values, values[1:]))


def test_pd_symmetry():
    rng = random.Random(23)
    for _ in range(200):
        spec = RangedCounterSpec(rng.randint(0, 5), rng.randint(5, 9), 10, 20)
        r1, r2 = rng.randint(0, 8), rng.randint(0, 8)
        m = rng.randint(0, 9)
        lo, hi = penalty_diff_bounds(spec, r1, r2, m)
        lo2, hi2 = penalty_diff_bounds(spec, r2, r1, m)
        assert (lo2, hi2) == (-hi, -lo)


# ---------------------------------------------------------------------------
# Automaton bounds


def test_dfa_diff_bounds_equal_states():
    dfa = build_consecutive_dfa(SeriesSpec(2, 6, 10, 10))
    assert dfa_diff_bounds(dfa, 3, 3, 9) == (0, 0)


def test_dfa_diff_bounds_break_cases():
    dfa = build_consecutive_dfa(SeriesSpec(2, 6, 10, 10))
    # From a fresh state versus a one-day stint the difference swings
    # between -10 (long runs: the older stint caps out a day earlier)
    # and +10 (work one day then break).
    assert dfa_diff_bounds(dfa, 0, 1, 12) == (-10, 10)


def test_dfa_diff_bounds_closure_only():
    dfa = build_consecutive_dfa(SeriesSpec(2, 6, 10, 10))
    assert dfa_diff_bounds(dfa, 1, 0, 0, close_at_end=True) == (10, 10)
    assert dfa_diff_bounds(dfa, 1, 0, 0, close_at_end=False) == (0, 0)


def test_dfa_diff_bounds_contain_all_continuations():
    rng = random.Random(5)
    dfa = build_consecutive_dfa(SeriesSpec(2, 4, 10, 15))
    from nurse_bnp.dfa import step

    def run(state, bits, close):
        total = 0
        for b in bits:
            state, c = step(dfa, state, b)
            total += c
        if close:
            total += dfa.closure_cost[state]
        return total

    for _ in range(200):
        s1, s2 = rng.randrange(5), rng.randrange(5)
        n = rng.randint(0, 6)
        lo, hi = dfa_diff_bounds(dfa, s1, s2, n)
        for _ in range(40):
            bits = [rng.randint(0, 1) for _ in range(n)]
            diff = run(s1, bits, True) - run(s2, bits, True)
            assert lo - 1e-9 <= diff <= hi + 1e-9


def test_dfa_symmetry():
    dfa = build_consecutive_dfa(SeriesSpec(3, 5, 7, 9))
    for s1 in range(6):
        for s2 in range(6):
            lo, hi = dfa_diff_bounds(dfa, s1, s2, 6)
            lo2, hi2 = dfa_diff_bounds(dfa, s2, s1, 6)
            assert (lo2, hi2) == (-hi, -lo)


# ---------------------------------------------------------------------------
# Pairwise dominance verdicts


def _label(contract, node, cost, work, units, weekends=0, ws=0, rs=0, seq=0):
    return Label(cost, work, units, weekends, ws, rs, 0, node, seq)


def _ctx(contract, remaining_days=10, remaining_weekends=2):
    return DominanceContext(remaining_days, remaining_weekends, contract)


def test_identical_labels_tie_break():
    contract = neutral_contract("n0", 10)
    a = _label(contract, 3, 5, 2, (2,), seq=1)
    b = _label(contract, 3, 5, 2, (2,), seq=2)
    ctx = _ctx(contract)
    for variant in ALL_VARIANTS:
        assert dominates(a, b, ctx, variant) is DominanceVerdict.FIRST_DOMINATES
    # Swapped, the earlier label must still be the survivor.
    assert dominates(b, a, ctx, Variant.DPP) is DominanceVerdict.SECOND_DOMINATES


def test_two_sided_beats_one_sided_direction():
    contract = neutral_contract("n0", 10, total_days=RangedCounterSpec(3, 6, 10, 10))
    high = _label(contract, 0, 5, 4, (4,), seq=1)
    low = _label(contract, 0, 0, 4, (4,), seq=2)
    ctx = _ctx(contract)
    assert dominates(high, low, ctx, Variant.DPP) is DominanceVerdict.SECOND_DOMINATES
    assert dominates(high, low, ctx, Variant.DPU) is DominanceVerdict.INCOMPARABLE


def test_cheap_label_with_worse_counter_still_dominates():
    contract = neutral_contract("n0", 20, total_days=RangedCounterSpec(3, 6, 10, 10))
    a = _label(contract, 0, 0, 4, (4,), seq=1)
    b = _label(contract, 0, 100, 5, (5,), seq=2)
    ctx = _ctx(contract, remaining_days=14)
    assert dominates(a, b, ctx, Variant.DPP) is DominanceVerdict.FIRST_DOMINATES
    assert dominates(a, b, ctx, Variant.DPU) is DominanceVerdict.FIRST_DOMINATES
    # Equality rules cannot compare different counters at all.
    assert dominates(a, b, ctx, Variant.DPB) is DominanceVerdict.INCOMPARABLE


def test_equality_rules_weekend_direction():
    contract = neutral_contract("n0", 10, max_weekends=1, weekend_cost=30)
    a = _label(contract, 2, 7, 3, (3,), weekends=0, seq=1)
    b = _label(contract, 2, 7, 3, (3,), weekends=1, seq=2)
    ctx = _ctx(contract)
    assert dominates(a, b, ctx, Variant.DPB) is DominanceVerdict.FIRST_DOMINATES
    assert dominates(b, a, ctx, Variant.DPB) is DominanceVerdict.SECOND_DOMINATES


def test_conservative_dfa_mode_requires_equal_states():
    contract = neutral_contract("n0", 10, consec_work=SeriesSpec(2, 4, 10, 10))
    a = _label(contract, 2, 0, 1, (1,), ws=1, seq=1)
    b = _label(contract, 2, 50, 1, (1,), ws=2, seq=2)
    ctx = DominanceContext(6, 1, contract, exact_dfa_bounds=False)
    assert dominates(a, b, ctx, Variant.DPP) is DominanceVerdict.INCOMPARABLE
    exact = DominanceContext(6, 1, contract, exact_dfa_bounds=True)
    assert dominates(a, b, exact, Variant.DPP) is DominanceVerdict.FIRST_DOMINATES


# ---------------------------------------------------------------------------
# Extension semantics


def test_extend_into_off_node_costs_nothing():
    inst = small_instance(3, 1, 1)
    nurse = inst.nurses[0]
    graph = build_graph(inst, nurse, DualValues.zero(inst))
    ctx = ExtendContext.for_graph(graph, nurse)
    start = ctx.initial_label()
    off = [i for i in graph.layers[0] if not graph.is_work(i)][0]
    child = extend(start, off, ctx, seq=1)
    assert child.cost == 0
    assert child.work_days == 0
    assert child.work_state == 0
    assert child.rest_state == 1


def test_extend_at_cap_charges_excess():
    nurse = neutral_contract("n0", 8, consec_work=SeriesSpec(2, 6, 0, 45))
    inst = small_instance(8, 1, 1, nurses=[nurse])
    graph = build_graph(inst, nurse, DualValues.zero(inst))
    ctx = ExtendContext.for_graph(graph, nurse)
    work_node = [i for i in graph.layers[3] if graph.is_work(i)][0]
    label = Label(0, 6, (6,), 0, 6, 0, 0, graph.layers[2][0], seq=0)
    child = extend(label, work_node, ctx, seq=1)
    assert child.cost == 45
    assert child.work_state == 6


def test_extend_weekend_increment_on_sunday():
    nurse = neutral_contract("n0", 7)
    inst = small_instance(7, 1, 1, nurses=[nurse])
    graph = build_graph(inst, nurse, DualValues.zero(inst))
    ctx = ExtendContext.for_graph(graph, nurse)
    sat_off = [i for i in graph.layers[5] if not graph.is_work(i)][0]
    sun_work = [i for i in graph.layers[6] if graph.is_work(i)][0]
    label = Label(0, 2, (2,), 0, 0, 3, 0, sat_off, seq=0)
    child = extend(label, sun_work, ctx, seq=1)
    assert child.weekends == 1
    assert child.weekend_bit == 1
    # A second weekend day no longer increments.
    sat_work = [i for i in graph.layers[5] if graph.is_work(i)][0]
    label2 = Label(0, 2, (2,), 1, 1, 0, 1, sat_work, seq=0)
    child2 = extend(label2, sun_work, ctx, seq=1)
    assert child2.weekends == 1


def test_extend_sink_charges_closure_and_counters():
    nurse = neutral_contract(
        "n0",
        3,
        total_days=RangedCounterSpec(2, 3, 20, 0),
        consec_work=SeriesSpec(2, 3, 15, 0),
    )
    inst = small_instance(3, 1, 1, nurses=[nurse])
    graph = build_graph(inst, nurse, DualValues.zero(inst))
    ctx = ExtendContext.for_graph(graph, nurse)
    last_work = [i for i in graph.layers[2] if graph.is_work(i)][0]
    label = Label(0, 1, (1,), 0, 1, 0, 0, last_work, seq=0)
    child = extend(label, graph.sink, ctx, seq=1)
    # Shortfall of one working day (20) plus an open one-day stint (15).
    assert child.cost == 35


# ---------------------------------------------------------------------------
# Full pricing runs


def test_single_day_negative_dual():
    inst = small_instance(1, 1, 1)
    nurse = inst.nurses[0]
    duals = DualValues(cover={(0, 0, 0): 5.0}, nurse={"n0": 2.0})
    graph = build_graph(inst, nurse, duals)
    for variant in ALL_VARIANTS:
        result = solve_pricing(graph, nurse, duals, variant)
        assert result.reduced_cost == -7
        assert result.best_schedule.days == ((0, 0),)


def test_pricing_matches_enumeration_on_random_instances():
    rng = random.Random(99)
    for trial in range(25):
        inst = random_small_instance(rng)
        nurse = inst.nurses[0]
        duals = DualValues(
            cover={
                (d, u, s): rng.randint(0, 30)
                for d in range(inst.num_days)
                for u in range(len(inst.units))
                for s in range(len(inst.shifts))
            },
            nurse={nurse.nurse_id: rng.randint(0, 10)},
        )
        expect, _ = enumerate_schedules(inst, nurse, duals)
        graph = build_graph(inst, nurse, duals)
        for variant in ALL_VARIANTS:
            result = solve_pricing(graph, nurse, duals, variant)
            assert result.reduced_cost == expect, (trial, variant)


def test_variant_label_ordering():
    rng = random.Random(31)
    from nurse_bnp.instance import generate_instance

    for seed in (1, 2, 3):
        inst = generate_instance(4, 1, 2, seed=seed)
        nurse = inst.nurses[rng.randrange(len(inst.nurses))]
        duals = DualValues.zero(inst)
        graph = build_graph(inst, nurse, duals)
        counts = {}
        costs = set()
        for variant in ALL_VARIANTS:
            result = solve_pricing(graph, nurse, duals, variant)
            counts[variant] = result.labels_extended
            costs.add(result.reduced_cost)
        assert len(costs) == 1
        assert counts[Variant.DPPI] <= counts[Variant.DPP]
        assert counts[Variant.DPP] <= counts[Variant.DPU]
        assert counts[Variant.DPU] <= counts[Variant.DPB]


def test_reduced_cost_consistent_with_oracle_penalty():
    rng = random.Random(8)
    inst = random_small_instance(rng)
    nurse = inst.nurses[0]
    duals = DualValues(
        cover={
            (d, u, s): rng.randint(0, 20)
            for d in range(inst.num_days)
            for u in range(len(inst.units))
            for s in range(len(inst.shifts))
        },
        nurse={nurse.nurse_id: 3},
    )
    graph = build_graph(inst, nurse, duals)
    result = solve_pricing(graph, nurse, duals, Variant.DPP)
    schedule = result.best_schedule
    cost = schedule_penalty(inst, nurse, schedule).total
    lam = sum(duals.cover.get(key, 0) for key in schedule.assignments())
    assert result.reduced_cost == cost - lam - 3


def test_forced_branching_in_pricing():
    inst = small_instance(3, 1, 2)
    nurse = inst.nurses[0]
    branching = BranchConstraintSet(forced=frozenset({("n0", 1, 0, 1)}))
    duals = DualValues.zero(inst)
    graph = build_graph(inst, nurse, duals, branching)
    result = solve_pricing(graph, nurse, duals, Variant.DPPI)
    assert result.best_schedule.days[1] == (0, 1)


def test_deadline_reports_timeout():
    import time as _time

    inst = small_instance(7, 2, 2, nurses=[neutral_contract("n0", 7, units=(0, 1))])
    nurse = inst.nurses[0]
    graph = build_graph(inst, nurse, DualValues.zero(inst))
    config = PricingConfig(deadline=_time.monotonic() - 1)
    result = solve_pricing(graph, nurse, DualValues.zero(inst), Variant.DPB, config)
    assert result.timed_out
    assert result.best_schedule is None


# ---------------------------------------------------------------------------
# Dominance soundness: exhaustive completion check


def _completion_costs(label, graph, ctx):
    """Final costs of every completion of ``label`` to the sink."""
    out = []

    def rec(lab):
        if lab.node == graph.sink:
            out.append(lab.cost)
            return
        for target in graph.succ[lab.node]:
            rec(extend(lab, target, ctx))

    rec(label)
    return out


def _labels_by_node(graph, ctx, duals_seed=0):
    """All labels of a no-pruning run, bucketed per node."""
    buckets = {i: [] for i in range(graph.num_nodes)}
    start = ctx.initial_label()
    seq = 1
    frontier = [start]
    buckets[0].append(start)
    while frontier:
        new = []
        for lab in frontier:
            for target in graph.succ[lab.node]:
                child = extend(lab, target, ctx, seq)
                seq += 1
                buckets[target].append(child)
                if target != graph.sink:
                    new.append(child)
        frontier = new
    return buckets


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_dominance_soundness_exhaustive(variant):
    rng = random.Random(hash(variant.value) % 1000)
    checked = 0
    while checked < 120:
        inst = random_small_instance(rng, max_days=5, max_units=2, max_shifts=2)
        nurse = inst.nurses[0]
        duals = DualValues(
            cover={
                (d, u, s): rng.randint(0, 25)
                for d in range(inst.num_days)
                for u in range(len(inst.units))
                for s in range(len(inst.shifts))
            },
            nurse={},
        )
        graph = build_graph(inst, nurse, duals)
        ctx = ExtendContext.for_graph(graph, nurse)
        buckets = _labels_by_node(graph, ctx)
        for d, layer in enumerate(graph.layers):
            dctx = DominanceContext(
                remaining_days=graph.num_days - 1 - d,
                remaining_weekends=_remaining_weekends(graph.num_days, d, False),
                contract=nurse,
            )
            for node in layer:
                labels = buckets[node]
                if len(labels) < 2:
                    continue
                for _ in range(3):
                    a, b = rng.sample(labels, 2)
                    verdict = dominates(a, b, dctx, variant)
                    if verdict is DominanceVerdict.INCOMPARABLE:
                        continue
                    first, second = (a, b) if verdict is DominanceVerdict.FIRST_DOMINATES else (b, a)
                    cf = _completion_costs(first, graph, ctx)
                    cs = _completion_costs(second, graph, ctx)
                    assert all(x <= y + 1e-9 for x, y in zip(cf, cs))
                    checked += 1


def test_engine_matches_pairwise_dominates():
    from nurse_bnp.labeling import _BoundTables, _prune_bucket

    rng = random.Random(77)
    for _ in range(40):
        inst = random_small_instance(rng, max_days=5, max_units=2, max_shifts=2)
        nurse = inst.nurses[0]
        graph = build_graph(inst, nurse, DualValues.zero(inst))
        ctx = ExtendContext.for_graph(graph, nurse)
        buckets = _labels_by_node(graph, ctx)
        tables = _BoundTables(ctx, graph.num_days, graph.num_days // 7 + 1)
        for d, layer in enumerate(graph.layers):
            remaining = graph.num_days - 1 - d
            for node in layer:
                labels = buckets[node]
                if len(labels) < 2:
                    continue
                is_off = not graph.is_work(node)
                rw = _remaining_weekends(graph.num_days, d, is_off)
                for variant in (Variant.DPU, Variant.DPP):
                    survivors, _ = _prune_bucket(labels, variant, tables, remaining, rw)
                    dctx = DominanceContext(remaining, rw, nurse)
                    expected = []
                    for i, lab in enumerate(labels):
                        dead = False
                        for j, other in enumerate(labels):
                            if i == j:
                                continue
                            if dominates(other, lab, dctx, variant) is DominanceVerdict.FIRST_DOMINATES:
                                dead = True
                            elif dominates(lab, other, dctx, variant) is DominanceVerdict.SECOND_DOMINATES:
                                dead = True
                        if not dead:
                            expected.append(lab)
                    assert [id(x) for x in survivors] == [id(x) for x in expected]

import random

import pytest

from nurse_bnp.graphs import BranchConstraintSet, DualValues, build_graph
from nurse_bnp.instance import InfeasibleSubproblemError, generate_instance
from nurse_bnp.oracle import schedule_penalty
from nurse_bnp.instance import Schedule

from helpers import neutral_contract, small_instance


def test_all_zero_costs_when_nothing_penalised():
    inst = small_instance(3, 2, 2, nurses=[neutral_contract("n0", 3, units=(0, 1))])
    graph = build_graph(inst, inst.nurses[0], DualValues.zero(inst))
    assert all(c == 0 for c in graph.entry_cost)


def test_node_count_formula():
    inst = small_instance(4, 2, 2, nurses=[neutral_contract("n0", 4, units=(0, 1))])
    graph = build_graph(inst, inst.nurses[0], DualValues.zero(inst))
    # D * (U*S + 1) day nodes plus source and sink.
    assert graph.num_nodes == 4 * (2 * 2 + 1) + 2


def test_rotation_arcs_removed():
    inst = small_instance(2, 1, 3, rotations={(2, 0), (2, 1)})  # night->early/late
    graph = build_graph(inst, inst.nurses[0], DualValues.zero(inst))
    night = [i for i in graph.layers[0] if graph.shift[i] == 2][0]
    succ_shifts = {graph.shift[j] for j in graph.succ[night]}
    assert 0 not in succ_shifts
    assert 1 not in succ_shifts
    assert 2 in succ_shifts
    assert -1 in succ_shifts  # the day-off node stays reachable


def test_arcs_are_day_layered():
    inst = generate_instance(3, 1, 2, seed=9)
    nurse = inst.nurses[0]
    graph = build_graph(inst, nurse, DualValues.zero(inst))
    for i in range(graph.num_nodes):
        for j in graph.succ[i]:
            assert graph.day[j] == graph.day[i] + 1


def test_skill_limits_nodes():
    nurse = neutral_contract("n0", 2, units=(1,))
    inst = small_instance(2, 3, 2, nurses=[nurse])
    graph = build_graph(inst, nurse, DualValues.zero(inst))
    units_used = {graph.unit[i] for layer in graph.layers for i in layer}
    assert units_used == {-1, 1}


def test_path_cost_identity_with_oracle_terms():
    rng = random.Random(12)
    for seed in range(20):
        inst = generate_instance(3, 1, 2, seed=seed)
        nurse = inst.nurses[rng.randrange(len(inst.nurses))]
        duals = DualValues.seeded_random(inst, seed)
        graph = build_graph(inst, nurse, duals)

        # Walk a random source-to-sink path, summing entry costs.
        node = 0
        total = 0.0
        days: list = []
        while node != graph.sink:
            node = rng.choice(graph.succ[node])
            if node != graph.sink:
                total += graph.entry_cost[node]
                days.append(
                    (graph.unit[node], graph.shift[node]) if graph.is_work(node) else None
                )
        schedule = Schedule(tuple(days))
        bd = schedule_penalty(inst, nurse, schedule)
        lam = sum(duals.cover.get(key, 0) for key in schedule.assignments())
        expected = bd.day_request_cost + bd.shift_request_cost + bd.preference_cost - lam
        assert total == pytest.approx(expected, abs=1e-9)


def test_forced_assignment_prunes_layer():
    inst = small_instance(3, 2, 2, nurses=[neutral_contract("n0", 3, units=(0, 1))])
    branching = BranchConstraintSet(forced=frozenset({("n0", 1, 1, 0)}))
    graph = build_graph(inst, inst.nurses[0], DualValues.zero(inst), branching)
    assert len(graph.layers[1]) == 1
    only = graph.layers[1][0]
    assert (graph.unit[only], graph.shift[only]) == (1, 0)


def test_forbidden_assignment_removes_node():
    inst = small_instance(2, 1, 2)
    branching = BranchConstraintSet(forbidden=frozenset({("n0", 0, 0, 1)}))
    graph = build_graph(inst, inst.nurses[0], DualValues.zero(inst), branching)
    kinds = {(graph.unit[i], graph.shift[i]) for i in graph.layers[0]}
    assert (0, 1) not in kinds


def test_overconstrained_branching_is_infeasible():
    # Forcing and forbidding the same assignment is rejected up front.
    with pytest.raises(ValueError):
        BranchConstraintSet(
            forced=frozenset({("n0", 0, 0, 0)}),
            forbidden=frozenset({("n0", 0, 0, 0)}),
        )
    # Forcing a rotation-incompatible pair of days leaves no path.
    inst2 = small_instance(2, 1, 3, rotations={(2, 0)})
    branching = BranchConstraintSet(
        forced=frozenset({("n0", 0, 0, 2), ("n0", 1, 0, 0)})
    )
    with pytest.raises(InfeasibleSubproblemError):
        build_graph(inst2, inst2.nurses[0], DualValues.zero(inst2), branching)


def test_graph_dump_readable():
    inst = small_instance(2, 1, 1)
    graph = build_graph(inst, inst.nurses[0], DualValues.zero(inst))
    text = graph.to_text()
    assert "# node day unit shift entryCost" in text
    assert "# arcs: from to cost" in text

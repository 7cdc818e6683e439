import random

import pytest

from nurse_bnp.dfa import (
    build_consecutive_dfa,
    evaluate_sequence,
    step,
    transition_table_csv,
)
from nurse_bnp.instance import SeriesSpec

from helpers import stint_cost


def test_transition_structure_examples():
    dfa = build_consecutive_dfa(SeriesSpec(2, 6, 7, 7))
    # At the cap, another working day costs the excess penalty.
    assert step(dfa, 6, 1) == (6, 7)
    # Breaking a one-day stint pays the remaining shortfall.
    assert step(dfa, 1, 0) == (0, (2 - 1) * 7)
    # An empty stint breaks for free.
    assert step(dfa, 0, 0) == (0, 0)
    assert step(dfa, 5, 1) == (6, 0)
    assert step(dfa, 0, 1) == (1, 0)


def test_transition_table_csv_verbatim():
    dfa = build_consecutive_dfa(SeriesSpec(2, 6, 3, 7))
    expected = ["currentState,input,nextState,cost"]
    for i in range(7):
        nxt = i + 1 if i < 6 else 6
        one_cost = 7 if i == 6 else 0
        zero_cost = (2 - i) * 3 if 0 < i < 2 else 0
        expected.append(f"S{i},1,S{nxt},{one_cost}")
        expected.append(f"S{i},0,S0,{zero_cost}")
    assert transition_table_csv(dfa).strip().splitlines() == expected


def test_closure_costs():
    dfa = build_consecutive_dfa(SeriesSpec(3, 5, 10, 20))
    assert dfa.closure_cost == (0, 20, 10, 0, 0, 0)


def test_evaluate_examples():
    dfa = build_consecutive_dfa(SeriesSpec(2, 3, 10, 10))
    assert evaluate_sequence(dfa, []) == 0
    # One stint of length 4: one day beyond the cap.
    assert evaluate_sequence(dfa, [1, 1, 1, 1, 0]) == 10
    # Stint of length 1 already closed by the trailing 0.
    assert evaluate_sequence(dfa, [1, 0], close_at_end=False) == 10
    assert evaluate_sequence(dfa, [1, 0], close_at_end=True) == 10


def test_trailing_closure_flag():
    dfa = build_consecutive_dfa(SeriesSpec(3, 9, 5, 0))
    bits = [0, 1, 1]
    assert evaluate_sequence(dfa, bits, close_at_end=True) == 5
    assert evaluate_sequence(dfa, bits, close_at_end=False) == 0


@pytest.mark.parametrize("seed", range(5))
def test_matches_stint_arithmetic(seed):
    rng = random.Random(seed)
    for _ in range(400):
        spec = SeriesSpec(
            rng.randint(1, 4),
            rng.randint(4, 8),
            rng.choice([0, 5, 10]),
            rng.choice([0, 5, 10]),
        )
        dfa = build_consecutive_dfa(spec)
        bits = [rng.randint(0, 1) for _ in range(rng.randint(0, 30))]
        for close in (True, False):
            assert evaluate_sequence(dfa, bits, close) == stint_cost(spec, bits, close)


def test_rest_automaton_is_work_on_complement():
    spec = SeriesSpec(2, 4, 10, 15)
    dfa = build_consecutive_dfa(spec)
    rng = random.Random(7)
    for _ in range(100):
        bits = [rng.randint(0, 1) for _ in range(14)]
        rest_bits = [1 - b for b in bits]
        assert evaluate_sequence(dfa, rest_bits) == stint_cost(spec, rest_bits, True)


def test_determinism():
    dfa = build_consecutive_dfa(SeriesSpec(2, 6, 1, 1))
    bits = [1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 0]
    assert evaluate_sequence(dfa, bits) == evaluate_sequence(dfa, bits)

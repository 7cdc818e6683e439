"""Cost-augmented finite automata for consecutive work / rest limits.

A series constraint ("between min_len and max_len consecutive working
days") is encoded as a deterministic automaton over inputs {0, 1} whose
state is the length of the current stint, capped at ``max_len``.  Input 1
extends the stint; input 0 breaks it and returns to state 0, charging the
shortfall of a too-short stint.  The self-loop at the cap charges the
excess cost once per additional day, so going over the limit is penalised
linearly.  ``closure_cost`` is the shortfall charged when the horizon
ends while a stint is still open.

The consecutive-rest constraint uses the same construction applied to
the complemented work bits.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache

from .instance import SeriesSpec

__all__ = [
    "CostDfa",
    "build_consecutive_dfa",
    "step",
    "evaluate_sequence",
    "transition_table_csv",
]


@dataclass(frozen=True)
class CostDfa:
    num_states: int
    initial_state: int
    # transitions[state][input] -> (next_state, cost)
    transitions: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    closure_cost: tuple[int, ...]

    def next_state(self, state: int, bit: int) -> int:
        return self.transitions[state][bit][0]

    def cost(self, state: int, bit: int) -> int:
        return self.transitions[state][bit][1]


@lru_cache(maxsize=None)
def build_consecutive_dfa(spec: SeriesSpec) -> CostDfa:
    """Automaton with states 0..max_len counting the current stint length."""
    spec.check("series spec")
    n = spec.max_len + 1
    transitions = []
    closure = []
    for i in range(n):
        if i < spec.max_len:
            on_one = (i + 1, 0)
        else:
            on_one = (spec.max_len, spec.excess_cost)
        if 0 < i < spec.min_len:
            short = (spec.min_len - i) * spec.shortfall_cost
        else:
            short = 0
        on_zero = (0, short)
        transitions.append((on_zero, on_one))
        closure.append(short)
    return CostDfa(
        num_states=n,
        initial_state=0,
        transitions=tuple(transitions),
        closure_cost=tuple(closure),
    )


def step(dfa: CostDfa, state: int, bit: int) -> tuple[int, int]:
    """Single transition: returns (next_state, cost)."""
    return dfa.transitions[state][bit]


def evaluate_sequence(dfa: CostDfa, bits, close_at_end: bool = True) -> int:
    """Total transition cost of running ``bits`` from the initial state."""
    state = dfa.initial_state
    total = 0
    for bit in bits:
        state, cost = dfa.transitions[state][bit]
        total += cost
    if close_at_end:
        total += dfa.closure_cost[state]
    return total


def transition_table_csv(dfa: CostDfa) -> str:
    """Transition table dump, one row per (state, input) pair."""
    out = io.StringIO()
    out.write("currentState,input,nextState,cost\n")
    for state in range(dfa.num_states):
        for bit in (1, 0):
            nxt, cost = dfa.transitions[state][bit]
            out.write(f"S{state},{bit},S{nxt},{cost}\n")
    return out.getvalue()

"""Dynamic-programming pricing engine with penalty-difference dominance.

A label records one partial path: accumulated cost, working-day counters
(total, per unit, weekends) and the states of the work and rest stint
automata.  Labels at a node are compared pairwise; a label whose cost can
never be beaten under any shared completion is kept, the other dropped.

Because every soft limit is a two-sided linear penalty of a counter, the
future penalty difference between two labels is a monotone function of
how much of the counter the completion consumes.  Evaluating it at zero
and at the largest possible consumption therefore yields exact bounds
(``penalty_diff_bounds``).  Stint automata are bounded exactly as well:
two runs diverge only until the first stint-breaking input, so
enumerating break positions suffices (``dfa_diff_bounds``).

Four rule sets are supported, selected by :class:`Variant`:

* ``DPB``  - equality rules: counters and automaton states must match
  (weekend counter may be lower), lower cost wins.
* ``DPU``  - one-directional: only the cheaper label may dominate, using
  the upper bound of the cost difference.
* ``DPP``  - two-sided: either label may dominate via the upper or lower
  bound, regardless of which is cheaper.
* ``DPPI`` - ``DPP`` applied across all same-day nodes of the same shift
  kind, whose outgoing arc sets and costs are interchangeable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a normal install
    _HAVE_NUMBA = False

    def _njit(*args, **kwargs):
        def deco(fn):
            return fn

        return deco

from . import dfa as dfa_mod
from .dfa import CostDfa
from .graphs import DualValues, PricingGraph
from .instance import NurseContract, RangedCounterSpec, Schedule, SeriesSpec

__all__ = [
    "Variant",
    "Label",
    "DominanceVerdict",
    "DominanceContext",
    "PricingResult",
    "PricingConfig",
    "penalty_diff_bounds",
    "dfa_diff_bounds",
    "dominates",
    "solve_pricing",
]


class Variant(str, Enum):
    """Dominance rule sets, weakest to strongest."""

    DPB = "DPB"
    DPU = "DPU"
    DPP = "DPP"
    DPPI = "DPPI"


class DominanceVerdict(Enum):
    FIRST_DOMINATES = 1
    SECOND_DOMINATES = 2
    INCOMPARABLE = 0


class Label:
    """Partial-path record of the pricing DP."""

    __slots__ = (
        "cost",
        "work_days",
        "unit_days",
        "weekends",
        "work_state",
        "rest_state",
        "weekend_bit",
        "node",
        "seq",
        "parent",
    )

    def __init__(
        self,
        cost,
        work_days,
        unit_days,
        weekends,
        work_state,
        rest_state,
        weekend_bit,
        node,
        seq=0,
        parent=None,
    ):
        self.cost = cost
        self.work_days = work_days
        self.unit_days = unit_days
        self.weekends = weekends
        self.work_state = work_state
        self.rest_state = rest_state
        self.weekend_bit = weekend_bit
        self.node = node
        self.seq = seq
        self.parent = parent

    def __repr__(self):
        return (
            f"Label(cost={self.cost}, work={self.work_days}, units={self.unit_days},"
            f" wk={self.weekends}, s=({self.work_state},{self.rest_state}), node={self.node})"
        )


# ---------------------------------------------------------------------------
# Bound primitives


def _pen(spec: RangedCounterSpec, x: int) -> int:
    return spec.shortfall_cost * max(0, spec.lo - x) + spec.excess_cost * max(0, x - spec.hi)


def penalty_diff_bounds(
    spec: RangedCounterSpec, r1: int, r2: int, max_extra: int
) -> tuple[int, int]:
    """Bounds of ``pen(r1 + e) - pen(r2 + e)`` over ``e`` in [0, max_extra].

    The difference is monotone in ``e`` (decreasing when ``r1 < r2``,
    increasing when ``r1 > r2``), so the extremes sit at the endpoints.
    Returns ``(pd_min, pd_max)``.
    """
    if r1 == r2:
        return (0, 0)
    f0 = _pen(spec, r1) - _pen(spec, r2)
    fm = _pen(spec, r1 + max_extra) - _pen(spec, r2 + max_extra)
    if r1 < r2:
        return (fm, f0)
    return (f0, fm)


def _dfa_case_vectors(dfa: CostDfa, max_extra: int, close_at_end: bool) -> np.ndarray:
    """Continuation-cost vectors over start states, one row per case.

    Cases are "extend the stint k more days then break" for k in
    [0, max_extra) plus "never break" (horizon closure).  After a break
    both runs sit in the initial state, so nothing later can differ.
    """
    n = dfa.num_states
    next1 = np.array([dfa.transitions[s][1][0] for s in range(n)])
    cost1 = np.array([dfa.transitions[s][1][1] for s in range(n)], dtype=np.float64)
    cost0 = np.array([dfa.transitions[s][0][1] for s in range(n)], dtype=np.float64)
    closure = np.array(dfa.closure_cost, dtype=np.float64)

    cur = np.arange(n)
    acc = np.zeros(n)
    rows = []
    for _k in range(max_extra):
        rows.append(acc + cost0[cur])
        acc = acc + cost1[cur]
        cur = next1[cur]
    rows.append(acc + closure[cur] if close_at_end else acc.copy())
    return np.array(rows)


def dfa_diff_bounds(
    dfa: CostDfa, s1: int, s2: int, max_extra: int, *, close_at_end: bool = True
) -> tuple[float, float]:
    """Exact bounds of the future automaton-cost difference between states.

    Considers every possible continuation: the two runs can only differ
    up to and including the first stint-breaking input, so enumerating
    the break position (or never breaking before the horizon) is exact.
    """
    if s1 == s2:
        return (0, 0)
    vectors = _dfa_case_vectors(dfa, max_extra, close_at_end)
    diffs = vectors[:, s1] - vectors[:, s2]
    return (float(diffs.min()), float(diffs.max()))


# ---------------------------------------------------------------------------
# Pairwise dominance


@dataclass
class DominanceContext:
    """What the bounds need to know about the remaining horizon."""

    remaining_days: int
    remaining_weekends: int
    contract: NurseContract
    exact_dfa_bounds: bool = True
    penalize_trailing: bool = True

    def weekend_spec(self) -> RangedCounterSpec:
        return RangedCounterSpec(0, self.contract.max_weekends, 0, self.contract.weekend_cost)


def _delta_bounds(l1: Label, l2: Label, ctx: DominanceContext) -> tuple[float, float] | None:
    """(min, max) of cost(l1 + E) - cost(l2 + E) over shared completions E.

    Returns None when the automaton states differ and exact state bounds
    are disabled; no verdict can then be drawn.
    """
    contract = ctx.contract
    lo = hi = l1.cost - l2.cost
    mn, mx = penalty_diff_bounds(contract.total_days, l1.work_days, l2.work_days, ctx.remaining_days)
    lo += mn
    hi += mx
    units = sorted(contract.required_units)
    for idx, u in enumerate(units):
        mn, mx = penalty_diff_bounds(
            contract.unit_spec(u), l1.unit_days[idx], l2.unit_days[idx], ctx.remaining_days
        )
        lo += mn
        hi += mx
    mn, mx = penalty_diff_bounds(
        ctx.weekend_spec(), l1.weekends, l2.weekends, ctx.remaining_weekends
    )
    lo += mn
    hi += mx
    for dfa, a, b in (
        (dfa_mod.build_consecutive_dfa(contract.consec_work), l1.work_state, l2.work_state),
        (dfa_mod.build_consecutive_dfa(contract.consec_rest), l1.rest_state, l2.rest_state),
    ):
        if a == b:
            continue
        if not ctx.exact_dfa_bounds:
            return None
        mn, mx = dfa_diff_bounds(dfa, a, b, ctx.remaining_days, close_at_end=ctx.penalize_trailing)
        lo += mn
        hi += mx
    return lo, hi


def dominates(l1: Label, l2: Label, ctx: DominanceContext, variant: Variant) -> DominanceVerdict:
    """Pairwise dominance verdict between two labels at comparable nodes.

    Comparisons are weak; when both directions hold (identical futures)
    the earlier-created label wins, so exactly one of two equal labels
    survives.  Under ``DPU`` only the (cost, age)-lexicographically
    smaller label may dominate: the call is one-directional.
    """
    if variant is Variant.DPB:
        eq = (
            l1.work_days == l2.work_days
            and l1.unit_days == l2.unit_days
            and l1.work_state == l2.work_state
            and l1.rest_state == l2.rest_state
        )
        first = eq and l1.cost <= l2.cost and l1.weekends <= l2.weekends
        second = eq and l2.cost <= l1.cost and l2.weekends <= l1.weekends
        return _resolve(first, second, l1, l2)

    bounds = _delta_bounds(l1, l2, ctx)
    if bounds is None:
        return DominanceVerdict.INCOMPARABLE
    lo, hi = bounds
    if variant is Variant.DPU:
        if (l1.cost, l1.seq) <= (l2.cost, l2.seq) and hi <= 0:
            return DominanceVerdict.FIRST_DOMINATES
        return DominanceVerdict.INCOMPARABLE
    return _resolve(hi <= 0, lo >= 0, l1, l2)


def _resolve(first: bool, second: bool, l1: Label, l2: Label) -> DominanceVerdict:
    if first and second:
        return (
            DominanceVerdict.FIRST_DOMINATES
            if l1.seq <= l2.seq
            else DominanceVerdict.SECOND_DOMINATES
        )
    if first:
        return DominanceVerdict.FIRST_DOMINATES
    if second:
        return DominanceVerdict.SECOND_DOMINATES
    return DominanceVerdict.INCOMPARABLE


# ---------------------------------------------------------------------------
# Extension


@dataclass
class ExtendContext:
    """Everything label extension needs besides the graph itself."""

    contract: NurseContract
    graph: PricingGraph
    work_dfa: CostDfa
    rest_dfa: CostDfa
    units: tuple[int, ...]
    unit_pos: dict[int, int]
    penalize_trailing: bool = True

    @classmethod
    def for_graph(cls, graph: PricingGraph, contract: NurseContract, *, penalize_trailing=True):
        units = tuple(sorted(contract.required_units))
        return cls(
            contract=contract,
            graph=graph,
            work_dfa=dfa_mod.build_consecutive_dfa(contract.consec_work),
            rest_dfa=dfa_mod.build_consecutive_dfa(contract.consec_rest),
            units=units,
            unit_pos={u: i for i, u in enumerate(units)},
            penalize_trailing=penalize_trailing,
        )

    def initial_label(self) -> Label:
        return Label(
            cost=0,
            work_days=0,
            unit_days=(0,) * len(self.units),
            weekends=0,
            work_state=self.work_dfa.initial_state,
            rest_state=self.rest_dfa.initial_state,
            weekend_bit=0,
            node=0,
            seq=0,
        )


def extend(label: Label, target: int, ctx: ExtendContext, seq: int = 0) -> Label:
    """Extend a label along the arc to ``target``, updating all resources.

    Sink arcs additionally charge open-stint closures and the end-of-
    horizon counter penalties (total days, per-unit days, weekends).
    """
    g = ctx.graph
    contract = ctx.contract
    if target == g.sink:
        cost = label.cost
        if ctx.penalize_trailing:
            cost += ctx.work_dfa.closure_cost[label.work_state]
            cost += ctx.rest_dfa.closure_cost[label.rest_state]
        cost += _pen(contract.total_days, label.work_days)
        for idx, u in enumerate(ctx.units):
            cost += _pen(contract.unit_spec(u), label.unit_days[idx])
        cost += contract.weekend_cost * max(0, label.weekends - contract.max_weekends)
        return Label(
            cost,
            label.work_days,
            label.unit_days,
            label.weekends,
            label.work_state,
            label.rest_state,
            label.weekend_bit,
            target,
            seq,
            label,
        )

    d = g.day[target]
    working = g.is_work(target)
    work_state, wc = ctx.work_dfa.transitions[label.work_state][1 if working else 0]
    rest_state, rc = ctx.rest_dfa.transitions[label.rest_state][0 if working else 1]
    cost = label.cost + g.entry_cost[target] + wc + rc

    bit = 0 if d % 7 == 0 else label.weekend_bit
    weekends = label.weekends
    if working and d % 7 >= 5:
        if not bit:
            weekends += 1
        bit = 1

    if working:
        idx = ctx.unit_pos[g.unit[target]]
        unit_days = label.unit_days[:idx] + (label.unit_days[idx] + 1,) + label.unit_days[idx + 1:]
        work_days = label.work_days + 1
    else:
        unit_days = label.unit_days
        work_days = label.work_days

    return Label(
        cost, work_days, unit_days, weekends, work_state, rest_state, bit, target, seq, label
    )


# ---------------------------------------------------------------------------
# Vectorised bucket pruning


@lru_cache(maxsize=8192)
def _dfa_max_table(spec: SeriesSpec, remaining: int, close: bool) -> np.ndarray:
    """Pairwise upper bounds over automaton state pairs."""
    dfa = dfa_mod.build_consecutive_dfa(spec)
    vectors = _dfa_case_vectors(dfa, remaining, close)
    return (vectors[:, :, None] - vectors[:, None, :]).max(axis=0)


@lru_cache(maxsize=8192)
def _state_code_table(
    work_spec: SeriesSpec, rest_spec: SeriesSpec, remaining: int, close: bool
) -> np.ndarray:
    """Joint bound table over (work_state, rest_state) codes: one gather."""
    t4 = _dfa_max_table(work_spec, remaining, close)
    t5 = _dfa_max_table(rest_spec, remaining, close)
    n4, n5 = t4.shape[0], t5.shape[0]
    codes4 = np.repeat(np.arange(n4), n5)
    codes5 = np.tile(np.arange(n5), n4)
    return t4[codes4[:, None], codes4[None, :]] + t5[codes5[:, None], codes5[None, :]]


@lru_cache(maxsize=8192)
def _counter_params(
    specs: tuple[RangedCounterSpec, ...], remaining_days: int, remaining_weekends: int
):
    """Column vectors (lo, hi, shortfall, excess, extra), one row per counter.

    The last spec is always the weekend counter, which consumes
    ``remaining_weekends`` instead of days.
    """
    extras = [remaining_days] * (len(specs) - 1) + [remaining_weekends]

    def col(vals):
        return np.array(vals, dtype=np.float64)[:, None]

    return (
        col([s.lo for s in specs]),
        col([s.hi for s in specs]),
        col([s.shortfall_cost for s in specs]),
        col([s.excess_cost for s in specs]),
        col(extras),
    )


@lru_cache(maxsize=8192)
def _counter_rows(
    specs: tuple[RangedCounterSpec, ...], remaining_days: int, remaining_weekends: int
) -> tuple[tuple[float, float, float, float, float], ...]:
    """Scalar (lo, hi, shortfall, excess, extra) rows for tiny buckets."""
    extras = [float(remaining_days)] * (len(specs) - 1) + [float(remaining_weekends)]
    return tuple(
        (s.lo, s.hi, s.shortfall_cost, s.excess_cost, extras[k])
        for k, s in enumerate(specs)
    )


class _BoundTables:
    """Binds the cached bound tables to one contract's spec tuple."""

    def __init__(self, ctx: ExtendContext, num_days: int, num_weekends: int):
        self.ctx = ctx
        self.num_days = num_days
        self.num_weekends = num_weekends
        contract = ctx.contract
        self.counter_specs = (
            contract.total_days,
            *(contract.unit_spec(u) for u in ctx.units),
            RangedCounterSpec(0, contract.max_weekends, 0, contract.weekend_cost),
        )

    def counter_params(self, remaining_days: int, remaining_weekends: int):
        return _counter_params(self.counter_specs, remaining_days, remaining_weekends)

    def counter_rows(self, remaining_days: int, remaining_weekends: int):
        return _counter_rows(self.counter_specs, remaining_days, remaining_weekends)

    def state_code_table(self, remaining: int) -> np.ndarray:
        return _state_code_table(
            self.ctx.contract.consec_work,
            self.ctx.contract.consec_rest,
            remaining,
            self.ctx.penalize_trailing,
        )

    @property
    def rest_states(self) -> int:
        return self.ctx.rest_dfa.num_states


@_njit(cache=True)
def _prune_greedy(cost, seq, counters, p0, pm, scode, stab, one_directional):  # pragma: no cover
    """Greedy pairwise elimination; labels must arrive cost-sorted.

    Dead labels are skipped as dominators, which cannot change the
    outcome: the bound tests are transitive, so a dead dominator's kills
    are always repeated by the live label that killed it.
    """
    n = cost.size
    k = counters.shape[0]
    dead = np.zeros(n, np.bool_)
    for i in range(n):
        if dead[i]:
            continue
        for j in range(i + 1, n):
            if dead[j]:
                continue
            d_ij = cost[i] - cost[j]
            d_ji = -d_ij
            for c in range(k):
                ri = counters[c, i]
                rj = counters[c, j]
                if ri < rj:
                    d_ij += p0[c, i] - p0[c, j]
                    d_ji += pm[c, j] - pm[c, i]
                elif ri > rj:
                    d_ij += pm[c, i] - pm[c, j]
                    d_ji += p0[c, j] - p0[c, i]
            d_ij += stab[scode[i], scode[j]]
            d_ji += stab[scode[j], scode[i]]
            f_ij = d_ij <= 0
            f_ji = d_ji <= 0
            if one_directional:
                lex = cost[i] < cost[j] or (cost[i] == cost[j] and seq[i] < seq[j])
                f_ij = f_ij and lex
                f_ji = f_ji and not lex
            if f_ij and (seq[i] < seq[j] or not f_ji):
                dead[j] = True
            elif f_ji and (seq[j] < seq[i] or not f_ij):
                dead[i] = True
                break
    return dead


_PRUNE_CHUNK = 512


def _prune_bucket(labels, variant, tables, remaining_days, remaining_weekends):
    """Drop dominated labels from one comparable bucket; keeps input order.

    Large buckets are pruned incrementally: labels are visited in cost
    order, each chunk is cleaned internally and then compared against the
    running survivor set with rectangular dominance matrices.  The bound
    tests are transitive, so the surviving set is exactly the one a
    single full pairwise pass would produce.
    """
    n = len(labels)
    if n <= 1:
        return labels, 0

    if variant is Variant.DPB:
        return _prune_equality(labels)

    if n == 2:
        return _prune_pair(labels, variant, tables, remaining_days, remaining_weekends)

    rest_states = tables.rest_states
    data = np.array(
        [
            (lab.cost, lab.seq, lab.work_days, *lab.unit_days, lab.weekends)
            for lab in labels
        ],
        dtype=np.float64,
    )
    cost = data[:, 0]
    seq = data[:, 1]
    counters = data[:, 2:].T  # rows: total days, per-unit days, weekends
    state_code = np.fromiter(
        (lab.work_state * rest_states + lab.rest_state for lab in labels), np.int64, n
    )
    state_tab = tables.state_code_table(remaining_days)

    # Per-label future-penalty evaluations.  The pairwise counter bound is
    # pen(r1) - pen(r2) when r1 < r2 and pen(r1 + M) - pen(r2 + M) when
    # r1 > r2 (and both differences vanish on ties), so it decomposes
    # into per-label vectors joined by a single comparison per pair.
    lo, hi, shortfall, excess, extra = tables.counter_params(
        remaining_days, remaining_weekends
    )
    p0 = shortfall * np.maximum(lo - counters, 0) + excess * np.maximum(counters - hi, 0)
    shifted = counters + extra
    pm = shortfall * np.maximum(lo - shifted, 0) + excess * np.maximum(shifted - hi, 0)

    # Cheap labels first: they are the likeliest dominators.  The
    # surviving set itself does not depend on the processing order.
    order = np.lexsort((seq, cost))

    if _HAVE_NUMBA:
        dead = _prune_greedy(
            cost[order],
            seq[order],
            np.ascontiguousarray(counters[:, order]),
            np.ascontiguousarray(p0[:, order]),
            np.ascontiguousarray(pm[:, order]),
            state_code[order],
            state_tab,
            variant is Variant.DPU,
        )
        alive = np.sort(order[~dead])
        survivors = [labels[i] for i in alive]
        return survivors, n - len(survivors)

    def delta_matrix(ia, ib):
        delta = cost[ia][:, None] - cost[ib][None, :]
        for r, r0, rm in zip(counters, p0, pm):
            low = r[ia][:, None] < r[ib][None, :]
            d0 = r0[ia][:, None] - r0[ib][None, :]
            dm = rm[ia][:, None] - rm[ib][None, :]
            delta += np.where(low, d0, dm)
        delta += state_tab[state_code[ia][:, None], state_code[ib][None, :]]
        return delta

    def dominance_matrix(ia, ib, delta):
        # entry [i, j]: label ia[i] may eliminate label ib[j]
        if variant is Variant.DPU:
            ca, cb = cost[ia], cost[ib]
            sl = (seq[ia][:, None] < seq[ib][None, :])
            lex = (ca[:, None] < cb[None, :]) | ((ca[:, None] == cb[None, :]) & sl)
            return lex & (delta <= 0)
        return delta <= 0

    def internal_keep(idx):
        delta = delta_matrix(idx, idx)
        can = dominance_matrix(idx, idx, delta)
        np.fill_diagonal(can, False)
        seq_less = seq[idx][:, None] < seq[idx][None, :]
        eliminator = can & (seq_less | ~can.T)
        return ~eliminator.any(axis=0)

    def cross(alive, chunk):
        """Eliminate across the two groups; returns the joined survivors."""
        f_ac = dominance_matrix(alive, chunk, delta_matrix(alive, chunk))
        f_ca = dominance_matrix(chunk, alive, delta_matrix(chunk, alive))
        sl_ac = seq[alive][:, None] < seq[chunk][None, :]
        dead_c = (f_ac & (sl_ac | ~f_ca.T)).any(axis=0)
        dead_a = (f_ca & (~sl_ac.T | ~f_ac.T)).any(axis=0)
        return alive[~dead_a], chunk[~dead_c]

    if n <= _PRUNE_CHUNK:
        keep = internal_keep(order)
        alive = np.sort(order[keep])
        survivors = [labels[i] for i in alive]
        return survivors, n - len(survivors)

    alive = np.empty(0, dtype=np.int64)
    for start in range(0, n, _PRUNE_CHUNK):
        chunk = order[start : start + _PRUNE_CHUNK]
        if alive.size:
            # Let the established survivors thin the chunk before the
            # quadratic internal pass; order does not affect the result,
            # and chunk members killed here need no further comparisons.
            alive, chunk = cross(alive, chunk)
        chunk = chunk[internal_keep(chunk)]
        alive = np.concatenate([alive, chunk]) if alive.size else chunk
    alive = np.sort(alive)
    survivors = [labels[i] for i in alive]
    return survivors, n - len(survivors)


def _prune_pair(labels, variant, tables, remaining_days, remaining_weekends):
    """Scalar two-label comparison; most buckets are this small."""
    a, b = labels
    ra = (a.work_days, *a.unit_days, a.weekends)
    rb = (b.work_days, *b.unit_days, b.weekends)
    d_ab = a.cost - b.cost
    d_ba = -d_ab
    for (lo, hi, sc, ec, extra), x, y in zip(
        tables.counter_rows(remaining_days, remaining_weekends), ra, rb
    ):
        if x == y:
            continue
        if x > y:
            x, y = y, x
            flip = True
        else:
            flip = False
        low = sc * max(0.0, lo - x) - sc * max(0.0, lo - y) + ec * max(0.0, x - hi) - ec * max(0.0, y - hi)
        xm, ym = x + extra, y + extra
        high = sc * max(0.0, lo - xm) - sc * max(0.0, lo - ym) + ec * max(0.0, xm - hi) - ec * max(0.0, ym - hi)
        if flip:
            d_ab -= high
            d_ba += low
        else:
            d_ab += low
            d_ba -= high
    stab = tables.state_code_table(remaining_days)
    rs = tables.rest_states
    ca = a.work_state * rs + a.rest_state
    cb = b.work_state * rs + b.rest_state
    d_ab += stab[ca, cb]
    d_ba += stab[cb, ca]
    f_ab = d_ab <= 0
    f_ba = d_ba <= 0
    if variant is Variant.DPU:
        lex = (a.cost, a.seq) <= (b.cost, b.seq)
        f_ab = f_ab and lex
        f_ba = f_ba and not lex
    if f_ab and (a.seq < b.seq or not f_ba):
        return [a], 1
    if f_ba and (b.seq < a.seq or not f_ab):
        return [b], 1
    return labels, 0


def _prune_equality(labels):
    """Equality-rule pruning: hash-group, then a (cost, weekends) sweep."""
    groups: dict[tuple, list[Label]] = {}
    for lab in labels:
        key = (lab.work_days, lab.unit_days, lab.work_state, lab.rest_state)
        groups.setdefault(key, []).append(lab)
    survivors = []
    removed = 0
    for group in groups.values():
        if len(group) == 1:
            survivors.append(group[0])
            continue
        group.sort(key=lambda lab: (lab.cost, lab.weekends, lab.seq))
        best_weekends = None
        for lab in group:
            if best_weekends is None or lab.weekends < best_weekends:
                survivors.append(lab)
                best_weekends = lab.weekends
            else:
                removed += 1
    survivors.sort(key=lambda lab: lab.seq)
    return survivors, removed


# ---------------------------------------------------------------------------
# The pricing solver


@dataclass(frozen=True)
class PricingConfig:
    penalize_trailing: bool = True
    exact_dfa_bounds: bool = True
    deadline: float | None = None  # time.monotonic() timestamp
    max_labels: int | None = None
    k_best: int = 1


@dataclass(frozen=True)
class PricingResult:
    best_schedule: Schedule | None
    reduced_cost: float
    labels_extended: int
    labels_dominated: int
    wall_ms: float
    timed_out: bool = False
    # Cheapest distinct schedules with their reduced costs, best first;
    # contains at least the optimum, more when k_best asked for them.
    ranked: tuple[tuple[float, Schedule], ...] = ()


def _remaining_weekends(num_days: int, day: int, is_off_node: bool) -> int:
    """Upper bound on future weekend-counter increments after ``day``.

    Each future Saturday opens a new countable weekend; the current
    weekend can still count if today is an unworked Saturday and a Sunday
    follows within the horizon.
    """
    future_saturdays = sum(1 for d in range(day + 1, num_days) if d % 7 == 5)
    extra = 1 if (day >= 0 and day % 7 == 5 and is_off_node and day + 1 < num_days) else 0
    return future_saturdays + extra


def _schedule_from_label(label: Label, graph: PricingGraph) -> Schedule:
    days: list[tuple[int, int] | None] = [None] * graph.num_days
    cur = label.parent  # skip the sink label itself
    while cur is not None and cur.node != 0:
        node = cur.node
        if graph.is_work(node):
            days[graph.day[node]] = (graph.unit[node], graph.shift[node])
        cur = cur.parent
    return Schedule(tuple(days))


def solve_pricing(
    graph: PricingGraph,
    contract: NurseContract,
    duals: DualValues,
    variant: Variant = Variant.DPPI,
    config: PricingConfig = PricingConfig(),
) -> PricingResult:
    """Exact minimum-reduced-cost schedule for one nurse.

    Processes nodes in day order; each bucket is pruned pairwise before
    its labels are extended along all outgoing arcs.  Under ``DPPI`` the
    pruning pass runs over whole same-day same-shift node groups instead
    of single nodes.  Returns the optimum unless the deadline or label
    cap aborts the run, which is reported via ``timed_out``.
    """
    t0 = time.perf_counter()
    ctx = ExtendContext.for_graph(graph, contract, penalize_trailing=config.penalize_trailing)
    tables = _BoundTables(ctx, graph.num_days, max(1, graph.num_days // 7 + 1))
    if not config.exact_dfa_bounds and variant in (Variant.DPU, Variant.DPP, Variant.DPPI):
        return _solve_pricing_pairwise(graph, contract, duals, variant, config, ctx, t0)

    buckets: dict[int, list[Label]] = {i: [] for i in range(graph.num_nodes)}
    buckets[0].append(ctx.initial_label())
    seq = 1
    extended = 0
    dominated = 0
    timed_out = False

    def out_of_budget():
        nonlocal timed_out
        if config.deadline is not None and time.monotonic() > config.deadline:
            timed_out = True
            return True
        if config.max_labels is not None and seq > config.max_labels:
            timed_out = True
            return True
        return False

    # Source
    for target in graph.succ[0]:
        buckets[target].append(extend(buckets[0][0], target, ctx, seq))
        seq += 1
    extended += 1

    for d, layer in enumerate(graph.layers):
        if out_of_budget():
            break
        remaining = graph.num_days - 1 - d
        if variant is Variant.DPPI:
            node_sets = graph.groups[d]
        else:
            node_sets = [[i] for i in layer]
        for nodes in node_sets:
            if out_of_budget():
                break
            if len(nodes) == 1:
                bucket = buckets[nodes[0]]
            else:
                bucket = [lab for i in nodes for lab in buckets[i]]
                bucket.sort(key=lambda lab: lab.seq)
            if not bucket:
                continue
            is_off = not graph.is_work(nodes[0])
            rw = _remaining_weekends(graph.num_days, d, is_off)
            survivors, removed = _prune_bucket(bucket, variant, tables, remaining, rw)
            dominated += removed
            extended += len(survivors)
            if len(nodes) > 1:
                per_node: dict[int, list[Label]] = {i: [] for i in nodes}
                for lab in survivors:
                    per_node[lab.node].append(lab)
            else:
                per_node = {nodes[0]: survivors}
            for i in nodes:
                for lab in per_node[i]:
                    for target in graph.succ[i]:
                        buckets[target].append(extend(lab, target, ctx, seq))
                        seq += 1
                buckets[i] = per_node[i]

    wall = (time.perf_counter() - t0) * 1000
    if timed_out or not buckets[graph.sink]:
        return PricingResult(None, float("inf"), extended, dominated, wall, timed_out=True)

    lam_n = duals.nurse.get(graph.nurse_id, 0)
    sink_labels = sorted(buckets[graph.sink], key=lambda lab: (lab.cost, lab.seq))
    ranked = tuple(
        (lab.cost - lam_n, _schedule_from_label(lab, graph))
        for lab in sink_labels[: config.k_best]
    )
    return PricingResult(
        best_schedule=ranked[0][1],
        reduced_cost=ranked[0][0],
        labels_extended=extended,
        labels_dominated=dominated,
        wall_ms=wall,
        ranked=ranked,
    )


def _solve_pricing_pairwise(graph, contract, duals, variant, config, ctx, t0):
    """Fallback engine using the scalar ``dominates`` (conservative bounds)."""
    buckets: dict[int, list[Label]] = {i: [] for i in range(graph.num_nodes)}
    buckets[0].append(ctx.initial_label())
    seq = 1
    extended = 1
    dominated = 0
    for target in graph.succ[0]:
        buckets[target].append(extend(buckets[0][0], target, ctx, seq))
        seq += 1

    for d, layer in enumerate(graph.layers):
        remaining = graph.num_days - 1 - d
        node_sets = graph.groups[d] if variant is Variant.DPPI else [[i] for i in layer]
        for nodes in node_sets:
            bucket = [lab for i in nodes for lab in buckets[i]]
            bucket.sort(key=lambda lab: lab.seq)
            is_off = not graph.is_work(nodes[0])
            dctx = DominanceContext(
                remaining_days=remaining,
                remaining_weekends=_remaining_weekends(graph.num_days, d, is_off),
                contract=contract,
                exact_dfa_bounds=config.exact_dfa_bounds,
                penalize_trailing=config.penalize_trailing,
            )
            dead = [False] * len(bucket)
            for a, la in enumerate(bucket):
                for b, lb in enumerate(bucket):
                    if a == b:
                        continue
                    if dominates(la, lb, dctx, variant) is DominanceVerdict.FIRST_DOMINATES:
                        dead[b] = True
                    elif dominates(lb, la, dctx, variant) is DominanceVerdict.SECOND_DOMINATES:
                        dead[b] = True
            survivors = [lab for lab, gone in zip(bucket, dead) if not gone]
            dominated += sum(dead)
            extended += len(survivors)
            per_node: dict[int, list[Label]] = {i: [] for i in nodes}
            for lab in survivors:
                per_node[lab.node].append(lab)
            for i in nodes:
                for lab in per_node[i]:
                    for target in graph.succ[i]:
                        buckets[target].append(extend(lab, target, ctx, seq))
                        seq += 1
                buckets[i] = per_node[i]

    wall = (time.perf_counter() - t0) * 1000
    if not buckets[graph.sink]:
        return PricingResult(None, float("inf"), extended, dominated, wall, timed_out=True)
    best = min(buckets[graph.sink], key=lambda lab: (lab.cost, lab.seq))
    return PricingResult(
        best_schedule=_schedule_from_label(best, graph),
        reduced_cost=best.cost - duals.nurse.get(graph.nurse_id, 0),
        labels_extended=extended,
        labels_dominated=dominated,
        wall_ms=wall,
    )

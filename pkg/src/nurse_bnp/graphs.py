"""Per-nurse layered pricing graphs.

The graph has a source, one node per (day, unit, shift) the nurse may
work plus one day-off node per day, and a sink.  Arcs only connect
consecutive day layers (and source/sink), so the graph is acyclic and
topologically ordered by day.  All request, preference and dual costs of
a node are charged on its incoming arcs; since that cost depends only on
the target node, it is stored once per node as ``entry_cost``.

Branching decisions remove nodes: forcing an assignment deletes the rest
of its day layer, forbidding one deletes that node.  A graph where some
day becomes unreachable raises :class:`InfeasibleSubproblemError`.
"""

from __future__ import annotations

import io
import random
from dataclasses import dataclass

from .instance import Instance, NurseContract, InfeasibleSubproblemError, Schedule

__all__ = ["DualValues", "BranchConstraintSet", "PricingGraph", "build_graph"]


@dataclass(frozen=True)
class DualValues:
    """Dual prices from the restricted master: cover rows and convexity rows."""

    cover: dict[tuple[int, int, int], float]
    nurse: dict[str, float]

    @classmethod
    def zero(cls, instance: Instance) -> "DualValues":
        return cls(cover={}, nurse={})

    @classmethod
    def seeded_random(cls, instance: Instance, seed: int, scale: float = 30.0) -> "DualValues":
        """Deterministic nonnegative dual vector for stress testing."""
        rng = random.Random(seed)
        cover = {}
        for d in range(instance.num_days):
            for u in range(len(instance.units)):
                for s in range(len(instance.shifts)):
                    cover[(d, u, s)] = rng.randrange(0, int(scale) + 1)
        nurse = {n.nurse_id: rng.randrange(0, int(scale) + 1) for n in instance.nurses}
        return cls(cover=cover, nurse=nurse)


@dataclass(frozen=True)
class BranchConstraintSet:
    """Forced and forbidden (nurse, day, unit, shift) assignments."""

    forced: frozenset[tuple[str, int, int, int]] = frozenset()
    forbidden: frozenset[tuple[str, int, int, int]] = frozenset()

    def __post_init__(self):
        if self.forced & self.forbidden:
            raise ValueError("an assignment cannot be both forced and forbidden")
        seen = set()
        for n, d, _u, _s in self.forced:
            if (n, d) in seen:
                raise ValueError(f"two forced assignments for nurse {n} on day {d}")
            seen.add((n, d))

    def with_forced(self, n: str, d: int, u: int, s: int) -> "BranchConstraintSet":
        return BranchConstraintSet(self.forced | {(n, d, u, s)}, self.forbidden)

    def with_forbidden(self, n: str, d: int, u: int, s: int) -> "BranchConstraintSet":
        return BranchConstraintSet(self.forced, self.forbidden | {(n, d, u, s)})

    def allows_schedule(self, nurse_id: str, schedule: Schedule) -> bool:
        for n, d, u, s in self.forced:
            if n == nurse_id and schedule.days[d] != (u, s):
                return False
        for n, d, u, s in self.forbidden:
            if n == nurse_id and schedule.days[d] == (u, s):
                return False
        return True


EMPTY_BRANCHING = BranchConstraintSet()


@dataclass
class PricingGraph:
    """Layered DAG for one nurse's pricing subproblem.

    Node 0 is the source; node ``sink`` is the last.  Parallel arrays
    hold each node's day, unit and shift (-1 for day-off, source and
    sink) and its entry cost.  ``layers[d]`` lists the node ids of day
    ``d``; ``groups[d]`` partitions a layer by shift kind (day-off nodes
    form their own group), which is what cross-node dominance compares.
    """

    nurse_id: str
    num_days: int
    day: list[int]
    unit: list[int]
    shift: list[int]
    entry_cost: list[float]
    succ: list[list[int]]
    layers: list[list[int]]
    groups: list[list[list[int]]]
    sink: int

    @property
    def num_nodes(self) -> int:
        return len(self.day)

    def is_work(self, node: int) -> bool:
        return self.unit[node] >= 0

    def to_text(self) -> str:
        """Debug dump: node table then arc list."""
        out = io.StringIO()
        out.write("# node day unit shift entryCost\n")
        for i in range(self.num_nodes):
            kind = "work" if self.is_work(i) else ("off" if self.day[i] >= 0 else "end")
            out.write(f"{i} {self.day[i]} {self.unit[i]} {self.shift[i]} {self.entry_cost[i]:g} {kind}\n")
        out.write("# arcs: from to cost\n")
        for i, succs in enumerate(self.succ):
            for j in succs:
                out.write(f"{i} {j} {self.entry_cost[j]:g}\n")
        return out.getvalue()


def build_graph(
    instance: Instance,
    nurse: NurseContract,
    duals: DualValues,
    branching: BranchConstraintSet = EMPTY_BRANCHING,
) -> PricingGraph:
    """Build the pricing graph for one nurse under the given duals.

    The convexity dual of the nurse is *not* embedded; callers subtract
    it once from the best path cost.
    """
    num_shifts = len(instance.shifts)
    lam = duals.cover
    forced_by_day: dict[int, tuple[int, int]] = {}
    forbidden: set[tuple[int, int, int]] = set()
    for n, d, u, s in branching.forced:
        if n == nurse.nurse_id:
            forced_by_day[d] = (u, s)
    for n, d, u, s in branching.forbidden:
        if n == nurse.nurse_id:
            forbidden.add((d, u, s))

    day: list[int] = [-1]
    unit: list[int] = [-1]
    shift: list[int] = [-1]
    entry: list[float] = [0.0]
    layers: list[list[int]] = []
    req = sorted(nurse.required_units)

    for d in range(instance.num_days):
        on_d, off_d = nurse.day_requests.get(d, (0, 0))
        son = [nurse.shift_requests.get((d, s), (0, 0))[0] for s in range(num_shifts)]
        soff = [nurse.shift_requests.get((d, s), (0, 0))[1] for s in range(num_shifts)]
        all_on = sum(son)
        layer = []
        forced = forced_by_day.get(d)
        if forced is None:
            layer.append(len(day))
            day.append(d)
            unit.append(-1)
            shift.append(-1)
            entry.append(float(on_d + all_on))
        for u in req:
            for s in range(num_shifts):
                if forced is not None and (u, s) != forced:
                    continue
                if (d, u, s) in forbidden:
                    continue
                cost = off_d + (all_on - son[s]) + soff[s]
                if u not in nurse.preferred_units:
                    cost += nurse.non_preferred_cost.get((d, u), 0)
                layer.append(len(day))
                day.append(d)
                unit.append(u)
                shift.append(s)
                entry.append(cost - lam.get((d, u, s), 0))
        if not layer:
            raise InfeasibleSubproblemError(
                f"nurse {nurse.nurse_id}: no allowed assignment on day {d}"
            )
        layers.append(layer)

    sink = len(day)
    day.append(instance.num_days)
    unit.append(-1)
    shift.append(-1)
    entry.append(0.0)

    succ: list[list[int]] = [[] for _ in range(len(day))]
    succ[0] = list(layers[0])
    for d in range(instance.num_days - 1):
        for i in layers[d]:
            s_i = shift[i]
            for j in layers[d + 1]:
                s_j = shift[j]
                if s_i >= 0 and s_j >= 0 and not instance.rotation_ok(s_i, s_j):
                    continue
                succ[i].append(j)
    for i in layers[-1]:
        succ[i].append(sink)

    # Forced assignments can make days mutually unreachable through the
    # rotation rules; drop nodes that cannot reach the sink or be reached.
    reach_fwd = [False] * len(day)
    reach_fwd[0] = True
    order = [0] + [i for layer in layers for i in layer] + [sink]
    for i in order:
        if reach_fwd[i]:
            for j in succ[i]:
                reach_fwd[j] = True
    reach_bwd = [False] * len(day)
    reach_bwd[sink] = True
    for i in reversed(order):
        for j in succ[i]:
            if reach_bwd[j]:
                reach_bwd[i] = True
                break
    keep = [reach_fwd[i] and reach_bwd[i] for i in range(len(day))]
    if not keep[0] or not keep[sink]:
        raise InfeasibleSubproblemError(
            f"nurse {nurse.nurse_id}: branching leaves no source-to-sink path"
        )
    new_layers = []
    for d, layer in enumerate(layers):
        new_layer = [i for i in layer if keep[i]]
        if not new_layer:
            raise InfeasibleSubproblemError(
                f"nurse {nurse.nurse_id}: no feasible assignment on day {d}"
            )
        new_layers.append(new_layer)
    succ = [[j for j in succ[i] if keep[j]] if keep[i] else [] for i in range(len(day))]

    groups = []
    for layer in new_layers:
        by_shift: dict[int, list[int]] = {}
        for i in layer:
            by_shift.setdefault(shift[i], []).append(i)
        groups.append([by_shift[k] for k in sorted(by_shift)])

    return PricingGraph(
        nurse_id=nurse.nurse_id,
        num_days=instance.num_days,
        day=day,
        unit=unit,
        shift=shift,
        entry_cost=entry,
        succ=succ,
        layers=new_layers,
        groups=groups,
        sink=sink,
    )

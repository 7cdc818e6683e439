"""Problem data model for multi-unit nurse rostering.

An instance bundles the planning horizon, units, shifts, per-(day, unit,
shift) cover requirements, and one contract per nurse.  The horizon starts
on a Monday, so weekend days are those with ``day % 7`` in {5, 6}.
Instances are never mutated after construction and are safe to share
across concurrent pricing workers.

Instance file format (plain text, ``#`` starts a comment)::

    [horizon]
    days 14

    [units]
    u0
    u1

    [shifts]
    early
    late
    night

    [rotations]              # forbidden shift -> next-day shift pairs
    late early

    [cover]                  # day unit shift required understaff-cost
    0 u0 early 1 30

    [nurse n00]
    required u0 u1
    preferred u0
    total-days 5 9 20 20     # lo hi shortfall-cost excess-cost
    unit-days u0 2 9 10 10
    max-weekends 1 30
    consec-work 2 5 15 15    # min-len max-len shortfall-cost excess-cost
    consec-rest 1 4 15 15
    day-request 3 10 0       # day work-request-cost rest-request-cost
    shift-request 4 late 0 10
    non-preferred 2 u1 5     # day unit cost

All counts and costs are decimal integers.  Unlisted cover slots default
to requirement 0 / cost 0; unlisted contract keys default to settings
that can never be penalised.  Serialisation is canonical: parsing a
serialised instance and re-serialising it reproduces the bytes exactly.
"""

from __future__ import annotations

import io
import math
import random
from dataclasses import dataclass, field, replace

__all__ = [
    "RangedCounterSpec",
    "SeriesSpec",
    "NurseContract",
    "Instance",
    "Schedule",
    "Roster",
    "RosterReport",
    "InstanceFormatError",
    "HardViolationError",
    "InfeasibleSubproblemError",
    "parse_instance",
    "serialize_instance",
    "generate_instance",
    "validate_roster",
    "parse_roster",
    "serialize_roster",
    "restrict_to_preferred",
]

# Shift rotations that may never appear on consecutive days, by name.
DEFAULT_SHIFTS = ("early", "late", "night")
DEFAULT_FORBIDDEN = (("late", "early"), ("night", "early"), ("night", "late"))


class InstanceFormatError(ValueError):
    """Malformed instance or roster file, or a violated data invariant."""

    def __init__(self, message: str, *, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class HardViolationError(ValueError):
    """A schedule breaks a hard constraint (skill or rotation)."""


class InfeasibleSubproblemError(Exception):
    """Branching constraints leave a nurse with no feasible schedule."""


@dataclass(frozen=True)
class RangedCounterSpec:
    """Soft two-sided limit on a count, penalised linearly per unit."""

    lo: int
    hi: int
    shortfall_cost: int
    excess_cost: int

    def check(self, where: str) -> None:
        if not 0 <= self.lo <= self.hi:
            raise InstanceFormatError(f"requires 0 <= lo <= hi, got {self.lo}..{self.hi}", location=where)
        if self.shortfall_cost < 0 or self.excess_cost < 0:
            raise InstanceFormatError("negative penalty", location=where)

    def penalty(self, count: int) -> int:
        return self.shortfall_cost * max(0, self.lo - count) + self.excess_cost * max(0, count - self.hi)

    def violation(self, count: int) -> int:
        return max(0, self.lo - count) + max(0, count - self.hi)


@dataclass(frozen=True)
class SeriesSpec:
    """Soft limit on lengths of consecutive runs (work or rest stints)."""

    min_len: int
    max_len: int
    shortfall_cost: int
    excess_cost: int

    def check(self, where: str) -> None:
        if not 1 <= self.min_len <= self.max_len:
            raise InstanceFormatError(f"requires 1 <= min <= max, got {self.min_len}..{self.max_len}", location=where)
        if self.shortfall_cost < 0 or self.excess_cost < 0:
            raise InstanceFormatError("negative penalty", location=where)


@dataclass(frozen=True)
class NurseContract:
    """Per-nurse skills, counter limits, series limits and requests.

    ``day_requests`` maps a day to ``(work_request_cost, rest_request_cost)``:
    the first is charged when the day is not worked, the second when it is.
    ``shift_requests`` does the same per (day, shift).
    ``non_preferred_cost`` is charged per day worked in the given unit.
    """

    nurse_id: str
    required_units: frozenset[int]
    preferred_units: frozenset[int]
    total_days: RangedCounterSpec
    unit_days: dict[int, RangedCounterSpec]
    max_weekends: int
    weekend_cost: int
    consec_work: SeriesSpec
    consec_rest: SeriesSpec
    day_requests: dict[int, tuple[int, int]] = field(default_factory=dict)
    shift_requests: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)
    non_preferred_cost: dict[tuple[int, int], int] = field(default_factory=dict)

    def check(self) -> None:
        where = f"nurse {self.nurse_id}"
        if not self.required_units:
            raise InstanceFormatError("required unit set is empty", location=where)
        if not self.preferred_units <= self.required_units:
            raise InstanceFormatError("preferred units must be a subset of required units", location=where)
        self.total_days.check(f"{where} total-days")
        for u, spec in self.unit_days.items():
            spec.check(f"{where} unit-days {u}")
        if self.max_weekends < 0 or self.weekend_cost < 0:
            raise InstanceFormatError("negative max-weekends entry", location=where)
        self.consec_work.check(f"{where} consec-work")
        self.consec_rest.check(f"{where} consec-rest")

    def unit_spec(self, unit: int) -> RangedCounterSpec:
        return self.unit_days.get(unit, RangedCounterSpec(0, 10**9, 0, 0))


# One day of a schedule: None for a day off, else (unit, shift).
Assignment = "tuple[int, int] | None"


@dataclass(frozen=True)
class Schedule:
    """One nurse's assignment vector over the horizon."""

    days: tuple[tuple[int, int] | None, ...]
    penalty: int | None = field(default=None, compare=False)

    def work_bits(self) -> tuple[int, ...]:
        return tuple(1 if a is not None else 0 for a in self.days)

    def assignments(self):
        """Yield (day, unit, shift) for every working day."""
        for d, a in enumerate(self.days):
            if a is not None:
                yield (d, a[0], a[1])


@dataclass(frozen=True)
class Roster:
    """One schedule per nurse."""

    schedules: dict[str, Schedule]


@dataclass(frozen=True)
class Instance:
    num_days: int
    units: tuple[str, ...]
    shifts: tuple[str, ...]
    nurses: tuple[NurseContract, ...]
    cover: dict[tuple[int, int, int], int]
    understaff_cost: dict[tuple[int, int, int], int]
    forbidden_rotations: frozenset[tuple[int, int]]

    def validate(self, *, require_whole_weeks: bool = True) -> None:
        if self.num_days <= 0:
            raise InstanceFormatError("days must be positive", location="[horizon]")
        if require_whole_weeks and self.num_days % 7 != 0:
            raise InstanceFormatError(f"days must be a multiple of 7, got {self.num_days}", location="[horizon]")
        nu, ns = len(self.units), len(self.shifts)
        for (d, u, s), r in self.cover.items():
            if not (0 <= d < self.num_days and 0 <= u < nu and 0 <= s < ns):
                raise InstanceFormatError(f"cover key out of range: {(d, u, s)}", location="[cover]")
            if r < 0 or self.understaff_cost.get((d, u, s), 0) < 0:
                raise InstanceFormatError(f"negative cover entry at {(d, u, s)}", location="[cover]")
        for a, b in self.forbidden_rotations:
            if not (0 <= a < ns and 0 <= b < ns):
                raise InstanceFormatError(f"unknown shift in rotation ({a}, {b})", location="[rotations]")
        seen = set()
        for nurse in self.nurses:
            if nurse.nurse_id in seen:
                raise InstanceFormatError(f"duplicate nurse id {nurse.nurse_id}")
            seen.add(nurse.nurse_id)
            nurse.check()
            for u in nurse.required_units:
                if not 0 <= u < nu:
                    raise InstanceFormatError(f"unknown unit index {u}", location=f"nurse {nurse.nurse_id}")

    def nurse(self, nurse_id: str) -> NurseContract:
        for n in self.nurses:
            if n.nurse_id == nurse_id:
                return n
        raise KeyError(nurse_id)

    def cover_at(self, d: int, u: int, s: int) -> int:
        return self.cover.get((d, u, s), 0)

    def understaff_cost_at(self, d: int, u: int, s: int) -> int:
        return self.understaff_cost.get((d, u, s), 0)

    def num_weekends(self) -> int:
        # Weekends are (Saturday, Sunday) pairs; a trailing partial week may
        # contribute one if it reaches Saturday.
        return sum(1 for d in range(self.num_days) if d % 7 == 5) + (
            1 if self.num_days % 7 == 6 else 0
        )

    def is_weekend(self, d: int) -> bool:
        return d % 7 >= 5

    def rotation_ok(self, s_prev: int, s_next: int) -> bool:
        return (s_prev, s_next) not in self.forbidden_rotations

    def objective_quantum(self) -> int:
        """Gcd of all penalty weights: every roster objective is a multiple.

        Each objective term is some weight times a nonnegative violation
        count, so the gcd quantises the achievable values; branch-and-
        bound uses it to prune nodes whose bound cannot be undercut by a
        full quantum.
        """
        weights = [c for c in self.understaff_cost.values()]
        for nurse in self.nurses:
            for spec in [nurse.total_days, *nurse.unit_days.values()]:
                weights += [spec.shortfall_cost, spec.excess_cost]
            for spec in (nurse.consec_work, nurse.consec_rest):
                weights += [spec.shortfall_cost, spec.excess_cost]
            weights.append(nurse.weekend_cost)
            for on, off in nurse.day_requests.values():
                weights += [on, off]
            for on, off in nurse.shift_requests.values():
                weights += [on, off]
            weights += list(nurse.non_preferred_cost.values())
        g = 0
        for w in weights:
            if w > 0:
                g = math.gcd(g, w)
        return g or 1

    def schedule_hard_errors(self, nurse: NurseContract, schedule: Schedule) -> list[str]:
        """Hard-constraint violations of a schedule, as human-readable strings."""
        errs = []
        if len(schedule.days) != self.num_days:
            errs.append(f"schedule length {len(schedule.days)} != horizon {self.num_days}")
            return errs
        prev = None
        for d, a in enumerate(schedule.days):
            if a is not None:
                u, s = a
                if u not in nurse.required_units:
                    errs.append(f"day {d}: unit {self.units[u]} not in required skills")
                if prev is not None and not self.rotation_ok(prev, s):
                    errs.append(
                        f"day {d}: rotation {self.shifts[prev]}->{self.shifts[s]} is forbidden"
                    )
                prev = s
            else:
                prev = None
        return errs


# ---------------------------------------------------------------------------
# Parsing and serialisation


def _ints(parts: list[str], n: int, where: str) -> list[int]:
    if len(parts) != n:
        raise InstanceFormatError(f"expected {n} integers, got {len(parts)}", location=where)
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise InstanceFormatError(f"bad integer in {parts!r}", location=where) from exc


class _NurseBuilder:
    def __init__(self, nurse_id: str):
        self.nurse_id = nurse_id
        self.required: list[int] | None = None
        self.preferred: list[int] | None = None
        self.total_days: RangedCounterSpec | None = None
        self.unit_days: dict[int, RangedCounterSpec] = {}
        self.max_weekends: tuple[int, int] | None = None
        self.consec_work: SeriesSpec | None = None
        self.consec_rest: SeriesSpec | None = None
        self.day_requests: dict[int, tuple[int, int]] = {}
        self.shift_requests: dict[tuple[int, int], tuple[int, int]] = {}
        self.non_preferred: dict[tuple[int, int], int] = {}

    def build(self, num_days: int, weekends: int) -> NurseContract:
        where = f"nurse {self.nurse_id}"
        if self.required is None:
            raise InstanceFormatError("missing 'required' line", location=where)
        mw = self.max_weekends if self.max_weekends is not None else (weekends, 0)
        return NurseContract(
            nurse_id=self.nurse_id,
            required_units=frozenset(self.required),
            preferred_units=frozenset(self.preferred or ()),
            total_days=self.total_days or RangedCounterSpec(0, num_days, 0, 0),
            unit_days=self.unit_days,
            max_weekends=mw[0],
            weekend_cost=mw[1],
            consec_work=self.consec_work or SeriesSpec(1, num_days, 0, 0),
            consec_rest=self.consec_rest or SeriesSpec(1, num_days, 0, 0),
            day_requests=self.day_requests,
            shift_requests=self.shift_requests,
            non_preferred_cost=self.non_preferred,
        )


def parse_instance(text: str) -> Instance:
    """Parse an instance file; raises :class:`InstanceFormatError` on bad input."""
    num_days: int | None = None
    units: list[str] = []
    shifts: list[str] = []
    rotations: list[tuple[str, str]] = []
    cover_lines: list[tuple[str, list[str]]] = []
    nurse_builders: list[_NurseBuilder] = []
    section: str | None = None
    current: _NurseBuilder | None = None

    def unit_index(name: str, where: str) -> int:
        try:
            return units.index(name)
        except ValueError:
            raise InstanceFormatError(f"unknown unit {name!r}", location=where) from None

    def shift_index(name: str, where: str) -> int:
        try:
            return shifts.index(name)
        except ValueError:
            raise InstanceFormatError(f"unknown shift {name!r}", location=where) from None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {line_no}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise InstanceFormatError("unterminated section header", location=where)
            header = line[1:-1].strip()
            if header.startswith("nurse"):
                nurse_id = header[len("nurse"):].strip()
                if not nurse_id:
                    raise InstanceFormatError("nurse section needs an id", location=where)
                current = _NurseBuilder(nurse_id)
                nurse_builders.append(current)
                section = "nurse"
            elif header in ("horizon", "units", "shifts", "rotations", "cover"):
                section = header
                current = None
            else:
                raise InstanceFormatError(f"unknown section [{header}]", location=where)
            continue
        if section is None:
            raise InstanceFormatError("content before first section", location=where)

        parts = line.split()
        if section == "horizon":
            if parts[0] != "days":
                raise InstanceFormatError(f"unknown horizon key {parts[0]!r}", location=where)
            num_days = _ints(parts[1:], 1, f"{where} days")[0]
        elif section == "units":
            if len(parts) != 1 or parts[0] in units:
                raise InstanceFormatError(f"bad or duplicate unit name {line!r}", location=where)
            units.append(parts[0])
        elif section == "shifts":
            if len(parts) != 1 or parts[0] in shifts:
                raise InstanceFormatError(f"bad or duplicate shift name {line!r}", location=where)
            shifts.append(parts[0])
        elif section == "rotations":
            if len(parts) != 2:
                raise InstanceFormatError("rotation needs two shift names", location=where)
            rotations.append((parts[0], parts[1]))
        elif section == "cover":
            if len(parts) != 5:
                raise InstanceFormatError("cover line needs: day unit shift required cost", location=where)
            cover_lines.append((where, parts))
        elif section == "nurse":
            assert current is not None
            key = parts[0]
            args = parts[1:]
            loc = f"{where} nurse {current.nurse_id} {key}"
            if key == "required":
                current.required = [unit_index(u, loc) for u in args]
            elif key == "preferred":
                current.preferred = [unit_index(u, loc) for u in args]
            elif key == "total-days":
                lo, hi, sc, ec = _ints(args, 4, loc)
                current.total_days = RangedCounterSpec(lo, hi, sc, ec)
            elif key == "unit-days":
                u = unit_index(args[0], loc)
                lo, hi, sc, ec = _ints(args[1:], 4, loc)
                current.unit_days[u] = RangedCounterSpec(lo, hi, sc, ec)
            elif key == "max-weekends":
                mw, cost = _ints(args, 2, loc)
                current.max_weekends = (mw, cost)
            elif key == "consec-work":
                a, b, sc, ec = _ints(args, 4, loc)
                current.consec_work = SeriesSpec(a, b, sc, ec)
            elif key == "consec-rest":
                a, b, sc, ec = _ints(args, 4, loc)
                current.consec_rest = SeriesSpec(a, b, sc, ec)
            elif key == "day-request":
                d, on, off = _ints(args, 3, loc)
                current.day_requests[d] = (on, off)
            elif key == "shift-request":
                if len(args) != 4:
                    raise InstanceFormatError("needs: day shift on-cost off-cost", location=loc)
                d = _ints(args[:1], 1, loc)[0]
                s = shift_index(args[1], loc)
                on, off = _ints(args[2:], 2, loc)
                current.shift_requests[(d, s)] = (on, off)
            elif key == "non-preferred":
                if len(args) != 3:
                    raise InstanceFormatError("needs: day unit cost", location=loc)
                d = _ints(args[:1], 1, loc)[0]
                u = unit_index(args[1], loc)
                c = _ints(args[2:], 1, loc)[0]
                current.non_preferred[(d, u)] = c
            else:
                raise InstanceFormatError(f"unknown nurse key {key!r}", location=loc)

    if num_days is None:
        raise InstanceFormatError("missing [horizon] section with 'days'")
    if not units or not shifts:
        raise InstanceFormatError("need at least one unit and one shift")

    cover: dict[tuple[int, int, int], int] = {}
    understaff: dict[tuple[int, int, int], int] = {}
    for d in range(num_days):
        for u in range(len(units)):
            for s in range(len(shifts)):
                cover[(d, u, s)] = 0
                understaff[(d, u, s)] = 0
    for where, parts in cover_lines:
        d = _ints(parts[:1], 1, where)[0]
        u = unit_index(parts[1], where)
        s = shift_index(parts[2], where)
        r, c = _ints(parts[3:], 2, where)
        if not 0 <= d < num_days:
            raise InstanceFormatError(f"day {d} outside horizon", location=where)
        cover[(d, u, s)] = r
        understaff[(d, u, s)] = c

    forbidden = set()
    for a, b in rotations:
        forbidden.add((shift_index(a, "[rotations]"), shift_index(b, "[rotations]")))

    weekends = sum(1 for d in range(num_days) if d % 7 == 5)
    nurses = tuple(nb.build(num_days, weekends) for nb in nurse_builders)
    inst = Instance(
        num_days=num_days,
        units=tuple(units),
        shifts=tuple(shifts),
        nurses=nurses,
        cover=cover,
        understaff_cost=understaff,
        forbidden_rotations=frozenset(forbidden),
    )
    inst.validate()
    return inst


def serialize_instance(instance: Instance) -> str:
    """Canonical text form; stable byte-for-byte for equal instances."""
    out = io.StringIO()
    w = out.write
    w("[horizon]\n")
    w(f"days {instance.num_days}\n\n")
    w("[units]\n")
    for u in instance.units:
        w(f"{u}\n")
    w("\n[shifts]\n")
    for s in instance.shifts:
        w(f"{s}\n")
    w("\n[rotations]\n")
    for a, b in sorted(instance.forbidden_rotations):
        w(f"{instance.shifts[a]} {instance.shifts[b]}\n")
    w("\n[cover]\n")
    for d in range(instance.num_days):
        for u in range(len(instance.units)):
            for s in range(len(instance.shifts)):
                r = instance.cover_at(d, u, s)
                c = instance.understaff_cost_at(d, u, s)
                w(f"{d} {instance.units[u]} {instance.shifts[s]} {r} {c}\n")
    for nurse in instance.nurses:
        w(f"\n[nurse {nurse.nurse_id}]\n")
        w("required " + " ".join(instance.units[u] for u in sorted(nurse.required_units)) + "\n")
        if nurse.preferred_units:
            w("preferred " + " ".join(instance.units[u] for u in sorted(nurse.preferred_units)) + "\n")
        t = nurse.total_days
        w(f"total-days {t.lo} {t.hi} {t.shortfall_cost} {t.excess_cost}\n")
        for u in sorted(nurse.unit_days):
            spec = nurse.unit_days[u]
            w(f"unit-days {instance.units[u]} {spec.lo} {spec.hi} {spec.shortfall_cost} {spec.excess_cost}\n")
        w(f"max-weekends {nurse.max_weekends} {nurse.weekend_cost}\n")
        cw, cr = nurse.consec_work, nurse.consec_rest
        w(f"consec-work {cw.min_len} {cw.max_len} {cw.shortfall_cost} {cw.excess_cost}\n")
        w(f"consec-rest {cr.min_len} {cr.max_len} {cr.shortfall_cost} {cr.excess_cost}\n")
        for d in sorted(nurse.day_requests):
            on, off = nurse.day_requests[d]
            w(f"day-request {d} {on} {off}\n")
        for d, s in sorted(nurse.shift_requests):
            on, off = nurse.shift_requests[(d, s)]
            w(f"shift-request {d} {instance.shifts[s]} {on} {off}\n")
        for d, u in sorted(nurse.non_preferred_cost):
            w(f"non-preferred {d} {instance.units[u]} {nurse.non_preferred_cost[(d, u)]}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Roster files: one line per nurse, `id day:unit/shift ...`, omitted days off.


def serialize_roster(instance: Instance, roster: Roster) -> str:
    out = []
    for nurse_id in sorted(roster.schedules):
        schedule = roster.schedules[nurse_id]
        toks = [nurse_id]
        for d, u, s in schedule.assignments():
            toks.append(f"{d}:{instance.units[u]}/{instance.shifts[s]}")
        out.append(" ".join(toks))
    return "\n".join(out) + "\n"


def parse_roster(instance: Instance, text: str) -> Roster:
    schedules: dict[str, Schedule] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {line_no}"
        parts = line.split()
        nurse_id = parts[0]
        if not any(n.nurse_id == nurse_id for n in instance.nurses):
            raise InstanceFormatError(f"unknown nurse {nurse_id!r}", location=where)
        if nurse_id in schedules:
            raise InstanceFormatError(f"duplicate roster line for nurse {nurse_id}", location=where)
        days: list[tuple[int, int] | None] = [None] * instance.num_days
        for tok in parts[1:]:
            try:
                day_str, rest = tok.split(":", 1)
                unit_name, shift_name = rest.split("/", 1)
                d = int(day_str)
            except ValueError:
                raise InstanceFormatError(f"bad assignment token {tok!r}", location=where) from None
            if not 0 <= d < instance.num_days:
                raise InstanceFormatError(f"day {d} outside horizon", location=where)
            if unit_name not in instance.units or shift_name not in instance.shifts:
                raise InstanceFormatError(f"unknown unit or shift in {tok!r}", location=where)
            days[d] = (instance.units.index(unit_name), instance.shifts.index(shift_name))
        schedules[nurse_id] = Schedule(tuple(days))
    return Roster(schedules)


# ---------------------------------------------------------------------------
# Seeded generator


def generate_instance(nurses: int, weeks: int, units: int, seed: int) -> Instance:
    """Deterministically generate a benchmark-shaped instance.

    Three shifts (early, late, night) per unit, the standard forbidden
    rotations, one preferred unit per nurse with a random required
    superset, and cover requirements in {0, 1, 2} targeting roughly 70%
    of nurse supply while never exceeding the skilled headcount of a unit
    on any day.
    """
    if nurses < 1 or weeks < 1 or units < 1:
        raise ValueError("nurses, weeks and units must all be >= 1")
    rng = random.Random(seed)
    num_days = 7 * weeks
    unit_names = tuple(f"u{i}" for i in range(units))
    shift_names = DEFAULT_SHIFTS
    s_idx = {name: i for i, name in enumerate(shift_names)}
    forbidden = frozenset((s_idx[a], s_idx[b]) for a, b in DEFAULT_FORBIDDEN)

    width = max(2, len(str(nurses - 1)))
    alpha_lo = max(1, round(0.36 * num_days))
    alpha_hi = max(alpha_lo, round(0.64 * num_days))
    contracts = []
    for i in range(nurses):
        nurse_id = f"n{i:0{width}d}"
        pref = rng.randrange(units)
        required = [pref] + [u for u in range(units) if u != pref and rng.random() < 0.35]
        required.sort()
        unit_days = {}
        for u in required:
            if u == pref:
                unit_days[u] = RangedCounterSpec(round(0.5 * alpha_lo), alpha_hi, 10, 10)
            else:
                unit_days[u] = RangedCounterSpec(0, math.ceil(0.6 * alpha_hi), 10, 10)
        consec_work = SeriesSpec(2, rng.choice([4, 5, 6]), 15, 15)
        consec_rest = SeriesSpec(rng.choice([1, 2]), rng.choice([3, 4, 5]), 15, 15)
        day_requests = {}
        for d in range(num_days):
            roll = rng.random()
            if roll < 0.08:
                day_requests[d] = (10, 0)
            elif roll < 0.16:
                day_requests[d] = (0, 10)
        shift_requests = {}
        for d in range(num_days):
            for s in range(len(shift_names)):
                roll = rng.random()
                if roll < 0.03:
                    shift_requests[(d, s)] = (10, 0)
                elif roll < 0.06:
                    shift_requests[(d, s)] = (0, 10)
        non_pref = {}
        for u in required:
            if u != pref:
                for d in range(num_days):
                    non_pref[(d, u)] = 5
        contracts.append(
            NurseContract(
                nurse_id=nurse_id,
                required_units=frozenset(required),
                preferred_units=frozenset({pref}),
                total_days=RangedCounterSpec(alpha_lo, alpha_hi, 20, 20),
                unit_days=unit_days,
                max_weekends=(weeks + 1) // 2,
                weekend_cost=30,
                consec_work=consec_work,
                consec_rest=consec_rest,
                day_requests=day_requests,
                shift_requests=shift_requests,
                non_preferred_cost=non_pref,
            )
        )

    skilled = [sum(1 for c in contracts if u in c.required_units) for u in range(units)]
    mean_cover = min(2.0, 0.7 * nurses / (units * len(shift_names)))
    base, frac = int(mean_cover), mean_cover - int(mean_cover)
    cover: dict[tuple[int, int, int], int] = {}
    understaff: dict[tuple[int, int, int], int] = {}
    for d in range(num_days):
        for u in range(units):
            for s in range(len(shift_names)):
                r = base + (1 if rng.random() < frac else 0)
                cover[(d, u, s)] = min(2, r)
                understaff[(d, u, s)] = 30
            # Daily demand of a unit may not exceed its skilled headcount.
            while sum(cover[(d, u, s)] for s in range(len(shift_names))) > skilled[u]:
                worst = max(range(len(shift_names)), key=lambda s: (cover[(d, u, s)], -s))
                cover[(d, u, worst)] -= 1

    inst = Instance(
        num_days=num_days,
        units=unit_names,
        shifts=shift_names,
        nurses=tuple(contracts),
        cover=cover,
        understaff_cost=understaff,
        forbidden_rotations=forbidden,
    )
    inst.validate()
    return inst


def restrict_to_preferred(instance: Instance) -> Instance:
    """Restrict every nurse to the units they are preferred for.

    Used by the single-unit-assignment baseline; penalties are unchanged.
    """
    nurses = tuple(
        replace(n, required_units=n.preferred_units) for n in instance.nurses
    )
    return replace(instance, nurses=nurses)


# ---------------------------------------------------------------------------
# Roster validation


@dataclass(frozen=True)
class HardViolation:
    nurse_id: str
    detail: str


@dataclass
class RosterReport:
    """Objective and per-constraint accounting for a full roster."""

    total_objective: int
    schedule_cost: int
    understaff_count: int
    understaff_cost: int
    breakdowns: dict[str, "object"]  # nurse id -> oracle.PenaltyBreakdown
    hard_violations: list[HardViolation]

    @property
    def hard_feasible(self) -> bool:
        return not self.hard_violations

    def to_csv(self) -> str:
        rows = ["constraint,nurse,violationCount,penalty"]
        for nurse_id in sorted(self.breakdowns):
            bd = self.breakdowns[nurse_id]
            for name in bd.CONSTRAINTS:
                count, cost = bd.items[name]
                rows.append(f"{name},{nurse_id},{count},{cost}")
        rows.append(f"understaffing,-,{self.understaff_count},{self.understaff_cost}")
        for hv in self.hard_violations:
            rows.append(f"hard,{hv.nurse_id},1,0")
        return "\n".join(rows) + "\n"


def validate_roster(instance: Instance, roster: Roster, *, close_trailing: bool = True) -> RosterReport:
    """Score a roster: soft-penalty breakdown, understaffing, hard flags."""
    from . import oracle  # deferred: oracle depends on this module's types

    missing = [n.nurse_id for n in instance.nurses if n.nurse_id not in roster.schedules]
    if missing:
        raise InstanceFormatError(f"roster is missing schedules for: {', '.join(missing)}")

    breakdowns = {}
    hard: list[HardViolation] = []
    schedule_cost = 0
    assigned: dict[tuple[int, int, int], int] = {}
    for nurse in instance.nurses:
        schedule = roster.schedules[nurse.nurse_id]
        for err in instance.schedule_hard_errors(nurse, schedule):
            hard.append(HardViolation(nurse.nurse_id, err))
        bd = oracle.schedule_penalty(
            instance, nurse, schedule, close_trailing=close_trailing, check_hard=False
        )
        breakdowns[nurse.nurse_id] = bd
        schedule_cost += bd.total
        for d, u, s in schedule.assignments():
            assigned[(d, u, s)] = assigned.get((d, u, s), 0) + 1

    under_count = 0
    under_cost = 0
    for key, r in instance.cover.items():
        short = max(0, r - assigned.get(key, 0))
        under_count += short
        under_cost += short * instance.understaff_cost[key]

    return RosterReport(
        total_objective=schedule_cost + under_cost,
        schedule_cost=schedule_cost,
        understaff_count=under_count,
        understaff_cost=under_cost,
        breakdowns=breakdowns,
        hard_violations=hard,
    )

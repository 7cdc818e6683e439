"""Branch-and-price solver for nurse rostering with multiple units."""

from .instance import (
    Instance,
    NurseContract,
    RangedCounterSpec,
    Roster,
    Schedule,
    SeriesSpec,
    generate_instance,
    parse_instance,
    serialize_instance,
    validate_roster,
)
from .graphs import BranchConstraintSet, DualValues, build_graph
from .labeling import Variant, solve_pricing
from .colgen import run_column_generation
from .bnp import branch_and_price, initial_roster
from .oracle import brute_force_roster, enumerate_schedules, schedule_penalty

__all__ = [
    "Instance",
    "NurseContract",
    "RangedCounterSpec",
    "SeriesSpec",
    "Schedule",
    "Roster",
    "generate_instance",
    "parse_instance",
    "serialize_instance",
    "validate_roster",
    "BranchConstraintSet",
    "DualValues",
    "build_graph",
    "Variant",
    "solve_pricing",
    "run_column_generation",
    "branch_and_price",
    "initial_roster",
    "schedule_penalty",
    "enumerate_schedules",
    "brute_force_roster",
]

__version__ = "0.1.0"

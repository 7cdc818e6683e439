"""Restricted master LP: revised primal simplex with column addition.

The master has one covering row per (day, unit, shift) with an
understaffing column (penalised) and a zero-cost surplus column, plus one
convexity row per nurse.  Schedule columns carry their nurse's penalty as
objective coefficient, cover incidences, and a single 1 in their
convexity row; together with nonnegativity that keeps them in [0, 1]
without explicit bounds.

The simplex is dense (row counts stay in the few hundreds), keeps an
explicit basis inverse with periodic refactorisation, prices with
Dantzig's rule and falls back to Bland's rule after a run of degenerate
pivots.  Because the data is integral, the optimal objective is rational;
``exact_objective`` recovers it exactly from the final basis so different
solve paths report bit-identical converged values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graphs import DualValues
from .instance import Instance, Schedule

__all__ = ["Column", "RmpModel", "RmpSolution", "LpError", "solve_rmp", "exact_objective"]

logger = logging.getLogger("nurse_bnp.lp")

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-9
OPT_TOL = 1e-7


class LpError(RuntimeError):
    """Numerical failure the solver could not recover from."""


@dataclass(frozen=True)
class Column:
    """One schedule column of the master problem."""

    nurse_id: str
    schedule: Schedule
    cost: int

    def key(self) -> tuple:
        return (self.nurse_id, self.schedule.days)


@dataclass(frozen=True)
class RmpSolution:
    objective: float
    column_values: dict[int, float]  # schedule column index -> primal value
    understaffing: dict[tuple[int, int, int], float]
    duals: DualValues
    basis: tuple[int, ...]
    iterations: int


class RmpModel:
    """Growable master problem over a fixed row structure."""

    def __init__(self, instance: Instance, columns: list[Column] | None = None):
        self.instance = instance
        self.slots = sorted(instance.cover)
        self.row_of_slot = {slot: i for i, slot in enumerate(self.slots)}
        self.nurse_ids = [n.nurse_id for n in instance.nurses]
        self.row_of_nurse = {
            nurse_id: len(self.slots) + i for i, nurse_id in enumerate(self.nurse_ids)
        }
        self.num_rows = len(self.slots) + len(self.nurse_ids)
        self.b = np.array(
            [instance.cover[s] for s in self.slots] + [1] * len(self.nurse_ids),
            dtype=np.float64,
        )

        self._capacity = max(64, 4 * self.num_rows)
        self._a = np.zeros((self.num_rows, self._capacity), dtype=np.float64)
        self._cost: list[float] = []
        self._entries: list[list[tuple[int, int]]] = []  # per column: (row, coeff)
        self.columns: list[Column | None] = []  # schedule Column or None for v/s
        self._kind: list[str] = []
        self._dedup: dict[tuple, int] = {}
        self.basis: list[int] | None = None

        self.slack_of_row: list[int] = []
        self.surplus_of_row: list[int] = []
        for i, slot in enumerate(self.slots):
            self.slack_of_row.append(
                self._append(instance.understaff_cost[slot], [(i, 1)], "slack", None)
            )
            self.surplus_of_row.append(self._append(0, [(i, -1)], "surplus", None))
        if columns:
            for col in columns:
                self.add_column(col)

    # -- column bookkeeping

    def _append(self, cost, entries, kind, column) -> int:
        j = len(self._cost)
        if j == self._capacity:
            self._capacity *= 2
            grown = np.zeros((self.num_rows, self._capacity), dtype=np.float64)
            grown[:, :j] = self._a[:, :j]
            self._a = grown
        for row, coeff in entries:
            self._a[row, j] = coeff
        self._cost.append(float(cost))
        self._entries.append(entries)
        self._kind.append(kind)
        self.columns.append(column)
        return j

    def add_column(self, column: Column) -> int | None:
        """Add a schedule column; duplicates are accepted but not stored.

        Returns the column index, or None when an identical column for
        the same nurse already exists.
        """
        if column.nurse_id not in self.row_of_nurse:
            raise KeyError(f"unknown nurse {column.nurse_id}")
        key = column.key()
        if key in self._dedup:
            return None
        entries = [(self.row_of_nurse[column.nurse_id], 1)]
        for d, u, s in column.schedule.assignments():
            entries.append((self.row_of_slot[(d, u, s)], 1))
        j = self._append(column.cost, entries, "schedule", column)
        self._dedup[key] = j
        return j

    @property
    def num_cols(self) -> int:
        return len(self._cost)

    def matrix(self) -> np.ndarray:
        return self._a[:, : self.num_cols]

    def cost_vector(self) -> np.ndarray:
        return np.array(self._cost, dtype=np.float64)

    def schedule_columns_of(self, nurse_id: str) -> list[int]:
        return [
            j
            for j, col in enumerate(self.columns)
            if col is not None and col.nurse_id == nurse_id
        ]

    def initial_basis(self) -> list[int]:
        """Primal-feasible starting basis: one column per nurse, then per
        cover row its understaffing or surplus column depending on sign."""
        first_col: dict[str, int] = {}
        for j, col in enumerate(self.columns):
            if col is not None and col.nurse_id not in first_col:
                first_col[col.nurse_id] = j
        missing = [n for n in self.nurse_ids if n not in first_col]
        if missing:
            raise LpError(f"no schedule column for nurses: {', '.join(missing)}")
        coverage = np.zeros(len(self.slots))
        for j in first_col.values():
            for row, coeff in self._entries[j]:
                if row < len(self.slots):
                    coverage[row] += coeff
        basis = []
        for i, slot in enumerate(self.slots):
            # Strict shortfall needs the costed understaffing column; on a
            # tie the free surplus keeps the dual of the row at zero.
            if coverage[i] < self.instance.cover[slot]:
                basis.append(self.slack_of_row[i])
            else:
                basis.append(self.surplus_of_row[i])
        basis.extend(first_col[n] for n in self.nurse_ids)
        return basis

    def to_lp_text(self) -> str:
        """Model dump in LP interchange format for external verification."""
        lines = ["Minimize", " obj:"]
        terms = []
        for j in range(self.num_cols):
            if self._cost[j]:
                terms.append(f" + {self._cost[j]:g} x{j}")
        lines.append("".join(terms) if terms else " 0 x0")
        lines.append("Subject To")
        for i in range(self.num_rows):
            row_terms = []
            for j in range(self.num_cols):
                coeff = self._a[i, j]
                if coeff:
                    sign = "+" if coeff > 0 else "-"
                    row_terms.append(f" {sign} {abs(coeff):g} x{j}")
            op = ">=" if i < len(self.slots) else "="
            lines.append(f" r{i}:{''.join(row_terms)} {op} {self.b[i]:g}")
        lines.append("Bounds")
        for j in range(self.num_cols):
            lines.append(f" 0 <= x{j}")
        lines.append("End")
        return "\n".join(lines) + "\n"


def solve_rmp(model: RmpModel, warm_basis: tuple[int, ...] | None = None) -> RmpSolution:
    """Solve the master LP to optimality and extract duals.

    ``warm_basis`` (or the basis cached on the model from a previous
    solve) is reused when it is still primal feasible; new columns enter
    nonbasic so this is always the case during column generation.
    """
    m = model.num_rows
    n = model.num_cols
    a = model.matrix()
    c = model.cost_vector()
    b = model.b

    basis = list(warm_basis) if warm_basis is not None else None
    if basis is None and model.basis is not None:
        basis = list(model.basis)
    if basis is None or len(basis) != m or max(basis) >= n:
        basis = model.initial_basis()

    try:
        binv = np.linalg.inv(a[:, basis])
    except np.linalg.LinAlgError:
        basis = model.initial_basis()
        binv = np.linalg.inv(a[:, basis])
    x_b = binv @ b
    if x_b.min() < -1e-7:
        basis = model.initial_basis()
        binv = np.linalg.inv(a[:, basis])
        x_b = binv @ b

    in_basis = np.zeros(n, dtype=bool)
    in_basis[basis] = True
    degenerate_run = 0
    bland_after = 3 * m
    pivots = 0
    recoveries = 0
    max_pivots = 2000 + 40 * (m + n)

    while True:
        if pivots > max_pivots:
            raise LpError(f"simplex exceeded {max_pivots} pivots")
        y = c[basis] @ binv
        rc = c - y @ a
        rc[in_basis] = 0.0
        bland = degenerate_run > bland_after
        if bland:
            candidates = np.flatnonzero(rc < -OPT_TOL)
            if candidates.size == 0:
                break
            j = int(candidates[0])
        else:
            j = int(np.argmin(rc))
            if rc[j] >= -OPT_TOL:
                break
        w = binv @ a[:, j]
        eligible = np.flatnonzero(w > PIVOT_TOL)
        if eligible.size == 0:
            raise LpError("unbounded direction in master LP")
        # Degeneracy noise can leave tiny negative basic values; treating
        # them as zero keeps the step nonnegative.
        ratios = np.maximum(x_b[eligible], 0.0) / w[eligible]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + FEAS_TOL)
        if bland:
            r = int(eligible[ties[np.argmin(np.array(basis)[eligible[ties]])]])
        else:
            r = int(eligible[ties[np.argmax(w[eligible[ties]])]])
        step = max(x_b[r], 0.0) / w[r]
        degenerate_run = degenerate_run + 1 if step < 1e-11 else 0

        in_basis[basis[r]] = False
        in_basis[j] = True
        basis[r] = j
        piv = w[r]
        binv[r, :] /= piv
        w_col = w.copy()
        w_col[r] = 0.0
        binv -= np.outer(w_col, binv[r, :])
        pivots += 1
        if pivots % 64 == 0:
            binv = np.linalg.inv(a[:, basis])
        x_b = binv @ b
        if x_b.min() < -1e-6:
            binv = np.linalg.inv(a[:, basis])
            x_b = binv @ b
            if x_b.min() < -1e-6:
                # The basis itself went infeasible (bad pivot under heavy
                # degeneracy): restart from the always-feasible basis.
                recoveries += 1
                if recoveries > 3:
                    raise LpError("lost primal feasibility repeatedly")
                logger.debug("primal feasibility lost; cold restart %d", recoveries)
                basis = model.initial_basis()
                binv = np.linalg.inv(a[:, basis])
                x_b = binv @ b
                in_basis = np.zeros(n, dtype=bool)
                in_basis[basis] = True
                degenerate_run = bland_after + 1  # stay on Bland's rule

    model.basis = list(basis)
    y = c[basis] @ binv
    objective = float(c[basis] @ x_b)

    column_values: dict[int, float] = {}
    understaffing: dict[tuple[int, int, int], float] = {}
    for pos, j in enumerate(basis):
        value = float(max(0.0, x_b[pos]))
        if model.columns[j] is not None:
            column_values[j] = value
        elif model._kind[j] == "slack" and value > FEAS_TOL:
            slot = model.slots[model.slack_of_row.index(j)]
            understaffing[slot] = value

    cover_duals = {slot: float(y[i]) for i, slot in enumerate(model.slots)}
    nurse_duals = {
        nurse_id: float(y[len(model.slots) + i]) for i, nurse_id in enumerate(model.nurse_ids)
    }
    return RmpSolution(
        objective=objective,
        column_values=column_values,
        understaffing=understaffing,
        duals=DualValues(cover=cover_duals, nurse=nurse_duals),
        basis=tuple(basis),
        iterations=pivots,
    )


# ---------------------------------------------------------------------------
# Exact objective recovery


def _verify_rational(model: RmpModel, basis, x: list[Fraction]) -> bool:
    m = model.num_rows
    lhs = [Fraction(0)] * m
    for pos, j in enumerate(basis):
        xj = x[pos]
        if xj == 0:
            continue
        for row, coeff in model._entries[j]:
            lhs[row] += coeff * xj
    return all(lhs[i] == Fraction(int(model.b[i])) for i in range(m))


def _exact_basic_solution(model: RmpModel, basis) -> list[Fraction]:
    """Solve the basis system exactly over the rationals (fallback path)."""
    m = model.num_rows
    mat = [[Fraction(0)] * m + [Fraction(int(model.b[i]))] for i in range(m)]
    for pos, j in enumerate(basis):
        for row, coeff in model._entries[j]:
            mat[row][pos] = Fraction(coeff)
    for col in range(m):
        pivot_row = next((r for r in range(col, m) if mat[r][col] != 0), None)
        if pivot_row is None:
            raise LpError("singular basis in exact solve")
        mat[col], mat[pivot_row] = mat[pivot_row], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [v * inv for v in mat[col]]
        for r in range(m):
            if r != col and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [a - factor * b for a, b in zip(mat[r], mat[col])]
    return [mat[i][m] for i in range(m)]


def exact_objective(model: RmpModel, basis) -> Fraction:
    """Exact rational objective of the basic solution for ``basis``.

    Snaps the floating basic solution to nearby rationals and verifies
    them against the (integer) basis equations; falls back to exact
    Gaussian elimination when the snap fails.  The LP optimum is unique,
    so any optimal basis yields the same value.
    """
    a = model.matrix()
    x_float = np.linalg.solve(a[:, basis], model.b)
    x = [Fraction(float(v)).limit_denominator(1 << 24) for v in x_float]
    if not _verify_rational(model, basis, x):
        logger.debug("rational snap failed; running exact elimination")
        x = _exact_basic_solution(model, basis)
    total = Fraction(0)
    for pos, j in enumerate(basis):
        total += Fraction(int(model._cost[j])) * x[pos]
    return total

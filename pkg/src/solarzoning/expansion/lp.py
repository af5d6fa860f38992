"""A named sparse linear program with a HiGHS solve wrapper.

Rows and variables are registered by unique name (names must be free of
whitespace so they survive an MPS round trip).  Solving hands sparse
matrices to scipy's HiGHS interface and verifies the returned point against
the row definitions before reporting it optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ..errors import ValidationError

INF = math.inf


@dataclass
class Solution:
    """Outcome of one LP solve."""

    status: str
    objective: float | None
    x: np.ndarray | None
    var_index: dict[str, int] = field(default_factory=dict)
    message: str = ""

    def value(self, name: str) -> float:
        if self.x is None:
            raise ValidationError(f"no solution values available ({self.status})")
        return float(self.x[self.var_index[name]])

    def get(self, name: str, default: float = 0.0) -> float:
        if self.x is None or name not in self.var_index:
            return default
        return float(self.x[self.var_index[name]])


class LinearProgram:
    """Minimize c'x subject to named E/L/G rows and variable bounds."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.var_names: list[str] = []
        self._var_index: dict[str, int] = {}
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._obj: list[float] = []
        self.row_names: list[str] = []
        self._row_index: dict[str, int] = {}
        self._row_sense: list[str] = []
        self._row_rhs: list[float] = []
        self._row_cols: list[list[int]] = []
        self._row_vals: list[list[float]] = []

    # -- construction ------------------------------------------------------

    @staticmethod
    def _check_name(name: str) -> str:
        if not name or any(ch.isspace() for ch in name):
            raise ValidationError(f"bad name {name!r}: must be non-empty, no spaces")
        return name

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF,
                obj: float = 0.0) -> int:
        name = self._check_name(name)
        if name in self._var_index:
            raise ValidationError(f"duplicate variable {name!r}")
        if lb > ub:
            raise ValidationError(f"variable {name!r}: lb > ub")
        idx = len(self.var_names)
        self.var_names.append(name)
        self._var_index[name] = idx
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._obj.append(float(obj))
        return idx

    def add_obj(self, idx: int, coef: float) -> None:
        self._obj[idx] += float(coef)

    def add_row(self, name: str, sense: str, rhs: float,
                terms: list[tuple[int, float]]) -> int:
        name = self._check_name(name)
        if name in self._row_index:
            raise ValidationError(f"duplicate row {name!r}")
        if sense not in ("E", "L", "G"):
            raise ValidationError(f"row {name!r}: sense must be E, L or G")
        merged: dict[int, float] = {}
        for idx, coef in terms:
            if not 0 <= idx < len(self.var_names):
                raise ValidationError(f"row {name!r}: unknown variable index {idx}")
            merged[idx] = merged.get(idx, 0.0) + float(coef)
        row = len(self.row_names)
        self.row_names.append(name)
        self._row_index[name] = row
        self._row_sense.append(sense)
        self._row_rhs.append(float(rhs))
        cols = sorted(merged)
        self._row_cols.append(cols)
        self._row_vals.append([merged[c] for c in cols])
        return row

    # -- views -------------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    def var_index(self, name: str) -> int:
        return self._var_index[name]

    def objective_coefficients(self) -> np.ndarray:
        return np.asarray(self._obj, dtype=np.float64)

    def bounds(self) -> list[tuple[float, float]]:
        return list(zip(self._lb, self._ub))

    def rows(self):
        """Yield (name, sense, rhs, cols, vals) for every row."""
        for i in range(self.n_rows):
            yield (self.row_names[i], self._row_sense[i], self._row_rhs[i],
                   self._row_cols[i], self._row_vals[i])

    def _matrices(self):
        eq_r, eq_c, eq_v, eq_rhs = [], [], [], []
        ub_r, ub_c, ub_v, ub_rhs = [], [], [], []
        for i in range(self.n_rows):
            sense = self._row_sense[i]
            cols = self._row_cols[i]
            vals = self._row_vals[i]
            if sense == "E":
                r = len(eq_rhs)
                eq_rhs.append(self._row_rhs[i])
                eq_r.extend([r] * len(cols))
                eq_c.extend(cols)
                eq_v.extend(vals)
            else:
                flip = -1.0 if sense == "G" else 1.0
                r = len(ub_rhs)
                ub_rhs.append(flip * self._row_rhs[i])
                ub_r.extend([r] * len(cols))
                ub_c.extend(cols)
                ub_v.extend([flip * v for v in vals])
        n = self.n_vars
        a_eq = (
            sp.csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(eq_rhs), n))
            if eq_rhs else None
        )
        a_ub = (
            sp.csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(ub_rhs), n))
            if ub_rhs else None
        )
        return a_eq, np.asarray(eq_rhs), a_ub, np.asarray(ub_rhs)

    # -- checks and solve ----------------------------------------------------

    def max_violation(self, x: np.ndarray) -> float:
        """Largest absolute row/bound violation at a point."""
        worst = 0.0
        for lb, ub, xi in zip(self._lb, self._ub, x):
            if lb > -INF:
                worst = max(worst, lb - xi)
            if ub < INF:
                worst = max(worst, xi - ub)
        for i in range(self.n_rows):
            lhs = sum(
                v * x[c] for c, v in zip(self._row_cols[i], self._row_vals[i])
            )
            gap = lhs - self._row_rhs[i]
            sense = self._row_sense[i]
            if sense == "E":
                worst = max(worst, abs(gap))
            elif sense == "L":
                worst = max(worst, gap)
            else:
                worst = max(worst, -gap)
        return float(worst)

    def objective_value(self, x: np.ndarray) -> float:
        return float(np.dot(self.objective_coefficients(), x))

    def solve(self) -> Solution:
        """Solve with HiGHS; statuses map to optimal/infeasible/unbounded/error."""
        if self.n_vars == 0:
            return Solution("optimal", 0.0, np.zeros(0), dict(self._var_index))
        a_eq, b_eq, a_ub, b_ub = self._matrices()
        res = linprog(
            c=self.objective_coefficients(),
            A_ub=a_ub,
            b_ub=b_ub if a_ub is not None else None,
            A_eq=a_eq,
            b_eq=b_eq if a_eq is not None else None,
            bounds=self.bounds(),
            method="highs",
        )
        if res.status == 0:
            return Solution(
                "optimal", float(res.fun), np.asarray(res.x),
                dict(self._var_index), res.message,
            )
        if res.status == 2:
            return Solution("infeasible", None, None, dict(self._var_index), res.message)
        if res.status == 3:
            return Solution("unbounded", None, None, dict(self._var_index), res.message)
        return Solution("error", None, None, dict(self._var_index), res.message)


def solve(lp: LinearProgram) -> Solution:
    """Module-level convenience wrapper around ``LinearProgram.solve``."""
    return lp.solve()

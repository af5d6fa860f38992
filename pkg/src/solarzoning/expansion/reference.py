"""Independent LP solves through CVXOPT, for cross-checking HiGHS results.

The GLPK simplex bundled with cvxopt is preferred; the conic interior-point
solver is the fallback.  Either way the solve shares no code with the
primary HiGHS path beyond the LinearProgram container itself.
"""

from __future__ import annotations

import numpy as np

from .lp import INF, LinearProgram, Solution


def solve_reference(lp: LinearProgram) -> Solution:
    """Solve min c'x s.t. rows and bounds using cvxopt (GLPK when available)."""
    from cvxopt import matrix, solvers, spmatrix

    n = lp.n_vars
    if n == 0:
        return Solution("optimal", 0.0, np.zeros(0), {})
    c = matrix(lp.objective_coefficients())

    g_rows: list[tuple[list[int], list[float], float]] = []
    a_rows: list[tuple[list[int], list[float], float]] = []
    for _, sense, rhs, cols, vals in lp.rows():
        if sense == "E":
            a_rows.append((list(cols), list(vals), rhs))
        elif sense == "L":
            g_rows.append((list(cols), list(vals), rhs))
        else:  # G: negate into <=
            g_rows.append((list(cols), [-v for v in vals], -rhs))
    for j, (lb, ub) in enumerate(lp.bounds()):
        if ub < INF:
            g_rows.append(([j], [1.0], ub))
        if lb > -INF:
            g_rows.append(([j], [-1.0], -lb))

    def build(rows):
        ii, jj, vv, rhs_list = [], [], [], []
        for r, (cols, vals, rhs) in enumerate(rows):
            ii.extend([r] * len(cols))
            jj.extend(cols)
            vv.extend(vals)
            rhs_list.append(rhs)
        mat = spmatrix(vv, ii, jj, (len(rows), n)) if rows else None
        vec = matrix(np.asarray(rhs_list)) if rows else None
        return mat, vec

    g_mat, h_vec = build(g_rows)
    a_mat, b_vec = build(a_rows)
    if g_mat is None:
        # cvxopt requires at least one inequality; add a vacuous one.
        g_mat = spmatrix([0.0], [0], [0], (1, n))
        h_vec = matrix(np.asarray([1.0]))

    kwargs = {"G": g_mat, "h": h_vec}
    if a_mat is not None:
        kwargs["A"] = a_mat
        kwargs["b"] = b_vec

    solvers.options["show_progress"] = False
    solvers.options["glpk"] = {"msg_lev": "GLP_MSG_OFF"}
    try:
        result = solvers.lp(c, solver="glpk", **kwargs)
    except (ValueError, ArithmeticError):
        result = solvers.lp(c, **kwargs)

    status = result.get("status", "unknown")
    var_index = {name: j for j, name in enumerate(lp.var_names)}
    if status == "optimal":
        x = np.asarray(result["x"]).reshape(-1)
        return Solution("optimal", lp.objective_value(x), x, var_index)
    if "infeasible" in status:
        kind = "unbounded" if "dual" in status else "infeasible"
        return Solution(kind, None, None, var_index, status)
    return Solution("error", None, None, var_index, status)

"""Free-format MPS export and import for LinearProgram objects.

The writer emits NAME/ROWS/COLUMNS/RHS/BOUNDS/ENDATA with one coefficient
per COLUMNS line and repr-precision numbers; the reader accepts the same
dialect (plus multi-pair COLUMNS/RHS lines and ``*`` comments), so a
write/read round trip reproduces the variables, rows, senses, bounds, and
coefficients exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import IO

from ..errors import ValidationError
from .lp import INF, LinearProgram

_OBJ_ROW = "COST"


def _fmt(value: float) -> str:
    return repr(float(value))


def write_mps(lp: LinearProgram, dest: IO[str] | str | Path) -> None:
    """Write an LP as free-format MPS (minimization objective row COST)."""
    if hasattr(dest, "write"):
        _write(lp, dest)
    else:
        path = Path(dest)
        with path.open("w") as handle:
            _write(lp, handle)


def _write(lp: LinearProgram, out: IO[str]) -> None:
    out.write(f"NAME {lp.name}\n")
    out.write("ROWS\n")
    out.write(f" N {_OBJ_ROW}\n")
    for name, sense, _, _, _ in lp.rows():
        out.write(f" {sense} {name}\n")
    obj = lp.objective_coefficients()
    entries: dict[int, list[tuple[str, float]]] = {j: [] for j in range(lp.n_vars)}
    for name, _, _, cols, vals in lp.rows():
        for c, v in zip(cols, vals):
            entries[c].append((name, v))
    out.write("COLUMNS\n")
    for j, var in enumerate(lp.var_names):
        rows = entries[j]
        if obj[j] != 0.0 or not rows:
            # Vars outside every row still need a COLUMNS entry to exist.
            out.write(f"    {var} {_OBJ_ROW} {_fmt(obj[j])}\n")
        for row_name, coef in rows:
            out.write(f"    {var} {row_name} {_fmt(coef)}\n")
    out.write("RHS\n")
    for name, _, rhs, _, _ in lp.rows():
        if rhs != 0.0:
            out.write(f"    RHS1 {name} {_fmt(rhs)}\n")
    out.write("BOUNDS\n")
    for j, (lb, ub) in enumerate(lp.bounds()):
        var = lp.var_names[j]
        if lb == ub:
            out.write(f" FX BND {var} {_fmt(lb)}\n")
            continue
        if lb == -INF and ub == INF:
            out.write(f" FR BND {var}\n")
            continue
        if lb == -INF:
            out.write(f" MI BND {var}\n")
        elif lb != 0.0:
            out.write(f" LO BND {var} {_fmt(lb)}\n")
        if ub < INF:
            out.write(f" UP BND {var} {_fmt(ub)}\n")
    out.write("ENDATA\n")


def read_mps(source: IO[str] | str | Path) -> LinearProgram:
    """Parse free-format MPS written by ``write_mps`` (or compatible)."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
        name_hint = "lp"
    else:
        path = Path(source)
        lines = path.read_text().splitlines()
        name_hint = path.stem

    lp: LinearProgram | None = None
    problem_name = name_hint
    section = None
    obj_row: str | None = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    col_order: list[str] = []
    col_entries: dict[str, list[tuple[str, float]]] = {}
    obj_coefs: dict[str, float] = {}
    rhs: dict[str, float] = {}
    bounds: dict[str, list[float]] = {}

    for raw in lines:
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        tokens = raw.split()
        upper = tokens[0].upper()
        # Section headers sit at column one; data lines are indented.  The
        # position matters because set labels on data lines (e.g. an RHS set
        # named "RHS") may collide with section keywords.
        is_header = not raw[0].isspace()
        if is_header and upper == "NAME":
            problem_name = tokens[1] if len(tokens) > 1 else name_hint
            continue
        if is_header and upper in (
            "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"
        ):
            if upper == "RANGES":
                raise ValidationError("RANGES sections are not supported")
            section = upper
            if upper == "ENDATA":
                break
            continue
        if is_header:
            raise ValidationError(f"unsupported MPS section {tokens[0]!r}")
        if section == "ROWS":
            sense, name = tokens[0].upper(), tokens[1]
            if sense == "N":
                if obj_row is None:
                    obj_row = name
                continue
            if sense not in ("E", "L", "G"):
                raise ValidationError(f"unknown row sense {sense!r}")
            if name in row_sense:
                raise ValidationError(f"duplicate row {name!r}")
            row_sense[name] = sense
            row_order.append(name)
        elif section == "COLUMNS":
            if len(tokens) % 2 == 0 or len(tokens) < 3:
                raise ValidationError(f"malformed COLUMNS line: {raw!r}")
            var = tokens[0]
            if var not in col_entries:
                col_entries[var] = []
                col_order.append(var)
            for k in range(1, len(tokens), 2):
                row_name = tokens[k]
                value = float(tokens[k + 1])
                if row_name == obj_row:
                    obj_coefs[var] = obj_coefs.get(var, 0.0) + value
                elif row_name in row_sense:
                    col_entries[var].append((row_name, value))
                else:
                    raise ValidationError(f"COLUMNS references unknown row {row_name!r}")
        elif section == "RHS":
            if len(tokens) % 2 == 0 or len(tokens) < 3:
                raise ValidationError(f"malformed RHS line: {raw!r}")
            for k in range(1, len(tokens), 2):
                row_name = tokens[k]
                value = float(tokens[k + 1])
                if row_name == obj_row:
                    continue
                if row_name not in row_sense:
                    raise ValidationError(f"RHS references unknown row {row_name!r}")
                rhs[row_name] = value
        elif section == "BOUNDS":
            kind = tokens[0].upper()
            var = tokens[2]
            if var not in bounds:
                bounds[var] = [0.0, INF]
            if kind == "UP":
                bounds[var][1] = float(tokens[3])
            elif kind == "LO":
                bounds[var][0] = float(tokens[3])
            elif kind == "FX":
                value = float(tokens[3])
                bounds[var] = [value, value]
            elif kind == "FR":
                bounds[var] = [-INF, INF]
            elif kind == "MI":
                bounds[var][0] = -INF
            elif kind == "PL":
                bounds[var][1] = INF
            else:
                raise ValidationError(f"unsupported bound type {kind!r}")
        elif section is None:
            raise ValidationError(f"content before any section: {raw!r}")

    if obj_row is None:
        raise ValidationError("no objective (N) row found")
    lp = LinearProgram(problem_name)
    for var in col_order:
        lb, ub = bounds.get(var, [0.0, INF])
        lp.add_var(var, lb=lb, ub=ub, obj=obj_coefs.get(var, 0.0))
    by_row: dict[str, list[tuple[int, float]]] = {name: [] for name in row_order}
    for var in col_order:
        j = lp.var_index(var)
        for row_name, value in col_entries[var]:
            by_row[row_name].append((j, value))
    for name in row_order:
        lp.add_row(name, row_sense[name], rhs.get(name, 0.0), by_row[name])
    return lp

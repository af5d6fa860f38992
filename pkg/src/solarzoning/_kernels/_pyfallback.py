"""Pure-numpy implementations of the geometry inner loops.

These mirror the compiled kernels in ``_speedups.pyx`` operation for
operation: the same formulas, in the same order, with no fused or
re-associated arithmetic, so both paths return bit-identical results on
identical inputs.
"""

from __future__ import annotations

import numpy as np


def points_in_ring(px, py, vx, vy):
    """Even-odd point-in-polygon test for a batch of points.

    ``px``/``py`` are point coordinates of shape (m,).  ``vx``/``vy`` are the
    ring vertices of shape (n,), without the closing repeat of the first
    vertex.  Returns a uint8 mask of length m (1 = inside).
    """
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    vx = np.ascontiguousarray(vx, dtype=np.float64)
    vy = np.ascontiguousarray(vy, dtype=np.float64)
    n = vx.shape[0]
    inside = np.zeros(px.shape[0], dtype=bool)
    j = n - 1
    for i in range(n):
        straddles = (vy[i] > py) != (vy[j] > py)
        # The crossing x is only meaningful where the edge straddles the
        # point's y, which also guarantees vy[j] != vy[i].
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = (vx[j] - vx[i]) * (py - vy[i]) / (vy[j] - vy[i]) + vx[i]
        inside ^= straddles & (px < xcross)
        j = i
    return inside.astype(np.uint8)


def count_cleared(px, py, vx, vy, setbacks):
    """Count points at least ``setbacks[i]`` away from every edge i.

    Edge i runs from vertex i to vertex (i + 1) % n; edges with a
    non-positive setback impose no constraint.  Distances are compared in
    squared form (cross**2 >= s**2 * |edge|**2 for the interior case) so no
    square roots enter the comparison.
    """
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    vx = np.ascontiguousarray(vx, dtype=np.float64)
    vy = np.ascontiguousarray(vy, dtype=np.float64)
    setbacks = np.ascontiguousarray(setbacks, dtype=np.float64)
    n = vx.shape[0]
    ok = np.ones(px.shape[0], dtype=bool)
    for i in range(n):
        s = setbacks[i]
        if s <= 0.0:
            continue
        x1 = vx[i]
        y1 = vy[i]
        x2 = vx[(i + 1) % n]
        y2 = vy[(i + 1) % n]
        dx = x2 - x1
        dy = y2 - y1
        seg2 = dx * dx + dy * dy
        s2 = s * s
        wx = px - x1
        wy = py - y1
        if seg2 == 0.0:
            ok &= wx * wx + wy * wy >= s2
            continue
        t = wx * dx + wy * dy
        ux = px - x2
        uy = py - y2
        d2_start = wx * wx + wy * wy
        d2_end = ux * ux + uy * uy
        cross = wx * dy - wy * dx
        s2seg2 = s2 * seg2
        cleared = np.where(
            t <= 0.0,
            d2_start >= s2,
            np.where(t >= seg2, d2_end >= s2, cross * cross >= s2seg2),
        )
        ok &= cleared
    return int(np.count_nonzero(ok))

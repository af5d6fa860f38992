# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry inner loops.

Semantics (and bit-level results) match ``_pyfallback``: identical formulas
evaluated in the same order, compiled with fp-contract off so no FMA fusing
perturbs the arithmetic.
"""

from libc.stdint cimport uint8_t

import numpy as np


def points_in_ring(double[::1] px, double[::1] py, double[::1] vx, double[::1] vy):
    """Even-odd point-in-polygon test; see _pyfallback.points_in_ring."""
    cdef Py_ssize_t m = px.shape[0]
    cdef Py_ssize_t n = vx.shape[0]
    out = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[::1] o = out
    cdef Py_ssize_t k, i, j
    cdef double x, y, xcross
    cdef bint inside
    with nogil:
        for k in range(m):
            x = px[k]
            y = py[k]
            inside = 0
            j = n - 1
            for i in range(n):
                if (vy[i] > y) != (vy[j] > y):
                    xcross = (vx[j] - vx[i]) * (y - vy[i]) / (vy[j] - vy[i]) + vx[i]
                    if x < xcross:
                        inside = not inside
                j = i
            o[k] = inside
    return out


def count_cleared(double[::1] px, double[::1] py, double[::1] vx, double[::1] vy,
                  double[::1] setbacks):
    """Count points clear of every constrained edge; see _pyfallback.count_cleared."""
    cdef Py_ssize_t m = px.shape[0]
    cdef Py_ssize_t n = vx.shape[0]
    cdef Py_ssize_t k, i, nxt
    cdef double x, y, s, s2, x1, y1, x2, y2, dx, dy, seg2
    cdef double wx, wy, ux, uy, t, cross
    cdef bint clear
    cdef long kept = 0
    with nogil:
        for k in range(m):
            x = px[k]
            y = py[k]
            clear = 1
            for i in range(n):
                s = setbacks[i]
                if s <= 0.0:
                    continue
                nxt = i + 1
                if nxt == n:
                    nxt = 0
                x1 = vx[i]
                y1 = vy[i]
                x2 = vx[nxt]
                y2 = vy[nxt]
                dx = x2 - x1
                dy = y2 - y1
                seg2 = dx * dx + dy * dy
                s2 = s * s
                wx = x - x1
                wy = y - y1
                if seg2 == 0.0:
                    if wx * wx + wy * wy >= s2:
                        continue
                    clear = 0
                    break
                t = wx * dx + wy * dy
                if t <= 0.0:
                    if wx * wx + wy * wy >= s2:
                        continue
                    clear = 0
                    break
                if t >= seg2:
                    ux = x - x2
                    uy = y - y2
                    if ux * ux + uy * uy >= s2:
                        continue
                    clear = 0
                    break
                cross = wx * dy - wy * dx
                if cross * cross >= s2 * seg2:
                    continue
                clear = 0
                break
            if clear:
                kept += 1
    return int(kept)

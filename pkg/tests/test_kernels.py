"""Compiled geometry kernels versus the numpy fallback."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solarzoning import _kernels
from solarzoning._kernels import pyfallback


def _random_ring(rng, n):
    angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, size=n))
    radii = rng.uniform(50.0, 300.0, size=n)
    return radii * np.cos(angles), radii * np.sin(angles)


compiled_available = pytest.mark.skipif(
    _kernels.IMPLEMENTATION != "cython",
    reason="compiled extension not built in this environment",
)


@compiled_available
def test_active_implementation_is_compiled():
    assert _kernels.active is not pyfallback


@compiled_available
def test_points_in_ring_bit_identical_across_implementations():
    rng = np.random.default_rng(123)
    for n in (3, 4, 7, 12):
        vx, vy = _random_ring(rng, n)
        px = rng.uniform(-350.0, 350.0, size=20_000)
        py = rng.uniform(-350.0, 350.0, size=20_000)
        fast = _kernels.active.points_in_ring(px, py, vx, vy)
        slow = pyfallback.points_in_ring(px, py, vx, vy)
        assert np.array_equal(np.asarray(fast), np.asarray(slow))


@compiled_available
def test_count_cleared_bit_identical_across_implementations():
    rng = np.random.default_rng(321)
    for n in (3, 5, 9):
        vx, vy = _random_ring(rng, n)
        px = rng.uniform(-350.0, 350.0, size=20_000)
        py = rng.uniform(-350.0, 350.0, size=20_000)
        setbacks = rng.uniform(0.0, 60.0, size=n)
        setbacks[rng.integers(0, n)] = 0.0
        fast = _kernels.active.count_cleared(px, py, vx, vy, setbacks)
        slow = pyfallback.count_cleared(px, py, vx, vy, setbacks)
        assert fast == slow


def test_points_in_ring_on_unit_square():
    vx = np.array([0.0, 1.0, 1.0, 0.0])
    vy = np.array([0.0, 0.0, 1.0, 1.0])
    px = np.array([0.5, 1.5, -0.1, 0.99, 0.01])
    py = np.array([0.5, 0.5, 0.5, 0.01, 0.99])
    mask = _kernels.points_in_ring(px, py, vx, vy)
    assert mask.tolist() == [1, 0, 0, 1, 1]


def test_count_cleared_square_with_uniform_setback():
    # Unit square, 0.25 setback on all edges: the cleared region is the
    # inner 0.5 x 0.5 square.  Points are placed on a fine grid strictly
    # inside cells, so none sit exactly on a clearance boundary.
    vx = np.array([0.0, 1.0, 1.0, 0.0])
    vy = np.array([0.0, 0.0, 1.0, 1.0])
    grid = (np.arange(100) + 0.5) / 100.0
    gx, gy = np.meshgrid(grid, grid)
    setbacks = np.full(4, 0.25)
    count = _kernels.count_cleared(gx.ravel(), gy.ravel(), vx, vy, setbacks)
    expected = int(np.count_nonzero(
        (gx >= 0.25) & (gx <= 0.75) & (gy >= 0.25) & (gy <= 0.75)
    ))
    assert count == expected == 2500


def test_count_cleared_zero_setbacks_counts_everything():
    vx = np.array([0.0, 1.0, 1.0, 0.0])
    vy = np.array([0.0, 0.0, 1.0, 1.0])
    px = np.linspace(-1.0, 2.0, 500)
    py = np.linspace(-1.0, 2.0, 500)
    assert _kernels.count_cleared(px, py, vx, vy, np.zeros(4)) == 500


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_count_cleared_never_exceeds_point_count(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 10))
    vx, vy = _random_ring(rng, n)
    px = rng.uniform(-400.0, 400.0, size=500)
    py = rng.uniform(-400.0, 400.0, size=500)
    setbacks = rng.uniform(0.0, 100.0, size=n)
    count = _kernels.count_cleared(px, py, vx, vy, setbacks)
    assert 0 <= count <= 500


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_count_cleared_monotone_in_setbacks(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 10))
    vx, vy = _random_ring(rng, n)
    px = rng.uniform(-400.0, 400.0, size=500)
    py = rng.uniform(-400.0, 400.0, size=500)
    setbacks = rng.uniform(0.0, 60.0, size=n)
    loose = _kernels.count_cleared(px, py, vx, vy, setbacks)
    tight = _kernels.count_cleared(px, py, vx, vy, setbacks * 2.0)
    assert tight <= loose


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_points_in_ring_matches_shapely(seed):
    shapely_geometry = pytest.importorskip("shapely.geometry")
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    vx, vy = _random_ring(rng, n)
    poly = shapely_geometry.Polygon(np.column_stack([vx, vy]))
    px = rng.uniform(-350.0, 350.0, size=300)
    py = rng.uniform(-350.0, 350.0, size=300)
    ours = np.asarray(_kernels.points_in_ring(px, py, vx, vy), dtype=bool)
    theirs = np.array([
        poly.contains(shapely_geometry.Point(x, y)) for x, y in zip(px, py)
    ])
    assert np.array_equal(ours, theirs)

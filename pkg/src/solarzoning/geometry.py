"""Setback erosion and developable-area computation.

A setback of distance d from an edge excludes every point within d of that
segment, i.e. a stadium (rectangle flat along the edge plus half-disks at
the vertices).  The developable area of a parcel is the parcel minus the
union of the per-edge stadiums of each edge class, intersected with the
parcel.  ``erode_by_setbacks`` computes that region with polygon clipping;
``monte_carlo_developable_area`` estimates the same area by uniform point
sampling against exact point-to-segment distances and serves as an
implementation-independent ground truth.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString, Polygon
from shapely.geometry.polygon import orient
from shapely.ops import unary_union

from . import _kernels
from .errors import ValidationError
from .parcels import EdgeClass, Parcel
from .zoning import EffectiveRule

QUAD_SEGS = 16
_AREA_CONSISTENCY_RTOL = 1e-3


class LimitingRule(enum.Enum):
    NONE = "none"
    ROAD_SETBACK = "road_setback"
    PPL_SETBACK = "ppl_setback"
    NPPL_SETBACK = "nppl_setback"
    MIN_LOT_SIZE = "min_lot_size"
    MAX_LOT_SIZE = "max_lot_size"
    BANNED = "banned"


@dataclass
class DevelopableArea:
    """What remains of a parcel once a rule's constraints are applied."""

    parcel_id: str
    polygon_parts: list[np.ndarray]
    area_m2: float
    limiting_rule: LimitingRule

    @classmethod
    def banned(cls, parcel_id: str) -> "DevelopableArea":
        return cls(parcel_id, [], 0.0, LimitingRule.BANNED)


def signed_ring_area(ring: np.ndarray) -> float:
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _cross2(ux, uy, vx, vy):
    return ux * vy - uy * vx


def _segments_properly_intersect(ring: np.ndarray) -> bool:
    n = ring.shape[0]
    a = ring
    b = ring[(np.arange(n) + 1) % n]
    for i in range(n):
        p, q = a[i], b[i]
        for j in range(i + 1, n):
            if (j + 1) % n == i or (i + 1) % n == j:
                continue
            r, s = a[j], b[j]
            d1 = _cross2(q[0] - p[0], q[1] - p[1], r[0] - p[0], r[1] - p[1])
            d2 = _cross2(q[0] - p[0], q[1] - p[1], s[0] - p[0], s[1] - p[1])
            d3 = _cross2(s[0] - r[0], s[1] - r[1], p[0] - r[0], p[1] - r[1])
            d4 = _cross2(s[0] - r[0], s[1] - r[1], q[0] - r[0], q[1] - r[1])
            if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
                return True
    return False


def polygon_area(ring) -> float:
    """Signed shoelace area of a simple ring (positive when counterclockwise).

    Self-intersecting rings are rejected; degenerate (collinear) rings warn
    and return 0.
    """
    ring = np.asarray(ring, dtype=np.float64)
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise ValidationError(f"ring must have shape (n, 2), got {ring.shape}")
    if ring.shape[0] >= 2 and np.allclose(ring[0], ring[-1]):
        ring = ring[:-1]
    if ring.shape[0] < 3:
        raise ValidationError("ring needs at least 3 vertices")
    area = signed_ring_area(ring)
    if _segments_properly_intersect(ring):
        raise ValidationError("ring is self-intersecting")
    if area == 0.0:
        warnings.warn("degenerate ring with zero area", RuntimeWarning, stacklevel=2)
    return area


_CLASS_ORDER = (
    (EdgeClass.ROAD, "road_setback_m", LimitingRule.ROAD_SETBACK),
    (EdgeClass.PARTICIPATING, "ppl_setback_m", LimitingRule.PPL_SETBACK),
    (EdgeClass.NON_PARTICIPATING, "nppl_setback_m", LimitingRule.NPPL_SETBACK),
)


def edge_setbacks(parcel: Parcel, rule: EffectiveRule) -> np.ndarray:
    """Per-edge setback distances implied by a rule, aligned with ring edges."""
    if rule.banned:
        raise ValidationError("banned rule carries no setbacks")
    by_class = {
        EdgeClass.ROAD: rule.road_setback_m,
        EdgeClass.PARTICIPATING: rule.ppl_setback_m,
        EdgeClass.NON_PARTICIPATING: rule.nppl_setback_m,
    }
    return np.array([by_class[c] for c in parcel.edge_classes], dtype=np.float64)


def _class_chains(parcel: Parcel, cls: EdgeClass) -> list[np.ndarray]:
    """Maximal runs of consecutive edges of one class, as point chains.

    Buffering a chain with round caps and joins equals the union of the
    per-edge stadiums, so chains cut the number of buffer calls without
    changing the excluded region.
    """
    n = parcel.ring.shape[0]
    flags = [c is cls for c in parcel.edge_classes]
    if not any(flags):
        return []
    if all(flags):
        closed = np.vstack([parcel.ring, parcel.ring[:1]])
        return [closed]
    # Start scanning just after a non-matching edge so runs never wrap.
    start = next(i for i, f in enumerate(flags) if not f)
    chains = []
    run: list[int] = []
    for k in range(1, n + 1):
        i = (start + k) % n
        if flags[i]:
            run.append(i)
        elif run:
            pts = [parcel.ring[run[0]]]
            pts.extend(parcel.ring[(j + 1) % n] for j in run)
            chains.append(np.asarray(pts))
            run = []
    if run:
        pts = [parcel.ring[run[0]]]
        pts.extend(parcel.ring[(j + 1) % n] for j in run)
        chains.append(np.asarray(pts))
    return chains


def _polygon_parts(geom) -> list[Polygon]:
    if geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        polys = [geom]
    else:
        polys = [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon)]
    return [p for p in polys if p.area > 1e-9]


def erode_by_setbacks(parcel: Parcel, rule: EffectiveRule) -> DevelopableArea:
    """Erode a parcel by its per-edge-class setbacks.

    Setbacks are applied in road, participating, non-participating order so
    the recorded ``limiting_rule`` is the last class that actually removed
    area; the resulting region equals the parcel minus the union of all
    stadium buffers regardless of order.
    """
    if rule.banned:
        raise ValidationError(
            f"parcel {parcel.parcel_id!r}: cannot erode under a ban; the caller "
            "must map banned jurisdictions to zero area"
        )
    poly = Polygon(parcel.ring)
    if not poly.is_valid:
        raise ValidationError(f"parcel {parcel.parcel_id!r}: ring is not simple")
    original_area = poly.area
    region = poly
    limiting = LimitingRule.NONE
    for cls, attr, code in _CLASS_ORDER:
        dist = getattr(rule, attr)
        if dist <= 0.0 or region.is_empty:
            continue
        chains = _class_chains(parcel, cls)
        if not chains:
            continue
        buffers = [
            LineString(chain).buffer(dist, quad_segs=QUAD_SEGS) for chain in chains
        ]
        before = region.area
        region = region.difference(unary_union(buffers))
        if region.area < before - 1e-9 * max(before, 1.0):
            limiting = code

    parts = _polygon_parts(region)
    rings = []
    ring_area_sum = 0.0
    for part in parts:
        exterior = np.asarray(orient(part).exterior.coords, dtype=np.float64)[:-1]
        rings.append(exterior)
        ring_area_sum += signed_ring_area(exterior)
    area = float(sum(p.area for p in parts))
    if area > original_area * (1.0 + 1e-9):
        raise ValidationError(
            f"parcel {parcel.parcel_id!r}: eroded area exceeds parcel area"
        )
    if parts and ring_area_sum > 0 and abs(ring_area_sum - area) > _AREA_CONSISTENCY_RTOL * max(area, 1.0):
        # Holes cannot arise from boundary-anchored stadiums; a mismatch
        # here means the clipping produced something unexpected.
        raise ValidationError(
            f"parcel {parcel.parcel_id!r}: eroded region is not hole-free"
        )
    return DevelopableArea(parcel.parcel_id, rings, area, limiting)


def apply_lot_size(
    parcel_area_m2: float,
    developable: DevelopableArea,
    min_lot_size_m2: float = 0.0,
    max_lot_size_m2: float = math.inf,
) -> DevelopableArea:
    """Apply minimum/maximum lot-size limits to an eroded parcel.

    A parcel below the minimum lot size is removed entirely; a developable
    area above the maximum is capped numerically (polygon parts retained).
    """
    if max_lot_size_m2 < min_lot_size_m2:
        raise ValidationError("max_lot_size_m2 < min_lot_size_m2")
    if parcel_area_m2 < min_lot_size_m2:
        return DevelopableArea(
            developable.parcel_id, [], 0.0, LimitingRule.MIN_LOT_SIZE
        )
    if developable.area_m2 > max_lot_size_m2:
        return DevelopableArea(
            developable.parcel_id,
            developable.polygon_parts,
            float(max_lot_size_m2),
            LimitingRule.MAX_LOT_SIZE,
        )
    return developable


def developable_area(parcel: Parcel, rule: EffectiveRule) -> DevelopableArea:
    """Full pipeline for one parcel: ban check, erosion, lot-size limits."""
    if rule.banned:
        return DevelopableArea.banned(parcel.parcel_id)
    eroded = erode_by_setbacks(parcel, rule)
    return apply_lot_size(
        parcel.area_m2, eroded, rule.min_lot_size_m2, rule.max_lot_size_m2
    )


def monte_carlo_developable_area(
    parcel: Parcel,
    rule: EffectiveRule,
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> float:
    """Estimate the post-setback area by seeded uniform sampling.

    Points are drawn uniformly inside the parcel; a point survives when its
    exact distance to every boundary edge is at least that edge's class
    setback.  The estimate is ``parcel_area * kept / n_samples``.  This
    path never touches the polygon-clipping implementation, so it serves as
    an independent oracle for ``erode_by_setbacks`` (standard error at 10^6
    samples is well under 1% relative for non-degenerate parcels).
    """
    if rule.banned:
        return 0.0
    if n_samples <= 0:
        raise ValidationError("n_samples must be positive")
    ring = parcel.ring
    area = polygon_area(ring)
    if area <= 0:
        return 0.0
    setbacks = edge_setbacks(parcel, rule)
    vx = np.ascontiguousarray(ring[:, 0])
    vy = np.ascontiguousarray(ring[:, 1])
    minx, miny = ring.min(axis=0)
    maxx, maxy = ring.max(axis=0)
    bbox_area = (maxx - minx) * (maxy - miny)
    fill = max(area / bbox_area, 0.05) if bbox_area > 0 else 1.0
    rng = np.random.default_rng(seed)
    kept = 0
    collected = 0
    while collected < n_samples:
        need = n_samples - collected
        batch = int(need / fill * 1.1) + 16
        xs = rng.uniform(minx, maxx, batch)
        ys = rng.uniform(miny, maxy, batch)
        mask = _kernels.points_in_ring(xs, ys, vx, vy).astype(bool)
        xs_in = np.ascontiguousarray(xs[mask][:need])
        ys_in = np.ascontiguousarray(ys[mask][:need])
        if xs_in.size:
            kept += _kernels.count_cleared(xs_in, ys_in, vx, vy, setbacks)
            collected += xs_in.size
    return area * kept / n_samples

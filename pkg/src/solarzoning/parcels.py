"""Synthetic parcel generation and boundary-adjacency classification.

Parcels are produced by a seeded guillotine subdivision of each land
subdivision: the polygon is first split along road polylines, then each
piece is recursively halved (perpendicular to its longer bounding-box axis,
at an area-proportional cut) until pieces land within +/-25% of an area
drawn from the configured size distribution.  Every boundary segment of a
parcel is classified as road-adjacent, shared with a participating
neighbor, or shared with a non-participating neighbor.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.optimize import brentq
from shapely import STRtree
from shapely.geometry import LineString, MultiLineString, Point, Polygon, box
from shapely.geometry.polygon import orient
from shapely.ops import split as shapely_split
from shapely.ops import unary_union

from .errors import ValidationError

ROAD_ADJACENCY_TOL_M = 1.0
SHARED_EDGE_TOL_M = 1e-6
_MIN_PART_AREA_M2 = 1.0


class EdgeClass(enum.Enum):
    ROAD = "road"
    PARTICIPATING = "participating"
    NON_PARTICIPATING = "non_participating"


def _as_ring(points) -> np.ndarray:
    ring = np.asarray(points, dtype=np.float64)
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise ValidationError(f"ring must have shape (n, 2), got {ring.shape}")
    if ring.shape[0] >= 2 and np.allclose(ring[0], ring[-1]):
        ring = ring[:-1]
    if ring.shape[0] < 3:
        raise ValidationError("ring needs at least 3 distinct vertices")
    return ring


def _signed_area(ring: np.ndarray) -> float:
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass
class Parcel:
    """A simple polygon with per-edge adjacency classes.

    ``ring`` is (n, 2), counterclockwise, without the closing vertex; edge i
    runs from vertex i to vertex (i + 1) % n and ``edge_classes[i]`` is its
    class.  The edges therefore partition the boundary exactly.
    """

    parcel_id: str
    subdivision_id: str
    ring: np.ndarray
    edge_classes: list[EdgeClass]

    def __post_init__(self):
        self.ring = _as_ring(self.ring)
        area = _signed_area(self.ring)
        if area <= 0:
            raise ValidationError(
                f"parcel {self.parcel_id!r}: ring must be counterclockwise "
                "with positive area"
            )
        if len(self.edge_classes) != self.ring.shape[0]:
            raise ValidationError(
                f"parcel {self.parcel_id!r}: need one edge class per boundary "
                f"segment ({self.ring.shape[0]}), got {len(self.edge_classes)}"
            )

    @property
    def area_m2(self) -> float:
        return _signed_area(self.ring)

    @property
    def polygon(self) -> Polygon:
        return Polygon(self.ring)

    def edges(self) -> Iterator[tuple[np.ndarray, EdgeClass]]:
        """Yield (segment, class) pairs; segments are (2, 2) arrays."""
        n = self.ring.shape[0]
        for i in range(n):
            seg = np.vstack([self.ring[i], self.ring[(i + 1) % n]])
            yield seg, self.edge_classes[i]


def _polygon_to_ring(poly: Polygon) -> np.ndarray:
    ring = np.asarray(orient(poly).exterior.coords, dtype=np.float64)[:-1]
    keep = [0]
    for i in range(1, ring.shape[0]):
        if not np.allclose(ring[i], ring[keep[-1]], atol=1e-9):
            keep.append(i)
    if len(keep) > 1 and np.allclose(ring[keep[-1]], ring[keep[0]], atol=1e-9):
        keep.pop()
    return ring[keep]


def _sort_key(poly: Polygon) -> tuple:
    minx, miny, _, _ = poly.bounds
    return (round(minx, 6), round(miny, 6), round(poly.area, 6))


def _components(geom) -> list[Polygon]:
    if geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        polys = [geom]
    else:
        polys = [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon)]
    return [p for p in polys if p.area > _MIN_PART_AREA_M2 * 1e-6]


def _split_by_roads(poly: Polygon, road_network: Sequence[np.ndarray]) -> list[Polygon]:
    pieces = [poly]
    for polyline in road_network:
        line = LineString(np.asarray(polyline, dtype=np.float64))
        nxt: list[Polygon] = []
        for piece in pieces:
            if not line.intersects(piece):
                nxt.append(piece)
                continue
            parts = shapely_split(piece, line)
            nxt.extend(_components(parts))
        pieces = nxt
    return sorted(pieces, key=_sort_key)


def _halfplane_clip(region: Polygon, coord: float, vertical: bool, lower: bool):
    minx, miny, maxx, maxy = region.bounds
    pad = 1.0
    if vertical:
        window = (
            box(minx - pad, miny - pad, coord, maxy + pad)
            if lower
            else box(coord, miny - pad, maxx + pad, maxy + pad)
        )
    else:
        window = (
            box(minx - pad, miny - pad, maxx + pad, coord)
            if lower
            else box(minx - pad, coord, maxx + pad, maxy + pad)
        )
    return region.intersection(window)


def _cut_area_fraction(region: Polygon, fraction: float) -> tuple[list[Polygon], list[Polygon]]:
    """Cut perpendicular to the longer bbox axis at the given area fraction."""
    minx, miny, maxx, maxy = region.bounds
    vertical = (maxx - minx) >= (maxy - miny)
    lo, hi = (minx, maxx) if vertical else (miny, maxy)
    target = fraction * region.area

    def lower_area(coord: float) -> float:
        return _halfplane_clip(region, coord, vertical, lower=True).area - target

    coord = brentq(lower_area, lo, hi, xtol=1e-9, maxiter=200)
    lower = _halfplane_clip(region, coord, vertical, lower=True)
    upper = _halfplane_clip(region, coord, vertical, lower=False)
    return _components(lower), _components(upper)


def generate_parcels(
    subdivision_ring,
    size_distribution: Sequence[float],
    road_network: Sequence[np.ndarray],
    seed: int,
    subdivision_id: str = "S0",
) -> list[Parcel]:
    """Tile a subdivision polygon into parcels via seeded guillotine splits.

    Each emitted parcel's area is within +/-25% of an area drawn from
    ``size_distribution``; pieces too small for their drawn target are
    dropped, so the result tiles a subset of the subdivision with pairwise
    interior-disjoint parcels.  Same arguments, same seed -> identical
    output.  All edges start as NON_PARTICIPATING; run ``classify_edges``
    afterwards.
    """
    sizes = [float(s) for s in size_distribution]
    if not sizes:
        raise ValidationError("size_distribution must be non-empty")
    if any(not math.isfinite(s) or s <= 0 for s in sizes):
        raise ValidationError("size_distribution entries must be positive")
    ring = _as_ring(subdivision_ring)
    poly = Polygon(ring)
    if not poly.is_valid:
        raise ValidationError("subdivision ring is not a simple polygon")
    poly = orient(poly)
    rng = random.Random(seed)
    smallest = min(sizes)

    stack = sorted(_split_by_roads(poly, road_network), key=_sort_key, reverse=True)
    emitted: list[Polygon] = []
    while stack:
        region = stack.pop()
        if region.area < 0.75 * smallest:
            continue
        target = sizes[rng.randrange(len(sizes))]
        ratio = region.area / target
        if ratio < 0.75:
            continue
        if ratio <= 1.25:
            emitted.append(region)
            continue
        pieces = max(2, int(round(ratio)))
        fraction = math.ceil(pieces / 2) / pieces
        lower, upper = _cut_area_fraction(region, fraction)
        stack.extend(sorted(lower + upper, key=_sort_key, reverse=True))

    parcels = []
    for k, region_poly in enumerate(emitted):
        ring_k = _polygon_to_ring(region_poly)
        parcels.append(
            Parcel(
                parcel_id=f"{subdivision_id}-p{k:03d}",
                subdivision_id=subdivision_id,
                ring=ring_k,
                edge_classes=[EdgeClass.NON_PARTICIPATING] * ring_k.shape[0],
            )
        )
    return parcels


class ParcelIndex:
    """Bounding-box index over parcel polygons for adjacency queries."""

    def __init__(self, parcels: Sequence[Parcel]):
        self._parcels = list(parcels)
        self._tree = (
            STRtree([p.polygon for p in self._parcels]) if self._parcels else None
        )

    def query(self, geom) -> list[Parcel]:
        if self._tree is None:
            return []
        idx = sorted(int(i) for i in self._tree.query(geom))
        return [self._parcels[i] for i in idx]


def _participates(seed: int, parcel_id: str, rate: float) -> bool:
    if rate <= 0.0:
        return False
    if rate >= 1.0:
        return True
    return random.Random(f"participation:{seed}:{parcel_id}").random() < rate


def classify_edges(
    parcel: Parcel,
    road_network: Sequence[np.ndarray],
    neighbor_index: ParcelIndex,
    participation_rate: float,
    seed: int,
) -> Parcel:
    """Classify every boundary edge of a parcel; geometry is unchanged.

    An edge is ROAD when both endpoints and the midpoint lie within 1 m of a
    road polyline.  Otherwise it is PARTICIPATING when it is shared with a
    neighboring parcel whose owner participates (an independent seeded
    Bernoulli draw at ``participation_rate`` per neighboring parcel), else
    NON_PARTICIPATING.
    """
    if not 0.0 <= participation_rate <= 1.0:
        raise ValidationError("participation_rate must be within [0, 1]")
    roads = (
        MultiLineString([np.asarray(p, dtype=np.float64) for p in road_network])
        if len(road_network)
        else None
    )
    n = parcel.ring.shape[0]
    classes: list[EdgeClass] = []
    for i in range(n):
        p1 = parcel.ring[i]
        p2 = parcel.ring[(i + 1) % n]
        mid = 0.5 * (p1 + p2)
        probes = (Point(p1), Point(mid), Point(p2))
        if roads is not None and all(
            roads.distance(pt) <= ROAD_ADJACENCY_TOL_M for pt in probes
        ):
            classes.append(EdgeClass.ROAD)
            continue
        mid_pt = Point(mid)
        sharers = [
            other.parcel_id
            for other in neighbor_index.query(LineString([p1, p2]))
            if other.parcel_id != parcel.parcel_id
            and other.polygon.exterior.distance(mid_pt) <= SHARED_EDGE_TOL_M
        ]
        if any(_participates(seed, pid, participation_rate) for pid in sharers):
            classes.append(EdgeClass.PARTICIPATING)
        else:
            classes.append(EdgeClass.NON_PARTICIPATING)
    return replace(parcel, ring=parcel.ring.copy(), edge_classes=classes)


@dataclass
class ExclusionMask:
    """Union of polygonal no-build areas (urban cores, water, protected land)."""

    rings: list[np.ndarray]

    def union(self):
        polys = [Polygon(_as_ring(r)) for r in self.rings]
        return unary_union(polys) if polys else Polygon()


def _point_to_segments_sq(point: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    d = ends - starts
    w = point[None, :] - starts
    seg2 = np.einsum("ij,ij->i", d, d)
    t = np.einsum("ij,ij->i", w, d)
    t = np.divide(t, seg2, out=np.zeros_like(t), where=seg2 > 0)
    t = np.clip(t, 0.0, 1.0)
    closest = starts + t[:, None] * d
    diff = point[None, :] - closest
    return np.einsum("ij,ij->i", diff, diff)


def _inherited_classes(ring: np.ndarray, source: Parcel) -> list[EdgeClass]:
    n_src = source.ring.shape[0]
    starts = source.ring
    ends = source.ring[(np.arange(n_src) + 1) % n_src]
    classes = []
    n = ring.shape[0]
    tol2 = SHARED_EDGE_TOL_M ** 2
    for i in range(n):
        mid = 0.5 * (ring[i] + ring[(i + 1) % n])
        dist2 = _point_to_segments_sq(mid, starts, ends)
        j = int(np.argmin(dist2))
        if dist2[j] <= tol2:
            classes.append(source.edge_classes[j])
        else:
            # Edge created by the exclusion cut: treat the excluded area's
            # edge like any other non-participating property line.
            classes.append(EdgeClass.NON_PARTICIPATING)
    return classes


def _simple_components(geom) -> list[Polygon]:
    """Split polygons with holes into hole-free polygons by vertical cuts."""
    queue = _components(geom)
    out: list[Polygon] = []
    guard = 0
    while queue:
        poly = queue.pop()
        if not poly.interiors:
            out.append(poly)
            continue
        guard += 1
        if guard > 10000:
            raise ValidationError("exclusion produced unexpectedly deep nesting")
        hole = Polygon(poly.interiors[0])
        x0 = hole.representative_point().x
        left = _halfplane_clip(poly, x0, vertical=True, lower=True)
        right = _halfplane_clip(poly, x0, vertical=True, lower=False)
        queue.extend(_components(left))
        queue.extend(_components(right))
    return sorted(out, key=_sort_key)


def apply_exclusions(parcels: Sequence[Parcel], mask: ExclusionMask) -> list[Parcel]:
    """Subtract exclusion areas from parcels.

    Fully excluded parcels are dropped; a difference that splits a parcel
    yields one parcel per part with suffixed ids.  Surviving edges keep
    their original class; edges created by the cut are NON_PARTICIPATING.
    Holes never survive: parts are re-cut until every part is a simple ring.
    """
    mask_geom = mask.union()
    if mask_geom.is_empty:
        return list(parcels)
    out: list[Parcel] = []
    for parcel in parcels:
        diff = parcel.polygon.difference(mask_geom)
        parts = _simple_components(diff)
        parts = [p for p in parts if p.area > _MIN_PART_AREA_M2]
        if not parts:
            continue
        multi = len(parts) > 1
        for k, part in enumerate(parts):
            pid = f"{parcel.parcel_id}-x{k}" if multi else parcel.parcel_id
            ring = _polygon_to_ring(part)
            out.append(
                Parcel(
                    parcel_id=pid,
                    subdivision_id=parcel.subdivision_id,
                    ring=ring,
                    edge_classes=_inherited_classes(ring, parcel),
                )
            )
    return out


def total_area_m2(parcels: Iterable[Parcel]) -> float:
    return float(sum(p.area_m2 for p in parcels))

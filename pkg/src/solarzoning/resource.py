"""Capacity-factor series, financing math, and interconnection costs.

Synthetic hourly capacity factors are deterministic functions of a site
centroid and a seed: a diurnal/seasonal half-sine envelope for solar (exact
zeros at night) and a night/winter-leaning profile for wind, both with
seeded noise, normalized to a site-specific annual mean.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

HOURS_PER_YEAR = 8760
DAYS_PER_YEAR = 365


@dataclass
class CapacityFactorSeries:
    """One year of hourly capacity factors for a site."""

    subdivision_id: str
    values: np.ndarray
    mean_cf: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (HOURS_PER_YEAR,):
            raise ValidationError(
                f"capacity factors must have {HOURS_PER_YEAR} hours, "
                f"got shape {self.values.shape}"
            )
        if np.any(self.values < 0) or np.any(self.values > 1):
            raise ValidationError("capacity factors must lie in [0, 1]")
        if not math.isclose(self.mean_cf, float(self.values.mean()),
                            rel_tol=1e-9, abs_tol=1e-12):
            raise ValidationError("mean_cf does not match the hourly values")

    @classmethod
    def from_values(cls, subdivision_id: str, values) -> "CapacityFactorSeries":
        values = np.asarray(values, dtype=np.float64)
        return cls(subdivision_id, values, float(values.mean()))


@dataclass(frozen=True)
class CostAssumptions:
    """Technology cost and financing assumptions for one period."""

    capex_usd_per_kw: float
    fixed_om_usd_per_kw_yr: float
    variable_om_usd_per_mwh: float
    discount_rate: float
    lifetime_yr: float
    interconnect_usd_per_mw_km: float = 0.0
    interconnect_fixed_usd_per_mw: float = 0.0
    fuel_usd_per_mwh: float = 0.0

    def __post_init__(self):
        for name in ("capex_usd_per_kw", "fixed_om_usd_per_kw_yr",
                     "variable_om_usd_per_mwh", "interconnect_usd_per_mw_km",
                     "interconnect_fixed_usd_per_mw", "fuel_usd_per_mwh"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        if not 0.0 <= self.discount_rate < 1.0:
            raise ValidationError("discount_rate must be within [0, 1)")
        if self.lifetime_yr <= 0:
            raise ValidationError("lifetime_yr must be positive")


@dataclass(frozen=True)
class TransmissionLine:
    """An existing high-voltage line, as a polyline in meters."""

    line_id: str
    polyline: np.ndarray

    def __post_init__(self):
        pl = np.asarray(self.polyline, dtype=np.float64)
        if pl.ndim != 2 or pl.shape[1] != 2 or pl.shape[0] < 2:
            raise ValidationError(
                f"line {self.line_id!r}: polyline must have shape (k>=2, 2)"
            )
        object.__setattr__(self, "polyline", pl)


def crf(discount_rate: float, lifetime_yr: float) -> float:
    """Capital recovery factor; tends to 1/lifetime as the rate goes to 0."""
    if lifetime_yr <= 0:
        raise ValidationError("lifetime_yr must be positive")
    if discount_rate < 0:
        raise ValidationError("discount_rate must be non-negative")
    if discount_rate == 0.0:
        return 1.0 / lifetime_yr
    # expm1/log1p keep the r -> 0 limit accurate.
    growth = lifetime_yr * math.log1p(discount_rate)
    return discount_rate * math.exp(growth) / math.expm1(growth)


def min_distance_to_lines(point, lines: Sequence[TransmissionLine]) -> float:
    """Exact minimum distance from a point to any segment of any line."""
    if not lines:
        raise ValidationError("no transmission lines supplied")
    p = np.asarray(point, dtype=np.float64)
    best = math.inf
    for line in lines:
        pl = line.polyline
        starts = pl[:-1]
        ends = pl[1:]
        d = ends - starts
        w = p[None, :] - starts
        seg2 = np.einsum("ij,ij->i", d, d)
        t = np.einsum("ij,ij->i", w, d)
        t = np.divide(t, seg2, out=np.zeros_like(t), where=seg2 > 0)
        t = np.clip(t, 0.0, 1.0)
        closest = starts + t[:, None] * d
        diff = p[None, :] - closest
        dist = math.sqrt(float(np.min(np.einsum("ij,ij->i", diff, diff))))
        best = min(best, dist)
    return best


def interconnection_cost(
    site_centroid, lines: Sequence[TransmissionLine], costs: CostAssumptions
) -> float:
    """USD per MW to connect a site to the nearest existing line."""
    dist_km = min_distance_to_lines(site_centroid, lines) / 1000.0
    return costs.interconnect_fixed_usd_per_mw + dist_km * costs.interconnect_usd_per_mw_km


def lcoe(
    mean_cf: float, costs: CostAssumptions, interconnect_usd_per_mw: float = 0.0
) -> float:
    """Levelized cost of energy in USD/MWh for a site.

    Annualized capital (plant plus interconnection) and fixed O&M are spread
    over the annual energy of one MW at ``mean_cf``; variable O&M adds
    directly per MWh.
    """
    if mean_cf <= 0 or mean_cf > 1:
        raise ValidationError("mean_cf must be within (0, 1]")
    if interconnect_usd_per_mw < 0:
        raise ValidationError("interconnect_usd_per_mw must be non-negative")
    factor = crf(costs.discount_rate, costs.lifetime_yr)
    annual_fixed = (
        factor * (costs.capex_usd_per_kw * 1000.0 + interconnect_usd_per_mw)
        + costs.fixed_om_usd_per_kw_yr * 1000.0
    )
    return annual_fixed / (mean_cf * HOURS_PER_YEAR) + costs.variable_om_usd_per_mwh


def levelized_transmission_cost(
    mean_cf: float, costs: CostAssumptions, interconnect_usd_per_mw: float
) -> float:
    """USD/MWh of the interconnection capital alone (used to rank sites)."""
    if mean_cf <= 0 or mean_cf > 1:
        raise ValidationError("mean_cf must be within (0, 1]")
    factor = crf(costs.discount_rate, costs.lifetime_yr)
    return factor * interconnect_usd_per_mw / (mean_cf * HOURS_PER_YEAR)


def _site_rng(centroid, seed: int, tag: str) -> np.random.Generator:
    x, y = float(centroid[0]), float(centroid[1])
    mix = zlib.crc32(f"{tag}:{x:.3f}:{y:.3f}".encode())
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, mix]))


def synthetic_cf(
    centroid, seed: int, subdivision_id: str = ""
) -> CapacityFactorSeries:
    """Deterministic synthetic solar capacity factors for a site.

    The envelope is a half-sine over a seasonally varying daylight window
    (exact zeros at night) scaled by a seasonal amplitude and seeded hourly
    noise, then normalized so the annual mean lands on a site-specific
    target in [0.11, 0.21].  Same centroid and seed -> identical series.
    """
    u = _quality(centroid, seed, "solar")
    rng = _site_rng(centroid, seed, "solar-noise")
    days = np.arange(DAYS_PER_YEAR, dtype=np.float64)
    hours = np.arange(24, dtype=np.float64)
    half_daylight = 6.0 + 2.0 * np.sin(2.0 * np.pi * (days - 80.0) / 365.0)
    rise = 12.0 - half_daylight
    tt = hours[None, :] + 0.5
    with np.errstate(invalid="ignore"):
        phase = (tt - rise[:, None]) / (2.0 * half_daylight[:, None])
    shape = np.where((phase > 0.0) & (phase < 1.0), np.sin(np.pi * phase), 0.0)
    seasonal = 1.0 - 0.2 * np.cos(2.0 * np.pi * (days - 172.0) / 365.0)
    raw = shape * seasonal[:, None]
    noise = 1.0 + 0.06 * np.clip(rng.standard_normal((DAYS_PER_YEAR, 24)), -2.5, 2.5)
    raw = raw * noise
    flat = raw.reshape(HOURS_PER_YEAR)
    target_mean = 0.11 + 0.10 * u
    flat = flat * (target_mean / flat.mean())
    flat = np.clip(flat, 0.0, 1.0)
    return CapacityFactorSeries.from_values(subdivision_id, flat)


def synthetic_wind_cf(
    centroid, seed: int, subdivision_id: str = ""
) -> CapacityFactorSeries:
    """Deterministic synthetic wind capacity factors (night/winter leaning)."""
    u = _quality(centroid, seed, "wind")
    rng = _site_rng(centroid, seed, "wind-noise")
    days = np.arange(DAYS_PER_YEAR, dtype=np.float64)
    hours = np.arange(24, dtype=np.float64)
    diurnal = 1.0 + 0.15 * np.cos(2.0 * np.pi * (hours[None, :] - 2.0) / 24.0)
    seasonal = 1.0 + 0.25 * np.cos(2.0 * np.pi * (days[:, None] - 15.0) / 365.0)
    base = 0.25 + 0.18 * u
    noise = 1.0 + 0.25 * np.clip(rng.standard_normal((DAYS_PER_YEAR, 24)), -2.5, 2.5)
    raw = base * diurnal * seasonal * noise
    flat = np.clip(raw.reshape(HOURS_PER_YEAR), 0.01, 0.95)
    return CapacityFactorSeries.from_values(subdivision_id, flat)


def _quality(centroid, seed: int, tag: str) -> float:
    """Smooth deterministic site-quality field over space, in [0, 1]."""
    x, y = float(centroid[0]), float(centroid[1])
    mix = zlib.crc32(f"quality:{tag}:{int(seed) & 0xFFFFFFFF}".encode())
    phi1 = 2.0 * np.pi * ((mix % 1000) / 1000.0)
    phi2 = 2.0 * np.pi * (((mix // 1000) % 1000) / 1000.0)
    value = 0.5 * (1.0 + math.sin(x / 9000.0 + phi1) * math.cos(y / 13000.0 + phi2))
    return min(max(value, 0.0), 1.0)

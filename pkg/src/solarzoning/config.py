"""Run configuration: a YAML file naming the inputs and model settings."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError
from .zoning import ScenarioKind

REQUIRED_PATHS = (
    "subdivisions",
    "roads",
    "transmission",
    "ordinances",
    "costs",
    "regions",
    "demand",
    "demand_growth",
    "existing_fleet",
    "corridors",
    "parcel_sizes",
)
OPTIONAL_PATHS = ("exclusions", "cf_override")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    seed: int
    scenario: ScenarioKind
    paths: dict[str, Path]
    participation_rate: float = 0.8
    power_density_w_per_m2: float = 35.0
    wind_power_density_w_per_m2: float = 0.8
    top_site_fraction: float = 1.0
    periods: tuple[int, ...] = field(default_factory=tuple)
    reserve_margin: float = 0.15
    solar_share_target: float = 0.0
    days_per_season: int = 2
    myopic: bool = False
    tx_discount_rate: float = 0.05
    tx_lifetime_yr: float = 40.0

    def with_overrides(self, *, seed: int | None = None,
                       scenario: ScenarioKind | None = None,
                       solar_share_target: float | None = None) -> "ScenarioConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        if scenario is not None:
            if isinstance(scenario, str):
                try:
                    scenario = ScenarioKind(scenario)
                except ValueError:
                    raise ConfigError(
                        f"unknown scenario {scenario!r}; expected one of "
                        f"{[k.value for k in ScenarioKind]}"
                    ) from None
            cfg = replace(cfg, scenario=scenario)
        if solar_share_target is not None:
            cfg = replace(cfg, solar_share_target=solar_share_target)
        return cfg


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return section[key]


def load_config(path: Path | str) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    base = path.parent
    raw_paths = _require(raw, "paths", str(path))
    if not isinstance(raw_paths, dict):
        raise ConfigError(f"{path}: 'paths' must be a mapping")
    paths: dict[str, Path] = {}
    for key in REQUIRED_PATHS:
        value = _require(raw_paths, key, f"{path} paths")
        paths[key] = (base / str(value)).resolve()
    for key in OPTIONAL_PATHS:
        if raw_paths.get(key):
            paths[key] = (base / str(raw_paths[key])).resolve()

    scenario_text = str(raw.get("scenario", "baseline")).strip().lower()
    try:
        scenario = ScenarioKind(scenario_text)
    except ValueError:
        valid = ", ".join(kind.value for kind in ScenarioKind)
        raise ConfigError(
            f"{path}: unknown scenario {scenario_text!r} (expected one of: {valid})"
        ) from None

    parcels = raw.get("parcels") or {}
    supply = raw.get("supply") or {}
    expansion = raw.get("expansion") or {}
    periods = expansion.get("periods")
    if not periods:
        raise ConfigError(f"{path}: expansion.periods must list at least one period")

    cfg = ScenarioConfig(
        name=str(raw.get("name", path.stem)),
        seed=int(raw.get("seed", 0)),
        scenario=scenario,
        paths=paths,
        participation_rate=float(parcels.get("participation_rate", 0.8)),
        power_density_w_per_m2=float(supply.get("power_density_w_per_m2", 35.0)),
        wind_power_density_w_per_m2=float(supply.get("wind_power_density_w_per_m2", 0.8)),
        top_site_fraction=float(supply.get("top_site_fraction", 1.0)),
        periods=tuple(int(p) for p in periods),
        reserve_margin=float(expansion.get("reserve_margin", 0.15)),
        solar_share_target=float(expansion.get("solar_share_target", 0.0)),
        days_per_season=int(expansion.get("days_per_season", 2)),
        myopic=bool(expansion.get("myopic", False)),
        tx_discount_rate=float(expansion.get("tx_discount_rate", 0.05)),
        tx_lifetime_yr=float(expansion.get("tx_lifetime_yr", 40.0)),
    )
    if not 0.0 <= cfg.participation_rate <= 1.0:
        raise ConfigError(f"{path}: parcels.participation_rate must be in [0, 1]")
    if not 0.0 < cfg.top_site_fraction <= 1.0:
        raise ConfigError(f"{path}: supply.top_site_fraction must be in (0, 1]")
    if cfg.power_density_w_per_m2 <= 0 or cfg.wind_power_density_w_per_m2 <= 0:
        raise ConfigError(f"{path}: power densities must be positive")
    if list(cfg.periods) != sorted(set(cfg.periods)):
        raise ConfigError(f"{path}: expansion.periods must be strictly increasing")
    return cfg


def default_config_path() -> Path:
    """The packaged demonstration dataset's config file."""
    root = resources.files("solarzoning").joinpath("data/default/config.yaml")
    return Path(str(root))

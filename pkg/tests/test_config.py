"""Configuration loading, validation, and overrides."""

from __future__ import annotations

import pytest

from solarzoning.config import REQUIRED_PATHS, default_config_path, load_config
from solarzoning.errors import ConfigError
from solarzoning.zoning import ScenarioKind


def test_packaged_default_config_loads(demo_config):
    cfg = demo_config
    assert default_config_path().exists()
    assert cfg.scenario is ScenarioKind.BASELINE
    assert cfg.periods == (2026, 2030, 2034, 2038, 2042)
    assert cfg.solar_share_target == pytest.approx(0.1)
    assert 0.0 < cfg.top_site_fraction <= 1.0
    for key in REQUIRED_PATHS:
        assert cfg.paths[key].exists(), key


def test_overrides_replace_without_mutating(demo_config):
    updated = demo_config.with_overrides(
        seed=99, scenario=ScenarioKind.UNREGULATED, solar_share_target=0.2
    )
    assert updated.seed == 99
    assert updated.scenario is ScenarioKind.UNREGULATED
    assert updated.solar_share_target == pytest.approx(0.2)
    assert demo_config.seed != 99
    assert demo_config.scenario is ScenarioKind.BASELINE


def test_overrides_accept_scenario_names(demo_config):
    updated = demo_config.with_overrides(scenario="progressive")
    assert updated.scenario is ScenarioKind.PROGRESSIVE
    with pytest.raises(ConfigError, match="unknown scenario"):
        demo_config.with_overrides(scenario="anarchist")


def _write_config(tmp_path, body):
    path = tmp_path / "config.yaml"
    path.write_text(body)
    return path


def _minimal_yaml(paths_dir, **tweaks):
    lines = ["name: tiny", "seed: 1", "scenario: baseline", "paths:"]
    for key in REQUIRED_PATHS:
        lines.append(f"  {key}: {paths_dir}/{key}.any")
    lines += [
        "expansion:",
        "  periods: [2030]",
    ]
    text = "\n".join(lines) + "\n"
    for old, new in tweaks.items():
        text = text.replace(old, new)
    return text


def test_missing_required_path_is_reported(tmp_path):
    body = _minimal_yaml(tmp_path).replace(f"  costs: {tmp_path}/costs.any\n", "")
    with pytest.raises(ConfigError, match="costs"):
        load_config(_write_config(tmp_path, body))


def test_unknown_scenario_is_rejected(tmp_path):
    body = _minimal_yaml(tmp_path, **{"scenario: baseline": "scenario: libertarian"})
    with pytest.raises(ConfigError, match="libertarian"):
        load_config(_write_config(tmp_path, body))


def test_out_of_range_settings_are_rejected(tmp_path):
    body = _minimal_yaml(tmp_path) + "parcels:\n  participation_rate: 1.5\n"
    with pytest.raises(ConfigError, match="participation_rate"):
        load_config(_write_config(tmp_path, body))
    body = _minimal_yaml(tmp_path) + "supply:\n  top_site_fraction: 0.0\n"
    with pytest.raises(ConfigError, match="top_site_fraction"):
        load_config(_write_config(tmp_path, body))


def test_periods_must_increase(tmp_path):
    body = _minimal_yaml(tmp_path, **{"periods: [2030]": "periods: [2034, 2030]"})
    with pytest.raises(ConfigError, match="periods"):
        load_config(_write_config(tmp_path, body))
    body = _minimal_yaml(tmp_path, **{"  periods: [2030]": "  periods: []"})
    with pytest.raises(ConfigError, match="periods"):
        load_config(_write_config(tmp_path, body))


def test_missing_file_and_bad_yaml(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.yaml")
    bad = _write_config(tmp_path, "paths: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(bad)

"""Shared fixtures: the packaged demonstration dataset, loaded once."""

from __future__ import annotations

import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from solarzoning import pipeline
from solarzoning.config import default_config_path, load_config

RUN_PAIR_TIMING: dict[str, float] = {}


@pytest.fixture(scope="session")
def demo_config():
    return load_config(default_config_path())


@pytest.fixture(scope="session")
def demo_inputs(demo_config):
    return pipeline.load_inputs(demo_config)


@pytest.fixture(scope="session")
def demo_records(demo_inputs):
    return demo_inputs.records


@pytest.fixture(scope="session")
def all_parcels(demo_inputs, demo_config):
    """Parcels for every subdivision in the demo region (not just eligible)."""
    return pipeline.build_parcels(demo_inputs, demo_config)


@pytest.fixture(scope="session")
def run_pair(demo_config, tmp_path_factory):
    """Unregulated and baseline runs of the demo system at a 10% share target.

    Returns {scenario: (RunArtifacts, out_dir)}.
    """
    runs = {}
    started = time.monotonic()
    for scen in ("unregulated", "baseline"):
        cfg = demo_config.with_overrides(scenario=scen, solar_share_target=0.10)
        out = tmp_path_factory.mktemp(f"run_{scen}")
        runs[scen] = (pipeline.run(cfg, out_dir=out), out)
    RUN_PAIR_TIMING["elapsed_s"] = time.monotonic() - started
    return runs

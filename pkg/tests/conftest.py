from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from urban_affect import synth
from urban_affect.geo import BoundingBox

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("suite")


def pytest_runtest_logreport(report):
    """One pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    sys.stdout.write(f"\n[ACCEPTANCE] {name}: {status}\n")
    sys.stdout.flush()


def small_spec(seed: int = 7, **overrides) -> synth.ScenarioSpec:
    """A fast 12x12 scenario for tests that only need pipeline shape."""
    side = 12
    cell = 1.0 / 1024.0
    base = dict(
        seed=seed,
        bbox=BoundingBox(
            west=116.25, south=39.875, east=116.25 + side * cell, north=39.875 + side * cell
        ),
        cell_size=cell,
        early=2016,
        late=2022,
        perception_per_cell=4,
        opinion_per_cell=4,
        base_perception=5.5,
        base_opinion=5.0,
        surface_amplitude=1.0,
        score_sigma=0.25,
        hotspots=(synth.HotspotDisk(6, 8, 1, delta_perception=-2.0, delta_opinion=2.0),),
        planted=(
            synth.PlantedCubic(
                zone="Special",
                element="building",
                coefficients=(5.8, -7.5, 38.3, -33.5),
                noise_sigma=0.1,
            ),
        ),
        corpus_docs_per_class=120,
    )
    base.update(overrides)
    return synth.ScenarioSpec(**base)


@pytest.fixture(scope="session")
def standard_result():
    return synth.generate_scenario(synth.standard_scenario())


@pytest.fixture(scope="session")
def standard_dir(standard_result, tmp_path_factory):
    out = tmp_path_factory.mktemp("standard_scenario")
    synth.write_scenario(standard_result, out)
    return out


@pytest.fixture(scope="session")
def small_result():
    return synth.generate_scenario(small_spec())


@pytest.fixture(scope="session")
def small_dir(small_result, tmp_path_factory):
    out = tmp_path_factory.mktemp("small_scenario")
    synth.write_scenario(small_result, out)
    return out

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import os

import numpy as np
import pytest

from maglev_twin.model.Mechanics import OscillatorMode, ParticleSpec, TrapSpec
from maglev_twin.model.Optics import CavitySpec, LaserSpec
from maglev_twin.model.Scenario import Scenario
from maglev_twin.simulation.Dynamics import SimConfig

ROOT_DIR = os.path.dirname(os.path.abspath(__file__))
RESOURCES_DIR = os.path.join(ROOT_DIR, "tests", "resources")
EXAMPLE_SCENARIO_PATH = os.path.join(RESOURCES_DIR, "example.scenario")
INVALID_SCENARIO_PATH = os.path.join(RESOURCES_DIR, "invalid.scenario")
VALID_MANIFEST_PATH = os.path.join(RESOURCES_DIR, "valid_manifest.json")
INVALID_MANIFEST_PATH = os.path.join(RESOURCES_DIR, "invalid_manifest.json")

MASS = 6e-9
DENSITY = 1.1e4
QUALITY_FACTOR = 2.6e7

# short sequence on the default trap, fast enough for unit tests
FAST_SCENARIO_TEXT = """
[scenario]
name = fast
seed = 1234
stages = friction, camera, intensity, interferometric, ringup

[camera_feedback]
iterations = 5

[intensity_feedback]
duration = 0.3 s

[interferometric_feedback]
duration = 0.5 s

[ringup]
duration = 0.5 s

[analysis]
feasibility = false
"""


@pytest.fixture
def example_scenario_path():
    return EXAMPLE_SCENARIO_PATH


@pytest.fixture
def invalid_scenario_path():
    return INVALID_SCENARIO_PATH


@pytest.fixture
def valid_manifest_path():
    return VALID_MANIFEST_PATH


@pytest.fixture
def invalid_manifest_path():
    return INVALID_MANIFEST_PATH


@pytest.fixture
def particle():
    return ParticleSpec.from_mass(MASS, DENSITY)


@pytest.fixture
def trap():
    return TrapSpec.from_axial_gradient(50.0, 2.0, quality_factor=QUALITY_FACTOR)


@pytest.fixture
def mode_200hz():
    return OscillatorMode.from_frequency(MASS, 200.0, QUALITY_FACTOR)


@pytest.fixture
def lossy_mode():
    """
    Low-Q mode whose dynamics settle within a fraction of a simulated second.
    """
    return OscillatorMode.from_frequency(1e-12, 100.0, 100.0)


@pytest.fixture
def laser():
    return LaserSpec(637e-9, 1e7, 1e7)


@pytest.fixture
def cavity():
    return CavitySpec.from_finesse(1.55e-6, 1e-2, 1e5, eta_det=0.75)


@pytest.fixture
def rng():
    return np.random.default_rng(2026)


@pytest.fixture
def lossy_config(lossy_mode):
    return SimConfig(dt=1e-4, sample_rate=2e3, duration=20.0, seed=11, modes={"z": lossy_mode}, temperature=300.0)


@pytest.fixture
def fast_scenario_text():
    return FAST_SCENARIO_TEXT


@pytest.fixture
def fast_scenario(fast_scenario_text, tmp_path):
    return Scenario.from_text(fast_scenario_text).with_output_dir(str(tmp_path / "run"))


@pytest.fixture
def fast_scenario_path(fast_scenario_text, tmp_path):
    path = tmp_path / "fast.scenario"
    path.write_text(fast_scenario_text.replace("[scenario]", f"[scenario]\noutput_dir = {tmp_path / 'run'}"),
                    encoding="utf-8")
    return str(path)


# no integration at all: lift-off plus the forward-design analyses on a coarse flux grid
LIGHT_SCENARIO_TEXT = """
[scenario]
name = light
seed = 7
stages = friction

[analysis]
n_in_points = 5
"""


@pytest.fixture
def light_scenario(tmp_path):
    return Scenario.from_text(LIGHT_SCENARIO_TEXT).with_output_dir(str(tmp_path / "run"))


@pytest.fixture
def light_scenario_path(tmp_path):
    path = tmp_path / "light.scenario"
    path.write_text(LIGHT_SCENARIO_TEXT.replace("[scenario]", f"[scenario]\noutput_dir = {tmp_path / 'run'}"),
                    encoding="utf-8")
    return str(path)

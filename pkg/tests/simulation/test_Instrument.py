# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import logging
from dataclasses import replace

import numpy as np
import pytest

from maglev_twin.model.Mechanics import OscillatorMode
from maglev_twin.simulation.Control import BandpassFeedback
from maglev_twin.simulation.Dynamics import OscState, Simulation
from maglev_twin.simulation.Instrument import (DETECTOR_HEADER, LockedInterferometer, run_interferometric_cooling,
                                               run_ring_up)
from maglev_twin.simulation.PhaseLock import LockConfig
from maglev_twin.simulation.Sensing import RoughnessProcess
from maglev_twin.util.Exceptions import LockLostError
from maglev_twin.util.File import read_columns

AXES = ("x", "y", "z")
RATE = 2e4


@pytest.fixture
def lock():
    return LockConfig.from_hz_per_volt(8000.0, update_rate=RATE)


def _at(z):
    return np.array([0.0, 0.0, z])


def test_update_rate_must_match_bin(laser, rng):
    with pytest.raises(ValueError) as e:
        LockedInterferometer(laser, LockConfig(gain=100.0, update_rate=1e4), 1.0 / RATE, rng, AXES)

    assert str(e.value).startswith("The LockConfig:update_rate must equal the detector rate")


def test_tracks_static_displacement(laser, lock, rng):
    sensor = LockedInterferometer(laser, lock, 1.0 / RATE, rng, AXES)

    estimates = [sensor.measure(n / RATE, _at(10e-9), np.zeros(3))[0] for n in range(200)]

    assert np.mean(estimates[100:]) == pytest.approx(10e-9, abs=1e-9)
    assert sensor.get_tracker().get_state().linearized_output == pytest.approx(10e-9, abs=3e-9)


def test_lock_lost_on_jump(laser, lock, rng):
    sensor = LockedInterferometer(laser, lock, 1.0 / RATE, rng, AXES)

    with pytest.raises(LockLostError) as e:
        sensor.measure(0.0, _at(200e-9), np.zeros(3))

    assert "exceeds the capture range" in str(e.value)


def test_unlocked_sensor_does_not_raise(laser, rng):
    cfg = LockConfig(gain=100.0, update_rate=RATE, enabled=False)
    sensor = LockedInterferometer(laser, cfg, 1.0 / RATE, rng, AXES)

    estimate, error = sensor.measure(0.0, _at(200e-9), np.zeros(3))

    assert abs(error) <= 1.1
    assert sensor.get_tracker().get_state().phase == 0.0


def test_roughness_shifts_apparent_position(laser, lock, rng):
    roughness = RoughnessProcess(5e-9, 10.0, np.random.default_rng(3))
    offset = roughness.sample(1, 1.0 / RATE)[0]
    roughness = RoughnessProcess(5e-9, 10.0, np.random.default_rng(3))
    sensor = LockedInterferometer(laser, lock, 1.0 / RATE, rng, AXES, roughness)

    estimates = [sensor.measure(n / RATE, _at(0.0), np.zeros(3))[0] for n in range(200)]

    # correlation time far longer than the record: the apparent offset is nearly frozen
    assert np.mean(estimates[100:]) == pytest.approx(offset, abs=1.5e-9)


def test_export_records(laser, lock, rng, tmp_path):
    sensor = LockedInterferometer(laser, lock, 1.0 / RATE, rng, AXES, keep_records=True)
    for n in range(10):
        sensor.measure(n / RATE, _at(1e-9), np.zeros(3))

    table = read_columns(sensor.export_records(str(tmp_path / "detector.csv")))

    assert [name for name in table if name != "#"] == list(DETECTOR_HEADER)
    assert len(table["t"]) == 10
    assert float(table["#"]["bin_width_s"]) == pytest.approx(1.0 / RATE)
    assert np.all(np.abs(table["diff"]) <= table["sum"])


@pytest.fixture
def cooling_sim(lossy_config):
    mode = OscillatorMode.from_frequency(1e-12, 100.0, 1e6)
    config = replace(lossy_config, modes={"z": mode}, temperature=0.0)
    return Simulation(config, OscState((10e-9,), (0.0,)))


def test_interferometric_cooling(cooling_sim, laser, rng):
    lock = LockConfig(gain=100.0, update_rate=2e3)
    feedback = BandpassFeedback(100.0, 20.0, 20.0)

    history = run_interferometric_cooling(cooling_sim, laser, lock, feedback, 0.5, rng=rng)

    assert history.stage == "interferometric"
    assert history.trajectory.measurements.shape == (1000, 2)
    assert history.final < 0.3 * history.initial


def test_ring_up(cooling_sim, caplog):
    with caplog.at_level(logging.INFO):
        trajectory = run_ring_up(cooling_sim, 0.1)

    assert len(trajectory) == 200
    assert "Ring-up: free evolution for 0.1 s" in caplog.text
    assert trajectory.times[0] == 0.0

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import logging
import math

import numpy as np
import pytest
from scipy.special import j1

from maglev_twin.simulation.PhaseLock import (DETECTOR_RATE, VOLTS_PER_UNIT, LockConfig, LockState, PhaseTracker,
                                              analytic_suppression, fundamental_amplitude, invert_sine_fundamental,
                                              lock_step, mirror_calibration_run, suppression_ratio)
from maglev_twin.simulation.Sensing import DetectorRecord
from maglev_twin.util.Exceptions import LockLostError


def test_experiment_gain_suppression_at_217_hz():
    cfg = LockConfig.from_hz_per_volt(8000.0)

    assert cfg.gain == pytest.approx(8000.0 * VOLTS_PER_UNIT)
    assert cfg.gain_hz_per_volt == pytest.approx(8000.0)
    assert analytic_suppression(cfg.gain, 217.0) == pytest.approx(7.7, rel=1e-2)


def test_no_gain_no_suppression():
    assert analytic_suppression(0.0, 217.0) == 1.0


class TestLockConfig:

    def test_unstable_gain(self):
        with pytest.raises(ValueError) as e:
            LockConfig(gain=1e4, update_rate=2e4)

        assert "for a stable loop" in str(e.value)

    def test_slew_limit_positive(self):
        with pytest.raises(ValueError):
            LockConfig(gain=100.0, slew_limit=0.0)

    def test_disabled_has_no_bandwidth(self):
        assert LockConfig(gain=100.0, enabled=False).bandwidth == 0.0
        assert LockConfig(gain=100.0).bandwidth == 100.0

    def test_update_rate_above_detector_rate(self):
        with pytest.raises(ValueError) as e:
            LockConfig(gain=1.0, update_rate=10 * DETECTOR_RATE)

        assert str(e.value) == "The LockConfig:update_rate must be between 0.0 and 200000.0. Was 2000000.0"

    def test_update_rate_at_detector_rate(self):
        assert LockConfig(gain=1.0, update_rate=DETECTOR_RATE).update_rate == DETECTOR_RATE


def test_lock_step_integrates_phase():
    cfg = LockConfig(gain=100.0, update_rate=1e4)
    record = DetectorRecord(0.0, 2000.0, 500.0, 1e-4)

    state = lock_step(LockState(), record, cfg, contrast=1000.0)

    assert state.frequency_offset == pytest.approx(50.0)
    assert state.phase == pytest.approx(2.0 * math.pi * 50.0 / 1e4)
    assert not state.saturated


def test_lock_step_disabled():
    cfg = LockConfig(gain=100.0, enabled=False)
    record = DetectorRecord(0.0, 2000.0, 500.0, 1e-4)

    state = lock_step(LockState(phase=1.0, frequency_offset=3.0), record, cfg, contrast=1000.0)

    assert state.phase == 1.0
    assert state.frequency_offset == 0.0


def test_lock_step_slew_limit():
    cfg = LockConfig(gain=100.0, update_rate=1e3, slew_limit=1e3)
    record = DetectorRecord(0.0, 2000.0, 1000.0, 1e-3)

    state = lock_step(LockState(), record, cfg, contrast=1000.0)

    assert state.saturated
    assert state.frequency_offset == pytest.approx(1.0)


def test_linearized_output():
    assert LockState(phase=math.pi, wavelength=637e-9).linearized_output == pytest.approx(637e-9 / 4.0)


def test_phase_tracker_reports_saturation(caplog):
    tracker = PhaseTracker(LockConfig(gain=100.0, update_rate=1e3, slew_limit=1e3), 637e-9)
    for _ in range(3):
        tracker.update(1.0)

    assert tracker.get_saturations() == 3
    with caplog.at_level(logging.WARNING):
        tracker.flush_warnings("test")

    assert "test: frequency offset hit the slew limit in 3 updates" in caplog.text
    assert tracker.get_saturations() == 0


def test_fundamental_amplitude():
    t = np.arange(2000) / 2e4
    signal = 0.3 * np.sin(2.0 * math.pi * 217.0 * t + 0.4) + 0.1

    assert fundamental_amplitude(signal, 217.0, 2e4) == pytest.approx(0.3, rel=1e-2)


def test_fundamental_amplitude_too_short():
    with pytest.raises(ValueError):
        fundamental_amplitude(np.zeros(10), 217.0, 2e4)


@pytest.mark.parametrize("r", [0.05, 0.5, 1.5])
def test_invert_sine_fundamental(r):
    assert invert_sine_fundamental(2.0 * j1(r)) == pytest.approx(r, rel=1e-6)


def test_invert_sine_fundamental_limits():
    assert invert_sine_fundamental(0.0) == 0.0
    assert invert_sine_fundamental(5.0) == pytest.approx(1.8411837813406593)


def test_mirror_calibration_matches_analytic(laser, rng):
    gain = LockConfig.from_hz_per_volt(8000.0).gain

    result = mirror_calibration_run(20e-9, 217.0, gain, laser, rng)

    assert result.suppression == pytest.approx(analytic_suppression(gain, 217.0), rel=0.05)
    assert result.uncertainty == pytest.approx(0.1, rel=0.1)
    assert result.estimate_amplitude == pytest.approx(20e-9, rel=0.05)


def test_eighth_wavelength_mirror_at_experiment_gain(laser, rng):
    gain = LockConfig.from_hz_per_volt(8000.0).gain

    result = mirror_calibration_run(laser.wavelength / 8.0, 217.0, gain, laser, rng)

    assert 6.75 <= result.suppression <= 9.12
    assert result.estimate_amplitude == pytest.approx(laser.wavelength / 8.0, rel=0.05)


@pytest.mark.parametrize("wavelengths", [1.0, 5.0])
def test_locked_dynamic_range(laser, rng, wavelengths):
    gain = LockConfig.from_hz_per_volt(8000.0).gain
    amplitude = wavelengths * laser.wavelength

    # well inside the tracking bandwidth, the residual stays below one radian
    result = mirror_calibration_run(amplitude, 20.0, gain, laser, rng)

    assert result.estimate_amplitude == pytest.approx(amplitude, rel=0.05)


def test_unlocked_mirror_is_not_suppressed(laser, rng):
    assert suppression_ratio(0.0, 20e-9, 217.0, laser=laser, rng=rng) == pytest.approx(1.0, rel=0.02)


def test_mirror_calibration_lock_lost(laser, rng):
    with pytest.raises(LockLostError) as e:
        mirror_calibration_run(200e-9, 217.0, 10.0, laser, rng)

    assert str(e.value).startswith("lock lost at t = ")

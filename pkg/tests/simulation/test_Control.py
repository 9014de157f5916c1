# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import logging
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import signal

from maglev_twin.model.Mechanics import OscillatorMode
from maglev_twin.model.Optics import BeamProfile
from maglev_twin.simulation.Control import (AmplitudeHistory, BandpassController, BandpassFeedback, Biquad,
                                            PulsedQuadrantFeedback, check_anti_damping, period_amplitudes,
                                            radial_rms, run_continuous_feedback, run_intensity_cooling,
                                            run_pulsed_camera_cooling)
from maglev_twin.simulation.Dynamics import OscState, Simulation, Trajectory
from maglev_twin.util.Exceptions import AntiDampingError, ParticleLostError


@pytest.fixture
def undamped_mode():
    return OscillatorMode.from_frequency(1e-12, 100.0, 1e6)


@pytest.fixture
def axial_sim(lossy_config, undamped_mode):
    config = replace(lossy_config, modes={"z": undamped_mode}, temperature=0.0)
    return Simulation(config, OscState((1e-9,), (0.0,)))


@pytest.fixture
def radial_config(lossy_config):
    mode = OscillatorMode.from_frequency(6e-9, 80.0, 1e5)
    return replace(lossy_config, modes={"x": mode, "y": mode}, temperature=0.0)


def _orbit(config, amplitude):
    omega = config.modes["y"].omega0
    return OscState((amplitude, 0.0), (0.0, amplitude * omega))


class TestBandpassFeedback:

    def test_quality_factor(self):
        assert BandpassFeedback(100.0, 20.0, 22.0).quality_factor == 5.0

    def test_inactive_without_gain(self):
        assert not BandpassFeedback(100.0, 20.0, 0.0).active
        assert not BandpassFeedback(100.0, 20.0, 22.0, enabled=False).active

    def test_invalid_bandwidth(self):
        with pytest.raises(ValueError) as e:
            BandpassFeedback(100.0, 0.0, 22.0)

        assert str(e.value) == "The BandpassFeedback:bandwidth must be a finite positive number. Was 0.0"


class TestBiquad:

    def test_unity_gain_at_centre(self):
        biquad = Biquad.bandpass(100.0, 5.0, 2e3)

        response = biquad.frequency_response([100.0, 10.0, 900.0], 2e3)

        assert response[0] == pytest.approx(1.0 + 0.0j, abs=1e-9)
        assert abs(response[1]) < 0.1
        assert abs(response[2]) < 0.1

    def test_matches_lfilter(self, rng):
        biquad = Biquad.bandpass(100.0, 5.0, 2e3)
        data = rng.standard_normal(500)

        filtered = [biquad.compute(value) for value in data]

        expected = signal.lfilter([biquad.a0, biquad.a1, biquad.a2], [1.0, biquad.b1, biquad.b2], data)
        np.testing.assert_allclose(filtered, expected, rtol=1e-12, atol=1e-15)

    def test_reset(self):
        biquad = Biquad.bandpass(100.0, 5.0, 2e3)
        first = biquad.compute(1.0)
        biquad.compute(0.5)

        biquad.reset()

        assert biquad.compute(1.0) == first

    def test_centre_above_nyquist(self):
        with pytest.raises(ValueError):
            Biquad.bandpass(1500.0, 5.0, 2e3)


class TestBandpassController:

    def test_force_limit(self, undamped_mode, caplog):
        feedback = BandpassFeedback(100.0, 20.0, 1e3, force_limit=1e-20)
        controller = BandpassController(feedback, undamped_mode, 2e3)

        forces = [controller.update(n / 2e3, np.array([1e-6 * math.cos(2 * math.pi * n / 20)]))["z"]
                  for n in range(40)]

        assert max(abs(force) for force in forces) == 1e-20
        assert controller.get_clip_count() > 0
        with caplog.at_level(logging.WARNING):
            controller.flush_warnings("axial")
        assert "axial: feedback force clipped to 1e-20 N" in caplog.text
        assert controller.get_clip_count() == 0

    def test_disabled_gives_no_force(self, undamped_mode):
        controller = BandpassController(BandpassFeedback(100.0, 20.0, 22.0, enabled=False), undamped_mode, 2e3)

        assert controller.update(0.0, np.array([1e-6])) == {"z": 0.0}


def test_cold_damping_rate(axial_sim, undamped_mode):
    controller = BandpassController(BandpassFeedback(100.0, 20.0, 20.0), undamped_mode, 2e3, delay_samples=1)

    history = run_continuous_feedback(axial_sim, controller, None, 0.5, "z", "cold damping")

    assert history.stage == "cold damping"
    assert history.decay_rate() == pytest.approx(20.0, rel=0.2)
    assert history.final < 0.1 * history.initial
    assert len(history.trajectory) == 1000


def test_wrong_phase_heats(axial_sim, undamped_mode):
    controller = BandpassController(BandpassFeedback(100.0, 20.0, 20.0, phase=-math.pi / 2), undamped_mode, 2e3,
                                    delay_samples=1)

    with pytest.raises(AntiDampingError) as e:
        run_continuous_feedback(axial_sim, controller, None, 1.0, "z", "interferometric")

    assert str(e.value).startswith("anti-damping detected in interferometric")


def test_period_amplitudes():
    t = np.arange(2000) / 2e3
    x = 3e-9 * np.cos(2 * math.pi * 100.0 * t)
    trajectory = Trajectory(t, x[:, None], np.zeros((2000, 1)), np.zeros((2000, 1)), ("z",),
                            metadata={"sample_rate": 2e3})

    amplitudes = period_amplitudes(trajectory, "z", OscillatorMode.from_frequency(1e-12, 100.0, 1e6))

    assert len(amplitudes) == 100
    np.testing.assert_allclose(amplitudes, 3e-9, rtol=1e-9)


@pytest.mark.parametrize("amplitudes", [
    [1.0] * 5,
    list(range(1, 12))[::-1],
    [1.0, 1.01, 1.02, 1.03, 1.04, 1.05, 1.06, 1.07, 1.08, 1.09, 1.095],
])
def test_check_anti_damping_passes(amplitudes):
    check_anti_damping(amplitudes)


def test_check_anti_damping_raises():
    with pytest.raises(AntiDampingError):
        check_anti_damping([1.1 ** n for n in range(11)])


def test_amplitude_history_decay_rate():
    history = AmplitudeHistory("camera", np.array([0.0, 1.0]), np.array([1.0, math.exp(-1.0)]), 1.0,
                               math.exp(-1.0))

    assert history.decay_rate() == pytest.approx(2.0)
    assert len(history) == 2


def test_amplitude_history_needs_two_points():
    with pytest.raises(ValueError):
        AmplitudeHistory("camera", np.array([0.0]), np.array([1.0]), 1.0, 1.0).decay_rate()


def test_radial_rms_of_circular_orbit(radial_config):
    sim = Simulation(radial_config, _orbit(radial_config, 5e-6))

    assert radial_rms(sim) == pytest.approx(5e-6)


class TestPulsedCameraCooling:

    def test_cools(self, radial_config, rng):
        sim = Simulation(radial_config, _orbit(radial_config, 50e-6))
        cfg = PulsedQuadrantFeedback(5e-13, iterations=5)

        history = run_pulsed_camera_cooling(sim, cfg, rng)

        assert history.initial == pytest.approx(50e-6)
        assert len(history) == 5
        assert history.final < 0.5 * history.initial
        assert history.details["kick_quanta"] > 0

    def test_disabled(self, radial_config, rng):
        sim = Simulation(radial_config, _orbit(radial_config, 50e-6))
        cfg = PulsedQuadrantFeedback(5e-13, iterations=5, enabled=False)

        history = run_pulsed_camera_cooling(sim, cfg, rng)

        assert len(history) == 0
        assert history.final == history.initial

    def test_particle_lost(self, radial_config, rng):
        sim = Simulation(radial_config, _orbit(radial_config, 150e-6))

        with pytest.raises(ParticleLostError):
            run_pulsed_camera_cooling(sim, PulsedQuadrantFeedback(5e-13), rng)

    def test_needs_radial_axes(self, axial_sim, rng):
        with pytest.raises(ValueError):
            run_pulsed_camera_cooling(axial_sim, PulsedQuadrantFeedback(5e-13), rng)

    @pytest.mark.parametrize("separation", [0.0, 0.5])
    def test_separation(self, separation):
        with pytest.raises(ValueError):
            PulsedQuadrantFeedback(5e-13, separation=separation)


def test_intensity_cooling(radial_config, rng):
    sim = Simulation(radial_config, OscState((2e-6, 0.0), (0.0, 0.0)))
    profile = BeamProfile.on_slope(20e-6, 1e9)
    feedback = BandpassFeedback(80.0, 20.0, 60.0)

    history = run_intensity_cooling(sim, profile, feedback, duration=1.0, rng=rng)

    assert history.stage == "intensity"
    assert history.final < 0.1 * history.initial


def test_intensity_cooling_damps_one_radial_axis(radial_config, rng):
    sim = Simulation(radial_config, OscState((2e-6, 2e-6), (0.0, 0.0)))
    profile = BeamProfile.on_slope(20e-6, 1e9)

    history = run_intensity_cooling(sim, profile, BandpassFeedback(80.0, 20.0, 60.0), duration=1.0, rng=rng)

    assert history.final < 0.1 * history.initial
    assert radial_rms(sim, ("y",)) == pytest.approx(2e-6 / math.sqrt(2.0), rel=0.05)

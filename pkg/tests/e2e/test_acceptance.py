# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import json
import math
import os
from dataclasses import replace

import numpy as np
import pytest

from maglev_twin.CommandLine import EXIT_OK, main
from maglev_twin.analysis.Feasibility import thermal_decoherence_rate
from maglev_twin.analysis.Spectra import estimate_psd, fit_ring_up, noise_floor
from maglev_twin.model.Mechanics import OscillatorMode
from maglev_twin.model.Optics import LaserSpec
from maglev_twin.model.Scenario import RunManifest
from maglev_twin.simulation.Dynamics import OscState, simulate, thermal_force_psd
from maglev_twin.simulation.Instrument import LockedInterferometer
from maglev_twin.simulation.PhaseLock import LockConfig
from maglev_twin.simulation.Sensing import DEFAULT_FLOOR, homodyne_shot_noise_psd

pytestmark = pytest.mark.slow


def test_free_evolution_spectrum(lossy_config):
    mode = lossy_config.modes["z"]
    trajectory = simulate(replace(lossy_config, duration=40.0))
    spectrum = estimate_psd(trajectory.position("z"), trajectory.sample_rate, 4000)

    omega = 2.0 * math.pi * spectrum.frequencies
    model = 2.0 * thermal_force_psd(mode, 300.0) / (
        mode.mass ** 2 * ((mode.omega0 ** 2 - omega ** 2) ** 2 + (mode.gamma * omega) ** 2))
    off_peak = (spectrum.frequencies > 50.0) & (spectrum.frequencies < 95.0)

    assert np.mean(spectrum.psd[off_peak] / model[off_peak]) == pytest.approx(1.0, rel=0.1)


def test_ensemble_ring_up_recovers_decoherence_rate(lossy_config):
    mode = OscillatorMode.from_frequency(1e-12, 100.0, 1e4)
    config = replace(lossy_config, modes={"z": mode}, duration=0.2)
    energies = np.mean([simulate(config.with_seed(seed), OscState.at_rest(1)).energy("z", mode)
                        for seed in range(400)], axis=0)
    times = np.arange(len(energies)) / config.sample_rate

    fit = fit_ring_up(times, energies, mode, detect_break=False)

    assert fit.rate == pytest.approx(thermal_decoherence_rate(mode, 300.0), rel=0.15)


def test_shot_noise_floor_of_locked_interferometer():
    sample_rate = 20e3
    laser = LaserSpec(637e-9, 1e7, 1e7, 1e9)
    sensor = LockedInterferometer(laser, LockConfig.from_hz_per_volt(8000.0, update_rate=sample_rate),
                                  1.0 / sample_rate, np.random.default_rng(5), ("z",))
    at_rest = np.zeros(1)
    estimates = [sensor.measure(i / sample_rate, at_rest.copy(), at_rest)[0] for i in range(40000)]

    floor = noise_floor(estimate_psd(estimates, sample_rate, 4000), (100.0, 1000.0))

    # roughly 11 pm/sqrt(Hz) for 1e7 detected photons per second at 637 nm
    assert floor == pytest.approx(math.sqrt(2.0 * homodyne_shot_noise_psd(laser)), rel=0.1)
    assert floor == pytest.approx(11.4e-12, rel=0.05)


def test_example_scenario(example_scenario_path, tmp_path, capsys):
    output_dir = tmp_path / "example"

    assert main(["run", example_scenario_path, "--output-dir", str(output_dir)]) == EXIT_OK

    with open(output_dir / "manifest.json", encoding="utf-8") as file:
        manifest = RunManifest.from_json_repr(json.load(file))
    assert manifest.get_status() == "completed"
    assert os.path.exists(output_dir / "interferometric_spectrum.csv")

    interferometric = manifest.get_stage("interferometric")
    assert interferometric.results["floor_asd"] == pytest.approx(DEFAULT_FLOOR, rel=0.15)

    calibration = manifest.get_stage("calibration")
    assert calibration.results["agree"] is True

    assert "calibration: completed" in capsys.readouterr().out

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
This module contains the ScenarioRunner class and the sweep and plot-data entry points.

A run executes the requested stages of the experimental sequence on one simulation handle, writes
every export into the output directory and finishes with ``analyses.json`` and a validated
``manifest.json`` listing all files with their checksums.
"""

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from maglev_twin import __version__
from maglev_twin.analysis.ClosedLoop import min_variance, optimal_gain
from maglev_twin.analysis.Feasibility import (cavity_report, excess_noise_bound, export_occupation_curves,
                                              finesse_scaling, freespace_report, occupation_curves, thermal_budget)
from maglev_twin.analysis.Spectra import (ProbeResponse, calibration_from_mirror, estimate_psd, fit_ring_up,
                                          noise_floor, probe_tone_calibration, tone_rms)
from maglev_twin.model.Mechanics import (OscillatorMode, equilibrium_displacement, probe_force,
                                         trap_frequency)
from maglev_twin.model.Scenario import RunManifest, Scenario, StageOutcome, check_key
from maglev_twin.simulation.Control import (AmplitudeHistory, radial_rms, run_intensity_cooling,
                                            run_pulsed_camera_cooling)
from maglev_twin.simulation.Dynamics import SinusoidalDrive, Simulation, thermal_force_psd
from maglev_twin.simulation.Instrument import LockedInterferometer, run_interferometric_cooling, run_ring_up
from maglev_twin.simulation.PhaseLock import mirror_calibration_run
from maglev_twin.util.Exceptions import (ConfigurationError, NumericalInstabilityError, StageAbortedError,
                                         UnsatisfiableConditionError)
from maglev_twin.util.File import read_columns, write_columns
from maglev_twin.util.JsonValidator import MANIFEST_SCHEMA_PATH, JsonValidator

MANIFEST_NAME = "manifest.json"
ANALYSES_NAME = "analyses.json"
SCENARIO_COPY_NAME = "scenario.ini"
SPECTRUM_NAME = "interferometric_spectrum.csv"
OCCUPATION_NAME = "occupation_curves.csv"
SWEEP_SUMMARY_NAME = "sweep_summary.json"
SWEEP_TABLE_NAME = "sweep_summary.csv"
WORKERS_ENV = "MAGLEV_TWIN_WORKERS"
PLOT_TAGS = ("fig4a", "fig5")
RING_UP_POINTS = 2000
# floor band around the axial frequency, relative to f0
FLOOR_BAND = (0.75, 1.25)
SEGMENT_SECONDS = 0.25

logger = logging.getLogger(__name__)

Stage = Callable[[], StageOutcome]


def _child_seeds(seed: int, count: int) -> List[int]:
    """
    Independent 64-bit seeds derived from a root seed.
    """
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _write_json(file_path: str, content: dict) -> str:
    with open(file_path, 'w', encoding='utf-8', newline='\n') as file:
        file.write(json.dumps(content, indent=4))
    return file_path


def _number(value: Union[float, str]) -> Union[float, str, None]:
    if isinstance(value, str):
        return value
    return float(value) if math.isfinite(value) else None


class ScenarioRunner:
    """
    Executes the stages of one scenario in the canonical order. The particle state is carried from
    stage to stage; every stage draws its randomness from seeds derived from the scenario seed, so
    the same scenario always produces the same files.
    """

    def __init__(self, scenario: Scenario, output_dir: Optional[str] = None):
        """
        Constructor

        :param scenario: validated scenario
        :type scenario: Scenario
        :param output_dir: run directory, the scenario's output directory when omitted
        :type output_dir: str or None
        """
        self.__scenario = scenario
        self.__output_dir = output_dir if output_dir is not None else scenario.get_output_dir()
        self.__seeds = dict(zip(("simulation", "calibration", "mirror"), _child_seeds(scenario.get_seed(), 3)))
        self.__modes = scenario.modes()
        self.__sim: Optional[Simulation] = None
        self.__files: List[str] = []
        self.__analyses: Dict[str, Any] = {}
        self.__validator = JsonValidator(MANIFEST_SCHEMA_PATH)

    def get_output_dir(self) -> str:
        return self.__output_dir

    def get_simulation(self) -> Simulation:
        """
        :return: the simulation handle shared by the cooling stages, created on first use
        :rtype: Simulation
        """
        if self.__sim is None:
            config = self.__scenario.sim_config(self.__seeds["simulation"], self.__modes)
            self.__sim = Simulation(config, self.__scenario.initial_state(config.axes))
        return self.__sim

    def run(self) -> RunManifest:
        """
        Runs all requested stages and writes the results.

        :raises StageAbortedError: after writing an aborted manifest, if a stage aborts
        :raises NumericalInstabilityError: after writing an aborted manifest, if the integration fails
        :return: the manifest that was written
        :rtype: RunManifest
        """
        scenario = self.__scenario
        os.makedirs(self.__output_dir, exist_ok=True)
        manifest = RunManifest(scenario.get_name(), scenario.get_hash(), scenario.get_seed(), __version__,
                               _utc_now())
        with open(self.__path(SCENARIO_COPY_NAME), 'w', encoding='utf-8', newline='\n') as file:
            file.write(scenario.to_text())
        self.__files.append(self.__path(SCENARIO_COPY_NAME))

        stages: Dict[str, Stage] = {
            "friction": self.__friction,
            "camera": self.__camera,
            "intensity": self.__intensity,
            "interferometric": self.__interferometric,
            "ringup": self.__ringup,
            "calibration": self.__calibration,
        }
        logger.info("Running scenario '%s' (seed %d) into %s", scenario.get_name(), scenario.get_seed(),
                    self.__output_dir)
        name = "feasibility"
        try:
            for name in scenario.get_stages():
                logger.info("Stage %s: start", name)
                outcome = stages[name]()
                manifest.add_stage(outcome)
                self.__analyses[name] = dict(outcome.results)
                logger.info("Stage %s: amplitude %s m -> %s m", name, outcome.initial_amplitude,
                            outcome.final_amplitude)
            if scenario.get("analysis.feasibility"):
                name = "feasibility"
                outcome = self.__feasibility()
                manifest.add_stage(outcome)
        except (StageAbortedError, NumericalInstabilityError) as error:
            logger.error("Stage %s aborted: %s", name, error)
            manifest.add_stage(StageOutcome(name, "aborted", message=str(error)))
            manifest.set_error(f"{type(error).__name__}: {error}")
            self.__finish(manifest)
            raise
        self.__finish(manifest)
        return manifest

    def __path(self, name: str) -> str:
        return os.path.join(self.__output_dir, name)

    def __finish(self, manifest: RunManifest):
        self.__files.append(_write_json(self.__path(ANALYSES_NAME), self.__analyses))
        for file_path in self.__files:
            manifest.add_file(file_path, self.__output_dir)
        json_repr = manifest.create_json_repr()
        if not self.__validator.validate_json(json_repr):
            raise ValueError("The RunManifest:content must match the manifest schema")
        _write_json(self.__path(MANIFEST_NAME), json_repr)
        logger.info("Run %s: %d files written, manifest %s", manifest.get_status(), len(self.__files),
                    self.__path(MANIFEST_NAME))

    def __export_history(self, history: AmplitudeHistory, name: str):
        self.__files.append(write_columns(self.__path(name), ("t", "amplitude"), [history.times, history.amplitudes],
                                          comments={"stage": history.stage}))

    def __friction(self) -> StageOutcome:
        # lift-off happens before the particle is tracked; nothing to simulate
        amplitude = radial_rms(self.get_simulation())
        return StageOutcome("friction", initial_amplitude=amplitude, final_amplitude=amplitude)

    def __camera(self) -> StageOutcome:
        history = run_pulsed_camera_cooling(self.get_simulation(), self.__scenario.camera_feedback())
        self.__export_history(history, "camera_amplitudes.csv")
        results = {"iterations": float(len(history)), **history.details}
        return StageOutcome("camera", initial_amplitude=history.initial, final_amplitude=history.final,
                            results=results)

    def __intensity(self) -> StageOutcome:
        scenario = self.__scenario
        axis = scenario.get("intensity_feedback.axis")
        history = run_intensity_cooling(self.get_simulation(), scenario.beam(axis), scenario.intensity_feedback(),
                                        scenario.get("intensity_feedback.duration"), axis)
        self.__export_history(history, "intensity_amplitudes.csv")
        return StageOutcome("intensity", initial_amplitude=history.initial, final_amplitude=history.final,
                            results={"axis": axis, "final_rms": history.final / math.sqrt(2.0),
                                     **history.details})

    def __interferometric(self) -> StageOutcome:
        scenario = self.__scenario
        sim = self.get_simulation()
        mode = self.__modes["z"]
        feedback = scenario.interferometric_feedback(mode)
        history = run_interferometric_cooling(sim, scenario.laser(), scenario.lock_config(), feedback,
                                              scenario.get("interferometric_feedback.duration"),
                                              scenario.roughness(sim.spawn_rng()))
        trajectory = history.trajectory
        self.__files.append(trajectory.export_csv(self.__path("interferometric_trajectory.csv")))

        segment = min(int(SEGMENT_SECONDS * trajectory.sample_rate), len(trajectory) // 2)
        spectrum = estimate_psd(trajectory.measurements[:, 0], trajectory.sample_rate, segment, unit="m")
        self.__files.append(spectrum.export(self.__path(SPECTRUM_NAME)))
        floor = noise_floor(spectrum, (FLOOR_BAND[0] * mode.f0, FLOOR_BAND[1] * mode.f0))
        S_FN = thermal_force_psd(mode, sim.get_config().temperature)
        S_ee = floor ** 2 / 2.0
        predicted = math.sqrt(min_variance(S_FN, S_ee, mode))
        measured = history.final / math.sqrt(2.0)
        logger.info("Interferometric stage: floor %.4g m/sqrt(Hz), rms %.4g m, predicted minimum %.4g m",
                    floor, measured, predicted)
        return StageOutcome("interferometric", initial_amplitude=history.initial, final_amplitude=history.final,
                            results={"gamma_fb": feedback.gamma_fb, "floor_asd": floor, "final_rms": measured,
                                     "predicted_min_rms": predicted,
                                     "optimal_gamma_fb": optimal_gain(S_FN, S_ee, mode),
                                     "lock_gain_hz_per_volt": scenario.get("lock.gain"), **history.details})

    def __ringup(self) -> StageOutcome:
        mode = self.__modes["z"]
        trajectory = run_ring_up(self.get_simulation(), self.__scenario.get("ringup.duration"))
        step = max(len(trajectory) // RING_UP_POINTS, 1)
        times = trajectory.times[::step]
        energies = trajectory.energy("z", mode)[::step]
        fit = fit_ring_up(times, energies, mode, self.__scenario.get("ringup.detect_break"))
        self.__files.append(write_columns(self.__path("ringup_energy.csv"), ("t", "energy_J"), [times, energies],
                                          comments={"f0_Hz": mode.f0}))
        amplitudes = trajectory.amplitude("z", mode)
        return StageOutcome("ringup", initial_amplitude=float(amplitudes[0]), final_amplitude=float(amplitudes[-1]),
                            results={"n0": fit.n0, "Gamma_th": fit.rate, "Gamma_th_stderr": fit.rate_stderr,
                                     "changepoint": fit.changepoint, "r_squared": fit.r_squared})

    def __calibration(self) -> StageOutcome:
        scenario = self.__scenario
        particle = scenario.particle()
        laser = scenario.laser()
        lock = scenario.lock_config()
        sample_rate = scenario.get("sim.sample_rate")
        drive_frequency = scenario.get("calibration.drive_frequency")
        field_per_ampere = scenario.get("calibration.field_per_ampere")
        currents = scenario.get("calibration.drive_currents")
        frequencies = scenario.get("calibration.trap_frequencies")
        quality_factor = scenario.get("trap.quality_factor")
        gradient_per_hertz = 1.0 / trap_frequency(1.0, particle.density)
        seeds = iter(_child_seeds(self.__seeds["calibration"], len(frequencies) * len(currents)))

        responses: List[ProbeResponse] = []
        for frequency in frequencies:
            mode = OscillatorMode.from_frequency(particle.mass, frequency, quality_factor)
            gradient = frequency * gradient_per_hertz
            for current in currents:
                sim = Simulation(scenario.sim_config(next(seeds), {"z": mode}))
                sensor = LockedInterferometer(laser, lock, 1.0 / sample_rate, sim.spawn_rng(), sim.get_axes())
                shift = equilibrium_displacement(field_per_ampere * current, gradient)
                drive = SinusoidalDrive("z", probe_force(mode, shift), drive_frequency)
                trajectory = sim.run(scenario.get("calibration.duration"), sensor=sensor, drives=[drive])
                sensor.flush_warnings("calibration")
                spectrum = estimate_psd(trajectory.measurements[:, 1], sample_rate, unit="1")
                rms = tone_rms(spectrum, drive_frequency)
                floor = noise_floor(spectrum, (0.9 * drive_frequency, 1.05 * drive_frequency),
                                    peak=(drive_frequency, spectrum.resolution_bandwidth))
                responses.append(ProbeResponse(frequency, gradient, current, rms,
                                               floor * math.sqrt(spectrum.resolution_bandwidth)))
                logger.debug("Probe tone at f0 = %s Hz, I = %s A: %.4g units rms", frequency, current, rms)

        self.__files.append(write_columns(
            self.__path("calibration_responses.csv"),
            ("trap_frequency_Hz", "drive_current_A", "detector_rms", "detector_uncertainty"),
            [[r.trap_frequency for r in responses], [r.drive_current for r in responses],
             [r.detector_rms for r in responses], [r.detector_uncertainty for r in responses]],
            comments={"drive_frequency_Hz": drive_frequency, "field_per_ampere_T_per_A": field_per_ampere}))
        probe = probe_tone_calibration(responses, field_per_ampere, particle.mass, drive_frequency, quality_factor)

        mirror_run = mirror_calibration_run(scenario.get("calibration.mirror_amplitude"), drive_frequency, lock.gain,
                                            laser, np.random.default_rng(self.__seeds["mirror"]),
                                            scenario.get("calibration.mirror_duration"), sample_rate,
                                            scenario.get("calibration.amplitude_tolerance"),
                                            slew_limit=lock.slew_limit)
        mirror = calibration_from_mirror(mirror_run, laser.wavelength)
        agrees = probe.agrees_with(mirror)
        logger.info("Calibration: probe tone %.4g m/unit, mirror %.4g m/unit, %s", probe.factor, mirror.factor,
                    "consistent" if agrees else "inconsistent")
        return StageOutcome("calibration", results={
            "probe_factor": probe.factor,
            "probe_uncertainty": probe.uncertainty,
            "probe_r_squared": probe.r_squared,
            "probe_suppression": probe.suppression(laser.wavelength),
            "mirror_factor": mirror.factor,
            "mirror_uncertainty": mirror.uncertainty,
            "mirror_suppression": mirror_run.suppression,
            "agree": agrees,
        })

    def __feasibility(self) -> StageOutcome:
        analyses, messages = feasibility_analyses(self.__scenario)
        self.__analyses["feasibility"] = analyses
        scenario = self.__scenario
        finesses = scenario.get("analysis.finesses") or [scenario.get("cavity.finesse")]
        grid = scenario.n_in_grid()
        mode = self.__modes["z"]
        try:
            curves = occupation_curves(mode, scenario.get("thermal.temperature"), scenario.cavity(), finesses, grid)
            self.__files.append(export_occupation_curves(self.__path(OCCUPATION_NAME), grid, curves,
                                                         comments={"f0_Hz": mode.f0, "Q": mode.Q}))
        except UnsatisfiableConditionError as error:
            messages.append(f"occupation curves: {error}")
            logger.warning("Skipped occupation curves: %s", error)
        flat = {f"{section}.{key}": value for section, entries in analyses.items() if isinstance(entries, dict)
                for key, value in entries.items() if not isinstance(value, (dict, list))}
        return StageOutcome("feasibility", results=flat, message="; ".join(messages) or None)


def feasibility_analyses(scenario: Scenario) -> Tuple[Dict[str, Any], List[str]]:
    """
    Forward-design numbers of a scenario: cavity and free-space ground-state budgets for the axial
    mode, the excess-noise bound and the thermal budget. Analyses whose condition cannot be met are
    skipped with a message.

    :param scenario: the scenario
    :type scenario: Scenario
    :return: (results per analysis, messages of skipped analyses)
    :rtype: tuple
    """
    mode = scenario.modes()["z"]
    cavity = scenario.cavity()
    laser = scenario.laser()
    temperature = scenario.get("thermal.temperature")
    results: Dict[str, Any] = {}
    messages: List[str] = []

    def optional(name: str, compute: Callable[[], Any]):
        try:
            results[name] = compute()
        except ValueError as error:
            messages.append(f"{name}: {error}")
            logger.warning("Skipped %s: %s", name, error)

    optional("cavity", lambda: cavity_report(mode, temperature, cavity, scenario.get("cavity.n_in"))
             .create_json_repr())
    optional("freespace", lambda: freespace_report(mode, scenario.get("analysis.freespace_temperature"),
                                                   laser.wavelength, laser.n_in,
                                                   scenario.get("analysis.freespace_eta")).create_json_repr())

    def bound() -> Dict[str, Any]:
        value = excess_noise_bound(cavity.eta, mode, temperature)
        return {"S_bound": value.S_bound, "one_sided": value.one_sided, "two_sided": value.two_sided,
                "ordinary_linewidth": value.ordinary_linewidth, "text": value.describe()}

    optional("excess_noise", bound)
    optional("thermal", lambda: {key: _number(value) for key, value in thermal_budget(
        scenario.particle(), scenario.get("thermal.T_start"), scenario.get("thermal.surface_field"),
        scenario.get("thermal.absorbed_power"), scenario.get("thermal.law")).create_json_repr().items()})
    optional("finesse_scaling", lambda: {repr(finesse): n_in for finesse, n_in in finesse_scaling(
        mode, temperature, cavity, scenario.get("analysis.finesses") or [cavity.finesse])})
    return results, messages


def run_scenario(scenario: Union[str, Scenario], output_dir: Optional[str] = None) -> RunManifest:
    """
    Runs a scenario file or object.

    :param scenario: path of a scenario file, or a validated scenario
    :type scenario: str or Scenario
    :param output_dir: run directory, the scenario's ``output_dir`` when omitted
    :type output_dir: str or None
    :raises ConfigurationError: listing every violated invariant of the scenario
    :raises StageAbortedError: if a stage aborts (the aborted manifest is still written)
    :raises NumericalInstabilityError: if the integration diverges
    :rtype: RunManifest
    """
    if not isinstance(scenario, Scenario):
        scenario = Scenario.from_file(scenario)
    return ScenarioRunner(scenario, output_dir).run()


def _worker_count(requested: Optional[int]) -> int:
    if requested is not None:
        return max(int(requested), 1)
    text = os.environ.get(WORKERS_ENV)
    if text is None:
        return os.cpu_count() or 1
    try:
        workers = int(text)
    except ValueError as error:
        raise ConfigurationError([f"{WORKERS_ENV} must be a positive integer. Was {text!r}"]) from error
    if workers < 1:
        raise ConfigurationError([f"{WORKERS_ENV} must be a positive integer. Was {text!r}"])
    return workers


def _sweep_run(scenario: Scenario, run_dir: str) -> dict:
    try:
        return ScenarioRunner(scenario, run_dir).run().create_json_repr()
    except (StageAbortedError, NumericalInstabilityError):
        with open(os.path.join(run_dir, MANIFEST_NAME), 'r', encoding='utf-8') as file:
            return json.loads(file.read())


def _final_amplitude(manifest: dict, stage: str) -> float:
    for outcome in manifest["stages"]:
        if outcome["stage"] == stage and outcome.get("final_amplitude") is not None:
            return float(outcome["final_amplitude"])
    return math.nan


def sweep(scenario: Union[str, Scenario], parameter: str, values: Sequence[Any], output_dir: Optional[str] = None,
          workers: Optional[int] = None) -> List[RunManifest]:
    """
    Runs one independent copy of the scenario per value of a parameter. Each run gets its own seed
    spawned from the scenario seed and its own directory ``sweep_<parameter>/run_<index>``; a summary
    table of all runs is written next to them.

    :param scenario: path of a scenario file, or a validated scenario
    :type scenario: str or Scenario
    :param parameter: dotted scenario key, e.g. ``interferometric_feedback.gamma_fb``
    :type parameter: str
    :param values: values to run, SI numbers or text with unit suffixes
    :type values: Sequence
    :param workers: number of worker processes, :data:`WORKERS_ENV` or the CPU count when omitted
    :type workers: int or None
    :raises ConfigurationError: for an unknown parameter (listing the valid keys) or an invalid value
    :return: one manifest per value, in the order of ``values``
    :rtype: list
    """
    if not isinstance(scenario, Scenario):
        scenario = Scenario.from_file(scenario)
    check_key(parameter)
    sweep_dir = os.path.join(output_dir if output_dir is not None else scenario.get_output_dir(),
                             f"sweep_{parameter.replace('.', '_')}")
    seeds = _child_seeds(scenario.get_seed(), len(values))
    runs: List[Tuple[Scenario, str]] = []
    for index, (value, seed) in enumerate(zip(values, seeds)):
        run_dir = os.path.join(sweep_dir, f"run_{index:03d}")
        variant = scenario.with_value(parameter, value).with_value("scenario.seed", seed).with_output_dir(run_dir)
        runs.append((variant, run_dir))

    os.makedirs(sweep_dir, exist_ok=True)
    count = _worker_count(workers)
    logger.info("Sweep of %s over %d values with %d workers", parameter, len(runs), count)
    if count == 1 or len(runs) <= 1:
        reprs = [_sweep_run(variant, run_dir) for variant, run_dir in runs]
    else:
        with ProcessPoolExecutor(max_workers=min(count, len(runs))) as executor:
            reprs = list(executor.map(_sweep_run, *zip(*runs)))

    entries = []
    for index, ((variant, run_dir), json_repr) in enumerate(zip(runs, reprs)):
        entries.append({
            "index": index,
            "value": variant.get(parameter),
            "seed": variant.get_seed(),
            "status": json_repr["status"],
            "manifest": os.path.relpath(os.path.join(run_dir, MANIFEST_NAME), sweep_dir).replace(os.sep, "/"),
        })
    _write_json(os.path.join(sweep_dir, SWEEP_SUMMARY_NAME),
                {"parameter": parameter, "scenario_hash": scenario.get_hash(), "runs": entries})

    stages = ("camera", "intensity", "interferometric")
    numeric = [entry["value"] if isinstance(entry["value"], (int, float)) and not isinstance(entry["value"], bool)
               else math.nan for entry in entries]
    write_columns(os.path.join(sweep_dir, SWEEP_TABLE_NAME), ("index", "value", *(f"{s}_final" for s in stages)),
                  [[entry["index"] for entry in entries], numeric,
                   *[[_final_amplitude(json_repr, stage) for json_repr in reprs] for stage in stages]],
                  comments={"parameter": parameter})
    return [RunManifest.from_json_repr(json_repr) for json_repr in reprs]


def _load_runs(manifest_path: str) -> List[Tuple[RunManifest, str]]:
    with open(manifest_path, 'r', encoding='utf-8') as file:
        content = json.loads(file.read())
    base = os.path.dirname(os.path.abspath(manifest_path))
    if "runs" in content:
        runs = []
        for entry in content["runs"]:
            run_path = os.path.join(base, entry["manifest"])
            runs.extend(_load_runs(run_path))
        return runs
    return [(RunManifest.from_json_repr(content), base)]


def emit_plotdata(manifest_path: str, tag: str, output_dir: Optional[str] = None) -> List[str]:
    """
    Writes the columnar data behind a figure from a run manifest or a sweep summary.

    ``fig4a`` writes one ``f_Hz,asd`` file per feedback gain from the interferometric spectra,
    ``fig5`` one ``n_in,phonons,finesse`` file from the occupation curves of the feasibility
    analysis.

    :param manifest_path: ``manifest.json`` of a run or ``sweep_summary.json`` of a sweep
    :type manifest_path: str
    :param tag: figure tag, one of :data:`PLOT_TAGS`
    :type tag: str
    :param output_dir: target directory, next to the manifest when omitted
    :type output_dir: str or None
    :raises ConfigurationError: for an unknown tag or if a required analysis was not run
    :return: paths of the written files
    :rtype: list
    """
    if tag not in PLOT_TAGS:
        raise ConfigurationError([f"unknown figure tag {tag!r}; available tags: {', '.join(PLOT_TAGS)}"])
    runs = _load_runs(manifest_path)
    target = output_dir if output_dir is not None else os.path.dirname(os.path.abspath(manifest_path))
    written: List[str] = []
    if tag == "fig4a":
        for manifest, run_dir in runs:
            outcome = manifest.get_stage("interferometric")
            relative = manifest.get_file(SPECTRUM_NAME)
            if outcome is None or outcome.status != "completed" or relative is None:
                raise ConfigurationError([f"fig4a needs the interferometric spectrum of {run_dir}; enable the "
                                          f"'interferometric' stage in [scenario] stages"])
            gamma_fb = outcome.results["gamma_fb"]
            table = read_columns(os.path.join(run_dir, relative))
            written.append(write_columns(os.path.join(target, f"fig4a_gamma_fb_{gamma_fb!r}.csv"), ("f_Hz", "asd"),
                                         [table["f_Hz"], table["asd_unit_per_sqrtHz"]],
                                         comments={"gamma_fb_rad_per_s": gamma_fb,
                                                   "floor_asd": outcome.results.get("floor_asd"),
                                                   "unit": "m/sqrt(Hz), one-sided"}))
        return written

    blocks: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}
    for manifest, run_dir in runs:
        relative = manifest.get_file(OCCUPATION_NAME)
        if relative is None:
            raise ConfigurationError([f"fig5 needs the occupation curves of {run_dir}; enable the feasibility "
                                      f"analysis with 'feasibility = true' in [analysis]"])
        table = read_columns(os.path.join(run_dir, relative))
        for finesse in dict.fromkeys(table["finesse"].tolist()):
            mask = table["finesse"] == finesse
            blocks.setdefault(finesse, (table["n_in"][mask], table["phonons"][mask]))
    n_in = np.concatenate([block[0] for block in blocks.values()])
    phonons = np.concatenate([block[1] for block in blocks.values()])
    finesse_column = np.concatenate([np.full(len(block[0]), finesse) for finesse, block in blocks.items()])
    written.append(write_columns(os.path.join(target, "fig5.csv"), ("n_in", "phonons", "finesse"),
                                 [n_in, phonons, finesse_column], comments={"unit": "photons/s, phonons, 1"}))
    return written

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
This module contains the Scenario, StageOutcome and RunManifest classes.
"""

import copy
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from typing_extensions import Self

from maglev_twin.model.Mechanics import OscillatorMode, ParticleSpec, TrapSpec, driven_response_amplitude
from maglev_twin.model.Optics import BeamProfile, CavitySpec, LaserSpec
from maglev_twin.simulation.Control import BandpassFeedback, PulsedQuadrantFeedback
from maglev_twin.simulation.Dynamics import OscState, SimConfig
from maglev_twin.simulation.PhaseLock import LockConfig
from maglev_twin.simulation.Sensing import FLATNESS_LIMIT, CameraSpec, RoughnessProcess, roughness_excess_noise
from maglev_twin.util.Exceptions import ConfigurationError
from maglev_twin.util.File import file_manifest_entry, get_sha256_hash_from_text
from maglev_twin.util.JsonRepr import JsonRepr
from maglev_twin.util.JsonValidator import SCENARIO_SCHEMA_PATH, JsonValidator
from maglev_twin.util.ScenarioFile import (FIELDS, SCENARIO_STAGES, defaults, field_keys, parse_file, parse_text,
                                           parse_value, serialize)
from maglev_twin.util.ValidityChecks import check_string_length, collect_violations

STAGE_STATUS = ("completed", "aborted", "skipped")


def check_key(key: str):
    """
    :raises ConfigurationError: if ``key`` is not a recognised dotted scenario key, listing the valid ones
    """
    section, _, name = key.partition(".")
    if section not in FIELDS or name not in FIELDS[section]:
        raise ConfigurationError([f"unknown scenario key {key}; valid keys are: {', '.join(field_keys())}"])


def _merge(values: Dict[str, Dict[str, Any]]) -> Dict[str, Dict[str, Any]]:
    merged = defaults()
    for section, entries in values.items():
        if isinstance(entries, dict):
            merged.setdefault(section, {}).update(copy.deepcopy(entries))
        else:
            merged[section] = copy.deepcopy(entries)
    return merged


class Scenario(JsonRepr):
    """
    Validated description of one experimental sequence: particle, trap, optics, controllers,
    simulation settings, requested stages and analyses. Values are SI and complete; keys missing
    from the file take their defaults. A scenario is immutable, :meth:`with_value` returns a copy.
    """

    def __init__(self, values: Dict[str, Dict[str, Any]], parse_violations: Sequence[str] = ()):
        """
        Constructor. Use :meth:`from_text` or :meth:`from_file` to validate user input.

        :param values: nested dictionary of SI values, missing keys take their defaults
        :type values: dict
        :param parse_violations: problems found while reading the values, reported together with the rest
        :type parse_violations: Sequence[str]
        :raises ConfigurationError: listing every violated invariant
        """
        self.__values = _merge(values)
        violations = list(parse_violations) + JsonValidator(SCENARIO_SCHEMA_PATH).collect_errors(self.__values)
        if not violations:
            violations = self.__domain_violations()
        if violations:
            raise ConfigurationError(violations)

    @classmethod
    def from_text(cls, text: str) -> "Scenario":
        """
        Parses and validates scenario text. Malformed values and schema violations are reported
        together; the physical invariants of the built objects are checked once both pass.

        :raises ConfigurationError: listing every problem found
        :rtype: Scenario
        """
        values, violations = parse_text(text)
        return cls(values, violations)

    @classmethod
    def from_file(cls, file_path: str) -> "Scenario":
        """
        :see: :meth:`from_text`
        """
        if not os.path.isfile(file_path):
            raise ConfigurationError([f"scenario file {file_path} does not exist"])
        values, violations = parse_file(file_path)
        return cls(values, violations)

    def __domain_violations(self) -> List[str]:
        stages = self.get_stages()
        order = [SCENARIO_STAGES.index(stage) for stage in stages]
        violations = []
        if order != sorted(order):
            violations.append(f"The scenario:stages must follow the sequence {list(SCENARIO_STAGES)}. Was {stages}")
        violations += collect_violations(
            self.particle,
            self.trap,
            self.modes,
            self.laser,
            lambda: self.beam(),
            self.camera,
            self.lock_config,
            lambda: self.sim_config(self.get_seed()),
            self.camera_feedback,
            lambda: self.intensity_feedback(),
            lambda: self.interferometric_feedback(),
            self.__check_roughness,
            self.cavity,
            self.__check_analysis,
            self.__check_calibration,
        )
        return violations

    def __check_analysis(self):
        if not self.get("analysis.n_in_min") < self.get("analysis.n_in_max"):
            raise ValueError(f"The analysis:n_in_min must be below n_in_max ({self.get('analysis.n_in_max')}). "
                             f"Was {self.get('analysis.n_in_min')}")

    def __check_roughness(self):
        process = self.roughness(np.random.default_rng(0))
        if process is None:
            return
        f0 = self.modes()["z"].f0
        ratio = process.flatness((0.5 * f0, 2.0 * f0))
        if ratio > FLATNESS_LIMIT:
            raise ValueError(f"The roughness:rotation_rate must keep the excess noise flat within a factor "
                             f"{FLATNESS_LIMIT} over [{0.5 * f0:.4g}, {2.0 * f0:.4g}] Hz (correlation time "
                             f"{process.get_correlation_time():.3g} s, ratio {ratio:.3g}). "
                             f"Was {self.get('roughness.rotation_rate')}")

    def __check_calibration(self):
        calibration = self.__values["calibration"]
        particle = self.particle()
        omega_drive = 2.0 * math.pi * calibration["drive_frequency"]
        for frequency in calibration["trap_frequencies"]:
            mode = OscillatorMode.from_frequency(particle.mass, frequency, self.__values["trap"]["quality_factor"])
            driven_response_amplitude(1.0, mode, omega_drive)

    def get_values(self) -> Dict[str, Dict[str, Any]]:
        """
        :return: a copy of the complete nested value dictionary
        :rtype: dict
        """
        return copy.deepcopy(self.__values)

    def get(self, key: str) -> Any:
        """
        :param key: dotted key ``section.key``
        :type key: str
        :raises KeyError: for an unknown key
        """
        section, _, name = key.partition(".")
        try:
            return copy.deepcopy(self.__values[section][name])
        except KeyError as error:
            raise KeyError(f"unknown scenario key {key}") from error

    def get_name(self) -> str:
        return self.__values["scenario"]["name"]

    def get_seed(self) -> int:
        return self.__values["scenario"]["seed"]

    def get_output_dir(self) -> str:
        return self.__values["scenario"]["output_dir"]

    def get_stages(self) -> List[str]:
        return list(self.__values["scenario"]["stages"])

    def with_value(self, key: str, value: Any) -> "Scenario":
        """
        Copy of this scenario with one entry replaced. Text values are parsed with the unit table.

        :param key: dotted key ``section.key``
        :type key: str
        :param value: new value, SI number or text such as ``"10 nm"``
        :raises ConfigurationError: for an unknown key (listing the valid ones) or an invalid value
        :rtype: Scenario
        """
        check_key(key)
        section, _, name = key.partition(".")
        if isinstance(value, str):
            try:
                value = parse_value(value, FIELDS[section][name].kind)
            except ValueError as error:
                raise ConfigurationError([f"{key}: {error}"]) from error
        values = self.get_values()
        values[section][name] = value
        return Scenario(values)

    def with_output_dir(self, output_dir: str) -> "Scenario":
        values = self.get_values()
        values["scenario"]["output_dir"] = output_dir
        return Scenario(values)

    def to_text(self) -> str:
        """
        Canonical serialisation; parsing it returns an identical scenario.
        """
        return serialize(self.__values)

    def get_hash(self) -> str:
        """
        :return: SHA-256 of the canonical text without the output directory
        :rtype: str
        """
        values = self.get_values()
        values["scenario"].pop("output_dir", None)
        return get_sha256_hash_from_text(serialize(values))

    def create_json_repr(self) -> dict:
        """
        :see: :class:`JsonRepr<maglev_twin.util.JsonRepr.JsonRepr>`
        """
        return self.get_values()

    def particle(self) -> ParticleSpec:
        p = self.__values["particle"]
        return ParticleSpec.from_mass(p["mass"], p["density"], reflectivity=p["reflectivity"], T_c=p["T_c"],
                                      H0=p["H0"], roughness=p["roughness"])

    def trap(self) -> TrapSpec:
        t = self.__values["trap"]
        return TrapSpec.from_axial_gradient(t["axial_gradient_per_ampere"], t["current"],
                                            quality_factor=t["quality_factor"],
                                            radial_quality_factor=t["radial_quality_factor"])

    def modes(self) -> Dict[str, OscillatorMode]:
        return self.trap().modes(self.particle())

    def laser(self) -> LaserSpec:
        laser = self.__values["laser"]
        return LaserSpec(laser["wavelength"], laser["n_in"], laser["n_det"], laser["lo_ratio"] * laser["n_det"])

    def beam(self, axis: Optional[str] = None) -> BeamProfile:
        axis = axis if axis is not None else self.__values["intensity_feedback"]["axis"]
        beam = self.__values["beam"]
        return BeamProfile.on_slope(beam["fwhm"], beam["peak_flux"], 0 if axis == "x" else 1)

    def camera(self) -> CameraSpec:
        camera = self.__values["camera"]
        return CameraSpec(camera["pixel_pitch"], camera["centroid_noise"], camera["field_of_view"])

    def lock_config(self) -> LockConfig:
        """
        Phase lock updated once per record sample.
        """
        lock = self.__values["lock"]
        return LockConfig.from_hz_per_volt(lock["gain"], update_rate=self.__values["sim"]["sample_rate"],
                                           slew_limit=lock["slew_limit"], enabled=lock["enabled"])

    def sim_config(self, seed: int, modes: Optional[Dict[str, OscillatorMode]] = None) -> SimConfig:
        """
        :param seed: seed of this simulation, usually derived from the scenario seed
        :type seed: int
        :param modes: simulated modes, all three trap axes when omitted
        :type modes: dict or None
        :rtype: SimConfig
        """
        sim = self.__values["sim"]
        dt = 1.0 / (sim["sample_rate"] * sim["decimation"])
        return SimConfig(dt=dt, sample_rate=sim["sample_rate"], duration=0.0, seed=int(seed),
                         modes=modes if modes is not None else self.modes(), temperature=sim["temperature"],
                         displacement_bound=sim["displacement_bound"], latency=sim["latency"])

    def initial_state(self, axes: Tuple[str, ...]) -> OscState:
        """
        Circular radial orbit of the configured rms amplitude and an axial displacement.
        """
        sim = self.__values["sim"]
        modes = self.modes()
        radial = sim["initial_radial_amplitude"]
        positions = {"x": radial, "y": 0.0, "z": sim["initial_axial_amplitude"]}
        velocities = {"x": 0.0, "y": radial * modes["y"].omega0, "z": 0.0}
        return OscState(tuple(positions[a] for a in axes), tuple(velocities[a] for a in axes))

    def camera_feedback(self) -> PulsedQuadrantFeedback:
        cfg = self.__values["camera_feedback"]
        return PulsedQuadrantFeedback(cfg["impulse"], cfg["separation"], cfg["wait"], cfg["iterations"],
                                      self.camera(), cfg["enabled"])

    def __bandpass(self, section: str, mode: OscillatorMode) -> BandpassFeedback:
        cfg = self.__values[section]
        return BandpassFeedback(mode.f0, cfg["bandwidth"], cfg["gamma_fb"], cfg["phase"], cfg["force_limit"],
                                cfg["enabled"])

    def intensity_feedback(self) -> BandpassFeedback:
        return self.__bandpass("intensity_feedback", self.modes()[self.__values["intensity_feedback"]["axis"]])

    def interferometric_feedback(self, mode: Optional[OscillatorMode] = None) -> BandpassFeedback:
        return self.__bandpass("interferometric_feedback", mode if mode is not None else self.modes()["z"])

    def roughness(self, rng: np.random.Generator) -> Optional[RoughnessProcess]:
        """
        Roughness process tuned to the configured floor, or None if disabled.
        """
        cfg = self.__values["roughness"]
        if not cfg["enabled"]:
            return None
        particle = self.particle()
        rotation = cfg["rotation_rate"] if cfg["rotation_rate"] > 0 else None
        return roughness_excess_noise(particle.roughness, rotation, cfg["correlation_length"], particle.radius, rng,
                                      cfg["floor"], cfg["reference_frequency"])

    def cavity(self) -> CavitySpec:
        cavity = self.__values["cavity"]
        return CavitySpec.from_finesse(cavity["wavelength"], cavity["length"], cavity["finesse"], cavity["eta_det"],
                                       cavity["coupling_ratio"])

    def n_in_grid(self) -> np.ndarray:
        analysis = self.__values["analysis"]
        return np.logspace(math.log10(analysis["n_in_min"]), math.log10(analysis["n_in_max"]),
                           analysis["n_in_points"])


@dataclass
class StageOutcome(JsonRepr):
    """
    Summary of one stage: amplitudes on entry and exit and its numeric results.
    """
    stage: str
    status: str = "completed"
    initial_amplitude: Optional[float] = None
    final_amplitude: Optional[float] = None
    results: Dict[str, Any] = field(default_factory=dict)
    message: Optional[str] = None

    def __post_init__(self):
        if self.status not in STAGE_STATUS:
            raise ValueError(f"The StageOutcome:status must be one of {STAGE_STATUS}. Was {self.status}")

    def create_json_repr(self) -> dict:
        """
        :see: :class:`JsonRepr<maglev_twin.util.JsonRepr.JsonRepr>`
        """
        return {
            "stage": self.stage,
            "status": self.status,
            "initial_amplitude": self.initial_amplitude,
            "final_amplitude": self.final_amplitude,
            "results": dict(self.results),
            "message": self.message,
        }

    @classmethod
    def from_json_repr(cls, json_repr: dict) -> "StageOutcome":
        return cls(json_repr["stage"], json_repr["status"], json_repr.get("initial_amplitude"),
                   json_repr.get("final_amplitude"), dict(json_repr.get("results", {})), json_repr.get("message"))


class RunManifest(JsonRepr):
    """
    Record of one scenario run: where it came from, how every stage ended and which files it wrote,
    each with its MD5 checksum. The creation time is the only entry that differs between two runs
    of the same scenario.
    """

    def __init__(self, scenario: str, scenario_hash: str, seed: int, version: str, created: str):
        """
        Constructor

        :param scenario: scenario name
        :type scenario: str
        :param scenario_hash: SHA-256 of the canonical scenario text
        :type scenario_hash: str
        :param seed: root seed
        :type seed: int
        :param version: package version
        :type version: str
        :param created: UTC timestamp
        :type created: str
        """
        self.__scenario = check_string_length(scenario, 1, 120, "RunManifest", "scenario")
        self.__hash = scenario_hash
        self.__seed = seed
        self.__version = version
        self.__created = created
        self.__stages: List[StageOutcome] = []
        self.__files: List[Dict[str, str]] = []
        self.__error: Optional[str] = None

    def add_stage(self, outcome: StageOutcome) -> Self:
        """
        :return: this object
        :rtype: RunManifest
        """
        if not isinstance(outcome, StageOutcome):
            raise ValueError("Argument outcome must be of type StageOutcome.")
        self.__stages.append(outcome)
        return self

    def add_file(self, file_path: str, root: str) -> Self:
        """
        Lists a written file with its checksum, relative to the run directory.

        :param file_path: path of the written file
        :type file_path: str
        :param root: run directory
        :type root: str
        :return: this object
        :rtype: RunManifest
        """
        entry = file_manifest_entry(file_path, root)
        self.__files = [listed for listed in self.__files if listed["path"] != entry["path"]]
        self.__files.append(entry)
        return self

    def set_error(self, message: str) -> Self:
        self.__error = message
        return self

    def get_stages(self) -> List[StageOutcome]:
        return self.__stages

    def get_stage(self, stage: str) -> Optional[StageOutcome]:
        for outcome in self.__stages:
            if outcome.stage == stage:
                return outcome
        return None

    def get_files(self) -> List[Dict[str, str]]:
        return self.__files

    def get_file(self, name: str) -> Optional[str]:
        """
        :return: relative path of the first listed file with this base name
        """
        for entry in self.__files:
            if entry["path"].rsplit("/", 1)[-1] == name:
                return entry["path"]
        return None

    def get_status(self) -> str:
        aborted = self.__error is not None or any(stage.status == "aborted" for stage in self.__stages)
        return "aborted" if aborted else "completed"

    def get_seed(self) -> int:
        return self.__seed

    def get_scenario_hash(self) -> str:
        return self.__hash

    def create_json_repr(self) -> dict:
        """
        :see: :class:`JsonRepr<maglev_twin.util.JsonRepr.JsonRepr>`
        """
        return {
            "scenario": self.__scenario,
            "scenario_hash": self.__hash,
            "version": self.__version,
            "created": self.__created,
            "seed": self.__seed,
            "status": self.get_status(),
            "error": self.__error,
            "stages": [stage.create_json_repr() for stage in self.__stages],
            "files": [dict(entry) for entry in self.__files],
        }

    @classmethod
    def from_json_repr(cls, json_repr: dict) -> "RunManifest":
        manifest = cls(json_repr["scenario"], json_repr["scenario_hash"], json_repr["seed"], json_repr["version"],
                       json_repr["created"])
        for stage in json_repr.get("stages", []):
            manifest.add_stage(StageOutcome.from_json_repr(stage))
        manifest.__files = [dict(entry) for entry in json_repr.get("files", [])]
        if json_repr.get("error") is not None:
            manifest.set_error(json_repr["error"])
        return manifest

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

"""
This module provides essential imports for the maglev_twin package.
"""

__version__ = "0.3.0"

# pylint: disable=wrong-import-position
from .ScenarioRunner import ScenarioRunner, run_scenario, sweep, emit_plotdata, feasibility_analyses
from .model.Scenario import Scenario, StageOutcome, RunManifest
from .model.Mechanics import PhysicalConstants, ParticleSpec, TrapSpec, OscillatorMode, CONSTANTS, \
    trap_frequency, equilibrium_displacement, probe_force, driven_response_amplitude
from .model.Optics import LaserSpec, BeamProfile, CavitySpec
from .simulation.Dynamics import SimConfig, OscState, Trajectory, SinusoidalDrive, Simulation, simulate
from .simulation.PhaseLock import LockConfig, LockState, lock_step, mirror_calibration_run
from .simulation.Control import BandpassFeedback, PulsedQuadrantFeedback
from .analysis.Spectra import SpectrumEstimate, estimate_psd, fit_ring_up, probe_tone_calibration
from .util.Exceptions import ConfigurationError, StageAbortedError, NumericalInstabilityError
from .util.JsonValidator import JsonValidator

__all__ = [
    "__version__",
    "ScenarioRunner",
    "run_scenario",
    "sweep",
    "emit_plotdata",
    "feasibility_analyses",
    "Scenario",
    "StageOutcome",
    "RunManifest",
    "PhysicalConstants",
    "ParticleSpec",
    "TrapSpec",
    "OscillatorMode",
    "CONSTANTS",
    "trap_frequency",
    "equilibrium_displacement",
    "probe_force",
    "driven_response_amplitude",
    "LaserSpec",
    "BeamProfile",
    "CavitySpec",
    "SimConfig",
    "OscState",
    "Trajectory",
    "SinusoidalDrive",
    "Simulation",
    "simulate",
    "LockConfig",
    "LockState",
    "lock_step",
    "mirror_calibration_run",
    "BandpassFeedback",
    "PulsedQuadrantFeedback",
    "SpectrumEstimate",
    "estimate_psd",
    "fit_ring_up",
    "probe_tone_calibration",
    "ConfigurationError",
    "StageAbortedError",
    "NumericalInstabilityError",
    "JsonValidator"
]

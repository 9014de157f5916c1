# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
The locked homodyne interferometer as a sensor of the simulation loop, and the axial cooling and
ring-up stages that use it.
"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from maglev_twin.model.Optics import LaserSpec
from maglev_twin.simulation.Control import (AmplitudeHistory, BandpassController, BandpassFeedback,
                                            run_continuous_feedback)
from maglev_twin.simulation.Dynamics import Simulation, Trajectory
from maglev_twin.simulation.PhaseLock import LockConfig, PhaseTracker
from maglev_twin.simulation.Sensing import GAUSSIAN_THRESHOLD, HomodyneDetector, RoughnessProcess
from maglev_twin.util.Exceptions import LockLostError
from maglev_twin.util.File import write_columns

logger = logging.getLogger(__name__)

DETECTOR_HEADER = ("t", "sum", "diff")


class LockedInterferometer:
    """
    Sensor returning ``[estimate, error]`` per record sample: the linearised displacement estimate
    (tracking phase plus residual) and the residual error signal in normalised units.

    Roughness adds an apparent displacement to the optical path. With the lock enabled the residual
    phase must stay inside (-pi, pi); a cycle slip raises :class:`LockLostError`.
    """

    def __init__(self, laser: LaserSpec, lock: LockConfig, bin_width: float, rng: np.random.Generator,
                 axes: Sequence[str], roughness: Optional[RoughnessProcess] = None, axis: str = "z",
                 keep_records: bool = False, gaussian_threshold: float = GAUSSIAN_THRESHOLD):
        """
        Constructor

        :param laser: probe laser
        :type laser: LaserSpec
        :param lock: phase lock settings; its update rate should equal 1 / bin_width
        :type lock: LockConfig
        :param bin_width: detector bin [s], one bin per record sample
        :type bin_width: float
        :param rng: generator for the photon counts
        :type rng: numpy.random.Generator
        :param axes: simulated axes, in record order
        :type axes: Sequence[str]
        :param roughness: apparent-displacement process, none when omitted
        :type roughness: RoughnessProcess or None
        :param keep_records: keep the raw (t, sum, diff) counts for export
        :type keep_records: bool
        """
        if not math.isclose(lock.update_rate * bin_width, 1.0, rel_tol=1e-9):
            raise ValueError(f"The LockConfig:update_rate must equal the detector rate {1.0 / bin_width} Hz. "
                             f"Was {lock.update_rate}")
        self.__laser = laser
        self.__lock = lock
        self.__bin_width = bin_width
        self.__detector = HomodyneDetector(laser, bin_width, rng, gaussian_threshold)
        self.__tracker = PhaseTracker(lock, laser.wavelength)
        self.__roughness = roughness
        self.__index = list(axes).index(axis)
        self.__to_phase = 4.0 * math.pi / laser.wavelength
        self.__keep = keep_records
        self.__records: List[tuple] = []

    def get_tracker(self) -> PhaseTracker:
        return self.__tracker

    def get_detector(self) -> HomodyneDetector:
        return self.__detector

    def measure(self, t: float, positions: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        apparent = positions[self.__index]
        if self.__roughness is not None:
            apparent += self.__roughness.step(self.__bin_width)
        tracking = self.__tracker.get_state().phase
        residual = self.__to_phase * apparent - tracking
        if self.__lock.enabled and abs(residual) > math.pi:
            raise LockLostError(f"lock lost at t = {t} s: residual phase {residual} rad exceeds the capture "
                                f"range; increase the lock gain or reduce the motion amplitude")
        count_sum, count_diff = self.__detector.counts(residual)
        if self.__keep:
            self.__records.append((t, count_sum, count_diff))
        error = self.__detector.normalized_error(count_diff)
        self.__tracker.update(error)
        return np.array([(tracking + error) / self.__to_phase, error])

    def flush_warnings(self, label: str = "interferometer"):
        self.__tracker.flush_warnings(label)

    def export_records(self, file_path: str) -> str:
        """
        Writes the kept detector counts as ``t,sum,diff`` with the bin width in a header comment.
        """
        columns = np.array(self.__records, dtype=float).reshape(-1, 3).T
        return write_columns(file_path, DETECTOR_HEADER, list(columns),
                             comments={"bin_width_s": self.__bin_width, "wavelength_m": self.__laser.wavelength})


def run_interferometric_cooling(sim: Simulation, laser: LaserSpec, lock: LockConfig, fb: BandpassFeedback,
                                duration: float, roughness: Optional[RoughnessProcess] = None,
                                rng: Optional[np.random.Generator] = None) -> AmplitudeHistory:
    """
    Axial cooling on the locked interferometer. The simulation record rate is the detector rate.

    :param sim: simulation handle containing the z axis
    :type sim: Simulation
    :param laser: probe laser
    :type laser: LaserSpec
    :param lock: phase lock settings
    :type lock: LockConfig
    :param fb: bandpass feedback around the axial frequency
    :type fb: BandpassFeedback
    :param duration: stage length [s]
    :type duration: float
    :raises LockLostError: on a cycle slip of the lock
    :raises AntiDampingError: on monotone amplitude growth
    :rtype: AmplitudeHistory
    """
    config = sim.get_config()
    rng = rng if rng is not None else sim.spawn_rng()
    sensor = LockedInterferometer(laser, lock, 1.0 / config.sample_rate, rng, sim.get_axes(), roughness)
    controller = BandpassController(fb, sim.get_mode("z"), config.sample_rate, axis="z",
                                    delay_samples=config.latency)
    history = run_continuous_feedback(sim, controller, sensor, duration, "z", "interferometric")
    sensor.flush_warnings("interferometric")
    return history


def run_ring_up(sim: Simulation, duration: float) -> Trajectory:
    """
    Switches the feedback off and lets the mode reheat from its bath.

    :param sim: simulation handle, usually right after a cooling stage
    :type sim: Simulation
    :param duration: free evolution time [s]
    :type duration: float
    :rtype: Trajectory
    """
    logger.info("Ring-up: free evolution for %s s from t = %s s", duration, sim.get_state().t)
    return sim.run(duration)

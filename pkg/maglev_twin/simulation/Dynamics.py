# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Time-domain simulation of the damped, driven, noisy harmonic oscillator of every trap axis.

Each axis obeys m x'' + m gamma x' + m omega0^2 x = F_N + F_fb + F_drive with a white thermal force
F_N of two-sided PSD 2 gamma m k_B T. Over one integrator step the linear SDE is propagated exactly:
the homogeneous part with the matrix exponential, the held force with the zero-order-hold input
integral and the noise with the Van Loan covariance. The update is unconditionally stable and
keeps equipartition free of discretisation drift.
"""

import collections
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from maglev_twin.model.Mechanics import AXES, CONSTANTS, OscillatorMode
from maglev_twin.util.Exceptions import NumericalInstabilityError
from maglev_twin.util.File import write_columns
from maglev_twin.util.ValidityChecks import check_finite, check_non_negative, check_positive

logger = logging.getLogger(__name__)

NOISE_CHUNK = 16384
TRAJECTORY_HEADER = ("t", "x", "y", "z", "vx", "vy", "vz", "F_fb")


class Sensor(Protocol):
    """
    Maps the true state at a record sample onto a measurement vector.
    """

    def measure(self, t: float, positions: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        ...  # pragma: no cover


class FeedbackController(Protocol):
    """
    Causal map from the measurement record to the feedback force per axis.
    """

    def update(self, t: float, measurement: np.ndarray) -> Mapping[str, float]:
        ...  # pragma: no cover


@dataclass(frozen=True)
class SinusoidalDrive:
    """
    Deterministic force F0 sin(2 pi f t + phase) on one axis.
    """
    axis: str
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"The SinusoidalDrive:axis must be one of {AXES}. Was {self.axis}")
        check_finite(self.amplitude, "SinusoidalDrive", "amplitude")
        check_non_negative(self.frequency, "SinusoidalDrive", "frequency")
        check_finite(self.phase, "SinusoidalDrive", "phase")

    def force(self, t: float) -> float:
        return self.amplitude * math.sin(2.0 * math.pi * self.frequency * t + self.phase)


@dataclass(frozen=True)
class SimConfig:
    """
    Integration settings. ``modes`` maps axis names onto their harmonic modes; ``temperature`` is
    the effective bath temperature shared by all axes. ``latency`` is the number of record samples
    between a controller output and its application.
    """
    dt: float
    sample_rate: float
    duration: float
    seed: int
    modes: Mapping[str, OscillatorMode]
    temperature: float
    displacement_bound: float = 1e-3
    latency: int = 1

    def __post_init__(self):
        check_positive(self.dt, "SimConfig", "dt")
        check_positive(self.sample_rate, "SimConfig", "sample_rate")
        check_non_negative(self.duration, "SimConfig", "duration")
        check_non_negative(self.temperature, "SimConfig", "temperature")
        check_positive(self.displacement_bound, "SimConfig", "displacement_bound")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool) \
                or not 0 <= int(self.seed) < 2 ** 64:
            raise TypeError(f"The SimConfig:seed must be an integer in [0, 2^64). Was {self.seed!r}")
        if not isinstance(self.latency, int) or self.latency < 0:
            raise ValueError(f"The SimConfig:latency must be a non-negative integer. Was {self.latency}")
        if not self.modes or any(axis not in AXES for axis in self.modes):
            raise ValueError(f"The SimConfig:modes must map a non-empty subset of {AXES}. Was {list(self.modes)}")

        max_f0 = max(mode.f0 for mode in self.modes.values())
        if self.dt > 1.0 / (50.0 * max_f0) * (1.0 + 1e-9):
            raise ValueError(f"The SimConfig:dt must resolve the fastest mode ({max_f0} Hz) with at least "
                             f"50 steps per period. Was {self.dt}")
        if self.sample_rate * self.dt > 1.0 + 1e-9:
            raise ValueError(f"The SimConfig:sample_rate must not exceed 1/dt ({1.0 / self.dt}). "
                             f"Was {self.sample_rate}")
        ratio = 1.0 / (self.sample_rate * self.dt)
        if abs(ratio - round(ratio)) > 1e-6 * ratio:
            raise ValueError(f"The SimConfig:sample_rate must divide 1/dt into an integer decimation. "
                             f"Was {self.sample_rate} for dt {self.dt}")

    @property
    def axes(self) -> Tuple[str, ...]:
        return tuple(axis for axis in AXES if axis in self.modes)

    @property
    def decimation(self) -> int:
        return int(round(1.0 / (self.sample_rate * self.dt)))

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class OscState:
    """
    Positions and velocities in the axis order of the owning configuration.
    """
    position: Tuple[float, ...]
    velocity: Tuple[float, ...]
    t: float = 0.0

    def __post_init__(self):
        if len(self.position) != len(self.velocity):
            raise ValueError(f"The OscState:velocity must have as many entries as position. "
                             f"Was {len(self.velocity)} for {len(self.position)}")
        for value in (*self.position, *self.velocity, self.t):
            if not math.isfinite(value):
                raise NumericalInstabilityError(f"Non-finite oscillator state at t = {self.t}: "
                                                f"x = {self.position}, v = {self.velocity}")

    @classmethod
    def at_rest(cls, n_axes: int, t: float = 0.0) -> "OscState":
        return cls((0.0,) * n_axes, (0.0,) * n_axes, t)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Uniformly sampled record of a simulation run. ``forces`` holds the feedback force applied
    during each sample interval; ``measurements`` the sensor output, if a sensor was attached.
    """
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    forces: np.ndarray
    axes: Tuple[str, ...]
    measurements: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        for name in ("positions", "velocities", "forces"):
            if getattr(self, name).shape != (n, len(self.axes)):
                raise ValueError(f"The Trajectory:{name} must have shape ({n}, {len(self.axes)}). "
                                 f"Was {getattr(self, name).shape}")
        if self.measurements is not None and len(self.measurements) != n:
            raise ValueError(f"The Trajectory:measurements must have {n} rows. Was {len(self.measurements)}")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def sample_rate(self) -> float:
        return float(self.metadata.get("sample_rate", 1.0 / (self.times[1] - self.times[0])))

    def position(self, axis: str) -> np.ndarray:
        return self.positions[:, self.axes.index(axis)]

    def velocity(self, axis: str) -> np.ndarray:
        return self.velocities[:, self.axes.index(axis)]

    def force(self, axis: str) -> np.ndarray:
        return self.forces[:, self.axes.index(axis)]

    def energy(self, axis: str, mode: OscillatorMode) -> np.ndarray:
        """
        Mechanical energy of one axis [J].
        """
        x = self.position(axis)
        v = self.velocity(axis)
        return 0.5 * mode.mass * (v * v + mode.omega0 ** 2 * x * x)

    def amplitude(self, axis: str, mode: OscillatorMode) -> np.ndarray:
        """
        Instantaneous oscillation amplitude sqrt(x^2 + (v/omega0)^2) [m].
        """
        x = self.position(axis)
        v = self.velocity(axis)
        return np.sqrt(x * x + (v / mode.omega0) ** 2)

    def export_csv(self, file_path: str) -> str:
        """
        Writes the columns ``t,x,y,z,vx,vy,vz,F_fb``. Axes that were not simulated are written as
        zero; ``F_fb`` is the axial feedback force.
        """
        zeros = np.zeros(len(self.times))

        def column(values: np.ndarray, axis: str) -> np.ndarray:
            return values[:, self.axes.index(axis)] if axis in self.axes else zeros

        columns = [self.times]
        columns += [column(self.positions, axis) for axis in AXES]
        columns += [column(self.velocities, axis) for axis in AXES]
        columns.append(column(self.forces, "z"))
        comments = {key: value for key, value in self.metadata.items() if not isinstance(value, (dict, list))}
        return write_columns(file_path, TRAJECTORY_HEADER, columns, comments)


class ModePropagator:
    """
    Exact one-step propagator of a single axis for a fixed step and bath temperature.
    """

    def __init__(self, mode: OscillatorMode, dt: float, temperature: float):
        """
        Constructor

        :param mode: the harmonic mode
        :type mode: OscillatorMode
        :param dt: integrator step [s]
        :type dt: float
        :param temperature: bath temperature [K]
        :type temperature: float
        """
        drift = np.array([[0.0, 1.0], [-mode.omega0 ** 2, -mode.gamma]])

        augmented = np.zeros((3, 3))
        augmented[:2, :2] = drift
        augmented[1, 2] = 1.0 / mode.mass
        exp_augmented = expm(augmented * dt)
        self.__transition = exp_augmented[:2, :2]
        self.__input = exp_augmented[:2, 2]

        diffusion = thermal_force_psd(mode, temperature) / mode.mass ** 2
        van_loan = np.zeros((4, 4))
        van_loan[:2, :2] = -drift
        van_loan[1, 3] = diffusion
        van_loan[2:, 2:] = drift.T
        exp_van_loan = expm(van_loan * dt)
        covariance = self.__transition @ exp_van_loan[:2, 2:]
        covariance = 0.5 * (covariance + covariance.T)

        c11 = max(covariance[0, 0], 0.0)
        l11 = math.sqrt(c11)
        l21 = covariance[1, 0] / l11 if l11 > 0.0 else 0.0
        l22 = math.sqrt(max(covariance[1, 1] - l21 * l21, 0.0))
        self.__cholesky = (l11, l21, l22)

    def get_transition(self) -> np.ndarray:
        return self.__transition.copy()

    def get_input(self) -> np.ndarray:
        return self.__input.copy()

    def get_cholesky(self) -> Tuple[float, float, float]:
        return self.__cholesky

    def coefficients(self) -> Tuple[float, ...]:
        """
        Flat tuple (p11, p12, p21, p22, b1, b2, l11, l21, l22) for the inner loop.
        """
        (p11, p12), (p21, p22) = self.__transition.tolist()
        b1, b2 = self.__input.tolist()
        return (p11, p12, p21, p22, b1, b2, *self.__cholesky)


class Simulation:
    """
    Stateful handle that carries the oscillator state across consecutive run segments, e.g. the
    stages of a cooling sequence. Random streams are spawned deterministically from the seed: one
    per run segment and one per call of :meth:`spawn_rng`.
    """

    def __init__(self, config: SimConfig, state0: Optional[OscState] = None):
        """
        Constructor

        :param config: integration settings
        :type config: SimConfig
        :param state0: initial state, at rest when omitted
        :type state0: OscState or None
        """
        self.__config = config
        self.__axes = config.axes
        self.__state = state0 if state0 is not None else OscState.at_rest(len(self.__axes))
        if len(self.__state.position) != len(self.__axes):
            raise ValueError(f"The Simulation:state0 must have one entry per axis {self.__axes}. "
                             f"Was {len(self.__state.position)}")
        self.__seed_sequence = np.random.SeedSequence(int(config.seed))
        self.__propagators = {axis: ModePropagator(config.modes[axis], config.dt, config.temperature)
                              for axis in self.__axes}

    def get_config(self) -> SimConfig:
        return self.__config

    def get_axes(self) -> Tuple[str, ...]:
        return self.__axes

    def get_state(self) -> OscState:
        return self.__state

    def set_state(self, state: OscState):
        if len(state.position) != len(self.__axes):
            raise ValueError(f"The Simulation:state must have one entry per axis {self.__axes}. "
                             f"Was {len(state.position)}")
        self.__state = state

    def get_mode(self, axis: str) -> OscillatorMode:
        return self.__config.modes[axis]

    def spawn_rng(self) -> np.random.Generator:
        """
        :return: an independent generator derived from the seed
        :rtype: numpy.random.Generator
        """
        return np.random.default_rng(self.__seed_sequence.spawn(1)[0])

    def kick(self, impulses: Mapping[str, float]):
        """
        Applies instantaneous momentum kicks.

        :param impulses: impulse per axis [N s]
        :type impulses: Mapping[str, float]
        """
        velocity = list(self.__state.velocity)
        for axis, impulse in impulses.items():
            index = self.__axes.index(axis)
            velocity[index] += impulse / self.__config.modes[axis].mass
        self.__state = OscState(self.__state.position, tuple(velocity), self.__state.t)

    def run(self, duration: float, controller: Optional[FeedbackController] = None,
            sensor: Optional[Sensor] = None, drives: Sequence[SinusoidalDrive] = ()) -> Trajectory:
        """
        Advances the state by ``duration`` and records every sample.

        :param duration: segment length [s], rounded down to whole record samples
        :type duration: float
        :param controller: feedback hook, called once per record sample
        :type controller: FeedbackController or None
        :param sensor: measurement model, the ideal position sensor when omitted
        :type sensor: Sensor or None
        :param drives: deterministic drives, evaluated at the step midpoint
        :type drives: Sequence[SinusoidalDrive]
        :raises NumericalInstabilityError: if the state becomes non-finite or leaves the
            displacement bound
        :return: the recorded segment
        :rtype: Trajectory
        """
        config = self.__config
        axes = self.__axes
        n_axes = len(axes)
        dt = config.dt
        decimation = config.decimation
        n_samples = int(math.floor(duration * config.sample_rate + 1e-9))
        bound = config.displacement_bound

        for drive in drives:
            if drive.axis not in axes:
                raise ValueError(f"The SinusoidalDrive:axis must be simulated. Was {drive.axis} for {axes}")
        drives_per_axis = [[drive for drive in drives if drive.axis == axis] for axis in axes]
        coefficients = [self.__propagators[axis].coefficients() for axis in axes]

        rng = self.spawn_rng()
        positions = list(self.__state.position)
        velocities = list(self.__state.velocity)
        t0 = self.__state.t

        times = np.empty(n_samples)
        position_record = np.empty((n_samples, n_axes))
        velocity_record = np.empty((n_samples, n_axes))
        force_record = np.empty((n_samples, n_axes))
        measurement_record: List[np.ndarray] = []

        pending = collections.deque([[0.0] * n_axes for _ in range(config.latency)])
        noise: List[List[List[float]]] = []
        noise_index = NOISE_CHUNK

        for k in range(n_samples):
            t = t0 + k * decimation * dt
            for index in range(n_axes):
                x = positions[index]
                if not math.isfinite(x) or not math.isfinite(velocities[index]) or abs(x) > bound:
                    raise NumericalInstabilityError(
                        f"Axis {axes[index]} left the displacement bound {bound} m at t = {t} s "
                        f"(x = {x}); check the feedback sign and gain")
            times[k] = t
            position_record[k] = positions
            velocity_record[k] = velocities

            if sensor is not None:
                measurement = np.asarray(sensor.measure(t, position_record[k], velocity_record[k]), dtype=float)
                measurement_record.append(measurement)
            else:
                measurement = position_record[k].copy()

            command = [0.0] * n_axes
            if controller is not None:
                for axis, value in controller.update(t, measurement).items():
                    command[axes.index(axis)] = float(value)
            pending.append(command)
            applied = pending.popleft()
            force_record[k] = applied

            for step in range(decimation):
                if noise_index >= NOISE_CHUNK:
                    noise = rng.standard_normal((NOISE_CHUNK, n_axes, 2)).tolist()
                    noise_index = 0
                draws = noise[noise_index]
                noise_index += 1
                midpoint = t + (step + 0.5) * dt
                for index in range(n_axes):
                    p11, p12, p21, p22, b1, b2, l11, l21, l22 = coefficients[index]
                    force = applied[index]
                    for drive in drives_per_axis[index]:
                        force += drive.force(midpoint)
                    n1, n2 = draws[index]
                    x = positions[index]
                    v = velocities[index]
                    positions[index] = p11 * x + p12 * v + b1 * force + l11 * n1
                    velocities[index] = p21 * x + p22 * v + b2 * force + l21 * n1 + l22 * n2

        self.__state = OscState(tuple(positions), tuple(velocities), t0 + n_samples * decimation * dt)
        for index, axis in enumerate(axes):
            if not math.isfinite(positions[index]) or abs(positions[index]) > bound:
                raise NumericalInstabilityError(
                    f"Axis {axis} left the displacement bound {bound} m at t = {self.__state.t} s "
                    f"(x = {positions[index]}); check the feedback sign and gain")

        metadata = {
            "seed": int(config.seed),
            "dt": dt,
            "sample_rate": config.sample_rate,
            "temperature": config.temperature,
            "t_start": t0,
        }
        measurements = np.array(measurement_record) if sensor is not None else None
        logger.debug("Simulated %d samples from t = %s s", n_samples, t0)
        return Trajectory(times, position_record, velocity_record, force_record, axes, measurements, metadata)


def thermal_force_psd(mode: OscillatorMode, temperature: float) -> float:
    """
    Two-sided thermal force PSD 2 gamma m k_B T from the fluctuation-dissipation theorem.

    :param mode: the damped mode
    :type mode: OscillatorMode
    :param temperature: bath temperature [K]
    :type temperature: float
    :return: force PSD [N^2/Hz]
    :rtype: float
    """
    check_non_negative(temperature, "thermal_force_psd", "temperature")
    return 2.0 * mode.gamma * mode.mass * CONSTANTS.kB * temperature


def simulate(config: SimConfig, state0: Optional[OscState] = None, controller: Optional[FeedbackController] = None,
             drives: Sequence[SinusoidalDrive] = (), sensor: Optional[Sensor] = None) -> Trajectory:
    """
    Runs a single simulation over ``config.duration``. Identical inputs give bit-identical
    trajectories.

    :rtype: Trajectory
    """
    return Simulation(config, state0).run(config.duration, controller=controller, sensor=sensor, drives=drives)


def ring_up_energy(n0: float, decoherence_rate: float, t: float) -> float:
    """
    Expected occupation n0 + Gamma_th t of a mode reheating from its bath after feedback stops.

    :param n0: initial occupation [phonons]
    :type n0: float
    :param decoherence_rate: thermal decoherence rate Gamma_th = n_th gamma [1/s]
    :type decoherence_rate: float
    :param t: time since feedback stopped [s]
    :type t: float
    :rtype: float
    """
    check_non_negative(n0, "ring_up_energy", "n0")
    check_non_negative(decoherence_rate, "ring_up_energy", "decoherence_rate")
    return n0 + decoherence_rate * t

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Feedback controllers and the radial cooling stages built on them.

Two controller families exist: the bandpass velocity feedback used on the intensity and
interferometric readouts, and the pulsed quadrant feedback driven by camera snapshots.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy import signal

from maglev_twin.model.Mechanics import OscillatorMode
from maglev_twin.model.Optics import BeamProfile
from maglev_twin.simulation.Dynamics import Sensor, Simulation, Trajectory
from maglev_twin.simulation.Sensing import CameraSpec, IntensitySensor, camera_snapshot
from maglev_twin.util.Exceptions import AntiDampingError
from maglev_twin.util.ValidityChecks import check_finite, check_non_negative, check_positive, check_range

logger = logging.getLogger(__name__)

ANTI_DAMPING_PERIODS = 10
ANTI_DAMPING_GROWTH = 1.1


@dataclass(frozen=True)
class BandpassFeedback:
    """
    Bandpass-filtered feedback with a phase shift applied at the centre frequency. A phase of
    +pi/2 turns the filtered displacement into the cold-damping force -m gamma_fb v.

    :ivar gamma_fb: feedback damping rate [rad/s]
    :ivar phase: phase shift at the centre frequency [rad]
    :ivar force_limit: hard clip of the output force [N]
    """
    center_frequency: float
    bandwidth: float
    gamma_fb: float
    phase: float = math.pi / 2
    force_limit: float = 1e-9
    enabled: bool = True

    def __post_init__(self):
        check_positive(self.center_frequency, "BandpassFeedback", "center_frequency")
        check_positive(self.bandwidth, "BandpassFeedback", "bandwidth")
        check_non_negative(self.gamma_fb, "BandpassFeedback", "gamma_fb")
        check_finite(self.phase, "BandpassFeedback", "phase")
        check_positive(self.force_limit, "BandpassFeedback", "force_limit")
        check_finite(self.force_limit, "BandpassFeedback", "force_limit")

    @property
    def quality_factor(self) -> float:
        return self.center_frequency / self.bandwidth

    @property
    def active(self) -> bool:
        return self.enabled and self.gamma_fb > 0.0


class Biquad:
    """
    Second-order section in transposed direct form II. Numerator coefficients are ``a0..a2``,
    denominator coefficients ``b1, b2`` (the leading denominator coefficient is 1).
    """

    def __init__(self, a0: float, a1: float, a2: float, b1: float, b2: float):
        self.a0 = a0
        self.a1 = a1
        self.a2 = a2
        self.b1 = b1
        self.b2 = b2
        self.z1 = 0.0
        self.z2 = 0.0

    @classmethod
    def bandpass(cls, center_frequency: float, quality_factor: float, sample_rate: float) -> "Biquad":
        """
        Constant 0 dB peak gain bandpass: unity gain and zero phase at the centre frequency.

        :param center_frequency: centre frequency [Hz], below the Nyquist frequency
        :type center_frequency: float
        :param quality_factor: centre frequency / bandwidth
        :type quality_factor: float
        :param sample_rate: update rate [Hz]
        :type sample_rate: float
        :rtype: Biquad
        """
        check_positive(sample_rate, "Biquad", "sample_rate")
        check_positive(quality_factor, "Biquad", "quality_factor")
        check_range(center_frequency, 0.0, sample_rate / 2.0, "Biquad", "center_frequency")
        K = math.tan(math.pi * center_frequency / sample_rate)
        norm = 1.0 / (1.0 + K / quality_factor + K * K)
        a0 = K / quality_factor * norm
        return cls(a0, 0.0, -a0, 2.0 * (K * K - 1.0) * norm, (1.0 - K / quality_factor + K * K) * norm)

    def compute(self, value: float) -> float:
        out = value * self.a0 + self.z1
        self.z1 = value * self.a1 + self.z2 - self.b1 * out
        self.z2 = value * self.a2 - self.b2 * out
        return out

    def reset(self):
        self.z1 = 0.0
        self.z2 = 0.0

    def frequency_response(self, frequencies, sample_rate: float) -> np.ndarray:
        """
        Complex response at the given frequencies [Hz].
        """
        _, response = signal.freqz([self.a0, self.a1, self.a2], [1.0, self.b1, self.b2],
                                   worN=np.atleast_1d(np.asarray(frequencies, dtype=float)), fs=sample_rate)
        return response


class BandpassController:
    """
    Feedback hook for :class:`Simulation`. Filters one measurement channel, estimates the quadrature
    from two consecutive filter outputs and applies
    F = -m gamma_fb omega_c (cos(theta) y + sin(theta) y_q), clipped to the force limit.
    """

    def __init__(self, feedback: BandpassFeedback, mode: OscillatorMode, sample_rate: float, axis: str = "z",
                 channel: int = 0, delay_samples: int = 0):
        """
        Constructor

        :param feedback: filter and gain settings
        :type feedback: BandpassFeedback
        :param mode: controlled mode, only its mass is used
        :type mode: OscillatorMode
        :param sample_rate: controller update rate [Hz]
        :type sample_rate: float
        :param axis: axis receiving the force
        :type axis: str
        :param channel: index of the measurement entry to filter
        :type channel: int
        :param delay_samples: loop latency in samples, compensated in the phase shift
        :type delay_samples: int
        """
        self.__feedback = feedback
        self.__mass = mode.mass
        self.__axis = axis
        self.__channel = channel
        self.__biquad = Biquad.bandpass(feedback.center_frequency, feedback.quality_factor, sample_rate)
        omega_c = 2.0 * math.pi * feedback.center_frequency
        self.__step_phase = omega_c / sample_rate
        if math.sin(self.__step_phase) == 0.0:
            raise ValueError(f"The BandpassController:sample_rate must not be a multiple of twice the centre "
                             f"frequency. Was {sample_rate}")
        theta = feedback.phase + delay_samples * self.__step_phase
        self.__scale = -self.__mass * feedback.gamma_fb * omega_c if feedback.active else 0.0
        self.__cos = math.cos(theta)
        self.__sin = math.sin(theta)
        self.__previous = 0.0
        self.__clipped = 0

    def get_feedback(self) -> BandpassFeedback:
        return self.__feedback

    def get_biquad(self) -> Biquad:
        return self.__biquad

    def get_clip_count(self) -> int:
        return self.__clipped

    def update(self, t: float, measurement: np.ndarray) -> Mapping[str, float]:
        y = self.__biquad.compute(float(measurement[self.__channel]))
        quadrature = (y * math.cos(self.__step_phase) - self.__previous) / math.sin(self.__step_phase)
        self.__previous = y
        force = self.__scale * (self.__cos * y + self.__sin * quadrature)
        limit = self.__feedback.force_limit
        if abs(force) > limit:
            force = math.copysign(limit, force)
            self.__clipped += 1
        return {self.__axis: force}

    def flush_warnings(self, label: str):
        if self.__clipped:
            logger.warning("%s: feedback force clipped to %s N in %d updates", label,
                           self.__feedback.force_limit, self.__clipped)
            self.__clipped = 0


@dataclass(frozen=True)
class PulsedQuadrantFeedback:
    """
    Camera-based kick feedback. ``separation`` is the time between the two snapshots and ``wait``
    the delay from the second snapshot to the kick, both in radial periods. Kicks are integer
    multiples of ``impulse``.
    """
    impulse: float
    separation: float = 0.2
    wait: float = 2.0
    iterations: int = 25
    camera: CameraSpec = field(default_factory=lambda: CameraSpec(0.3e-6, 100e-9))
    enabled: bool = True

    def __post_init__(self):
        check_positive(self.impulse, "PulsedQuadrantFeedback", "impulse")
        check_finite(self.impulse, "PulsedQuadrantFeedback", "impulse")
        if not 0.0 < self.separation < 0.5:
            raise ValueError(f"The PulsedQuadrantFeedback:separation must be in (0, 0.5) periods. "
                             f"Was {self.separation}")
        check_non_negative(self.wait, "PulsedQuadrantFeedback", "wait")
        if not isinstance(self.iterations, int) or self.iterations < 0:
            raise TypeError(f"The PulsedQuadrantFeedback:iterations must be a non-negative int. Was {self.iterations}")


@dataclass(frozen=True)
class AmplitudeHistory:
    """
    Amplitude record of one cooling stage. ``amplitudes`` holds one value per iteration (camera) or
    per oscillation period (continuous feedback).
    """
    stage: str
    times: np.ndarray
    amplitudes: np.ndarray
    initial: float
    final: float
    trajectory: Optional[Trajectory] = None
    details: Dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def decay_rate(self) -> float:
        """
        Energy damping rate from a straight-line fit of ln(amplitude) over the record [1/s].
        """
        positive = self.amplitudes > 0
        if np.count_nonzero(positive) < 2:
            raise ValueError("The AmplitudeHistory:amplitudes must contain two positive values for a fit")
        slope, _ = np.polyfit(self.times[positive], np.log(self.amplitudes[positive]), 1)
        return float(-2.0 * slope)


def radial_rms(sim: Simulation, axes: Sequence[str] = ("x", "y")) -> float:
    """
    RMS radial displacement over one period, sqrt(sum A_i^2 / 2), of the current state.
    """
    state = sim.get_state()
    total = 0.0
    for axis in axes:
        index = sim.get_axes().index(axis)
        omega = sim.get_mode(axis).omega0
        total += state.position[index] ** 2 + (state.velocity[index] / omega) ** 2
    return math.sqrt(total / 2.0)


def period_amplitudes(trajectory: Trajectory, axis: str, mode: OscillatorMode) -> np.ndarray:
    """
    Amplitude sqrt(2) * rms of the displacement for each complete oscillation period.
    """
    samples = max(int(round(trajectory.sample_rate / mode.f0)), 1)
    x = trajectory.position(axis)
    periods = len(x) // samples
    if periods == 0:
        return np.empty(0)
    blocks = x[:periods * samples].reshape(periods, samples)
    return np.sqrt(2.0 * np.mean(blocks ** 2, axis=1))


def check_anti_damping(amplitudes: Sequence[float], periods: int = ANTI_DAMPING_PERIODS,
                       growth: float = ANTI_DAMPING_GROWTH, label: str = "feedback"):
    """
    :raises AntiDampingError: if the last ``periods`` amplitudes grew monotonically by more than
        the factor ``growth``
    """
    if len(amplitudes) <= periods:
        return
    window = np.asarray(amplitudes[-(periods + 1):], dtype=float)
    if np.all(np.diff(window) > 0.0) and window[-1] > growth * window[0]:
        raise AntiDampingError(f"anti-damping detected in {label}: amplitude grew monotonically from "
                               f"{window[0]} m to {window[-1]} m over {periods} periods; check the feedback phase")


def _predict(position: float, velocity: float, omega: float, elapsed: float):
    c, s = math.cos(omega * elapsed), math.sin(omega * elapsed)
    return position * c + velocity / omega * s, velocity * c - omega * position * s


def run_pulsed_camera_cooling(sim: Simulation, cfg: PulsedQuadrantFeedback,
                              rng: Optional[np.random.Generator] = None) -> AmplitudeHistory:
    """
    Camera kick cooling of the radial motion. Each iteration takes two snapshots ``separation``
    periods apart, estimates the velocity at the second one, propagates it over the waiting time and
    kicks against it with an integer number of impulse quanta. A coordinate whose estimated velocity
    is exactly zero is not kicked.

    :param sim: simulation handle with both radial axes
    :type sim: Simulation
    :param cfg: kick feedback settings
    :type cfg: PulsedQuadrantFeedback
    :param rng: generator for the centroid noise, spawned from the simulation when omitted
    :type rng: numpy.random.Generator or None
    :raises ParticleLostError: if the particle leaves the camera field of view
    :return: RMS radial amplitude after each iteration
    :rtype: AmplitudeHistory
    """
    axes = sim.get_axes()
    for axis in ("x", "y"):
        if axis not in axes:
            raise ValueError(f"The Simulation:axes must contain the radial axis {axis}. Was {axes}")
    rng = rng if rng is not None else sim.spawn_rng()
    camera = cfg.camera
    indices = [axes.index("x"), axes.index("y")]
    omegas = [sim.get_mode("x").omega0, sim.get_mode("y").omega0]
    period = 2.0 * math.pi / omegas[0]

    initial = radial_rms(sim)
    logger.info("Camera stage: initial radial rms amplitude %s m", initial)
    times: List[float] = []
    amplitudes: List[float] = []
    kicks = 0
    iterations = cfg.iterations if cfg.enabled else 0
    for iteration in range(iterations):
        state = sim.get_state()
        first = camera_snapshot([state.position[i] for i in indices], camera.pixel_pitch, camera.centroid_noise,
                                rng, camera.field_of_view, state.t)
        sim.run(cfg.separation * period)
        state = sim.get_state()
        second = camera_snapshot([state.position[i] for i in indices], camera.pixel_pitch, camera.centroid_noise,
                                 rng, camera.field_of_view, state.t)
        sim.run(cfg.wait * period)
        elapsed = sim.get_state().t - second.t
        separation = second.t - first.t

        impulses = {}
        for k, axis in enumerate(("x", "y")):
            omega = omegas[k]
            p1, p2 = first.position[k], second.position[k]
            velocity = omega * (p2 * math.cos(omega * separation) - p1) / math.sin(omega * separation)
            _, predicted = _predict(p2, velocity, omega, elapsed)
            if predicted == 0.0:
                continue
            quanta = round(sim.get_mode(axis).mass * abs(predicted) / cfg.impulse)
            if quanta:
                impulses[axis] = -math.copysign(quanta * cfg.impulse, predicted)
                kicks += quanta
        sim.kick(impulses)
        times.append(sim.get_state().t)
        amplitudes.append(radial_rms(sim))
        logger.debug("Camera iteration %d: quadrant %s, impulses %s, rms %s m", iteration, second.quadrant,
                     impulses, amplitudes[-1])

    final = amplitudes[-1] if amplitudes else initial
    logger.info("Camera stage: final radial rms amplitude %s m after %d iterations", final, iterations)
    return AmplitudeHistory("camera", np.array(times), np.array(amplitudes), initial, final,
                            details={"kick_quanta": float(kicks)})


def run_continuous_feedback(sim: Simulation, controller: BandpassController, sensor: Optional[Sensor],
                            duration: float, axis: str, label: str, check_periods: int = ANTI_DAMPING_PERIODS,
                            final_window: float = 0.2) -> AmplitudeHistory:
    """
    Runs a continuous feedback loop in segments of ``check_periods`` periods, checking for
    anti-damping after each segment. The final amplitude is the sqrt(2) * rms displacement over the
    last ``final_window`` fraction of the run.

    :raises AntiDampingError: on monotone amplitude growth
    :rtype: AmplitudeHistory
    """
    check_positive(duration, "run_continuous_feedback", "duration")
    check_range(final_window, 0.0, 1.0, "run_continuous_feedback", "final_window")
    mode = sim.get_mode(axis)
    segment = check_periods / mode.f0
    remaining = duration
    pieces: List[Trajectory] = []
    amplitudes: List[float] = []
    times: List[float] = []
    checking = controller.get_feedback().active
    while remaining > 1e-12:
        length = min(segment, remaining)
        piece = sim.run(length, controller=controller, sensor=sensor)
        remaining -= length
        if len(piece) == 0:
            break
        pieces.append(piece)
        block = period_amplitudes(piece, axis, mode)
        amplitudes.extend(block.tolist())
        samples = max(int(round(piece.sample_rate / mode.f0)), 1)
        times.extend((piece.times[0] + (np.arange(len(block)) + 0.5) * samples / piece.sample_rate).tolist())
        if checking:
            check_anti_damping(amplitudes, check_periods, label=label)
    controller.flush_warnings(label)
    trajectory = _concatenate(pieces)
    x = trajectory.position(axis)
    initial = amplitudes[0] if amplitudes else 0.0
    tail = x[int(len(x) * (1.0 - final_window)):] if len(x) else x
    final = float(math.sqrt(2.0 * np.mean(tail ** 2))) if len(tail) else initial
    logger.info("%s: %s amplitude %s m -> %s m", label, axis, initial, final)
    return AmplitudeHistory(label, np.array(times), np.array(amplitudes), initial, final, trajectory,
                            details={"clipped_updates": float(controller.get_clip_count())})


def _concatenate(pieces: Sequence[Trajectory]) -> Trajectory:
    first = pieces[0]
    measurements = None
    if first.measurements is not None:
        measurements = np.concatenate([piece.measurements for piece in pieces])
    return Trajectory(np.concatenate([piece.times for piece in pieces]),
                      np.concatenate([piece.positions for piece in pieces]),
                      np.concatenate([piece.velocities for piece in pieces]),
                      np.concatenate([piece.forces for piece in pieces]),
                      first.axes, measurements, dict(first.metadata))


def run_intensity_cooling(sim: Simulation, profile: BeamProfile, fb: BandpassFeedback, duration: float = 20.0,
                          axis: str = "x", rng: Optional[np.random.Generator] = None) -> AmplitudeHistory:
    """
    Radial cooling on the sum-channel intensity. The beam must place the trap centre on a slope of
    the Gaussian profile along ``axis``. Only that one radial axis is damped: the sum channel sees a
    single slope, so the other radial axis keeps its amplitude and the returned history, including
    ``final``, describes ``axis`` alone. The scenario picks the axis with ``intensity_feedback.axis``.

    :param sim: simulation handle with both radial axes
    :type sim: Simulation
    :param profile: reflected-intensity profile
    :type profile: BeamProfile
    :param fb: bandpass feedback around the radial frequency
    :type fb: BandpassFeedback
    :param duration: stage length [s]
    :type duration: float
    :param axis: the radial axis that is sensed and damped
    :type axis: str
    :raises AntiDampingError: on monotone amplitude growth over ten periods
    :rtype: AmplitudeHistory
    """
    config = sim.get_config()
    rng = rng if rng is not None else sim.spawn_rng()
    sensor = IntensitySensor(profile, 1.0 / config.sample_rate, rng, sim.get_axes(), axis)
    controller = BandpassController(fb, sim.get_mode(axis), config.sample_rate, axis=axis,
                                    delay_samples=config.latency)
    return run_continuous_feedback(sim, controller, sensor, duration, axis, "intensity")

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Optical measurement models.

* Balanced homodyne readout of the axial position. The two detector ports see the signal flux
  ``n_det`` interfering with a local oscillator of flux ``n_lo``; the expected port counts are
  (N_lo + N_s)/2 +- sqrt(N_lo N_s) sin(phi) with phi = 4 pi z / lambda + phase_ref + roughness.
* A stationary exponentially correlated apparent-displacement process for the surface roughness
  of the rotating sphere.
* Sum-channel intensity readout of the radial position on the slope of a Gaussian profile.
* Idealised camera centroids.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from maglev_twin.model.Mechanics import CONSTANTS, OscillatorMode
from maglev_twin.model.Optics import BeamProfile, LaserSpec
from maglev_twin.util.Exceptions import ParticleLostError, UnsatisfiableConditionError
from maglev_twin.util.ValidityChecks import check_non_negative, check_positive

logger = logging.getLogger(__name__)

GAUSSIAN_THRESHOLD = 1000.0
DEFAULT_FLOOR = 955e-12
RANDOM_CHUNK = 8192
# largest allowed ratio of the roughness PSD across the band around the axial frequency
FLATNESS_LIMIT = 2.0


@dataclass(frozen=True)
class DetectorRecord:
    """
    Counts of one detector bin. ``count_sum`` carries intensity, ``count_diff`` phase.
    """
    t: float
    count_sum: float
    count_diff: float
    bin_width: float

    def __post_init__(self):
        check_positive(self.bin_width, "DetectorRecord", "bin_width")
        check_non_negative(self.count_sum, "DetectorRecord", "count_sum")
        if abs(self.count_diff) > self.count_sum:
            raise ValueError(f"The DetectorRecord:count_diff must not exceed count_sum ({self.count_sum}) "
                             f"in magnitude. Was {self.count_diff}")


@dataclass(frozen=True)
class NoiseBudget:
    """
    Two-sided noise PSDs of a measurement. ``S_excess`` is the imprecision beyond shot noise.
    """
    S_xx_imp: float
    S_Fba: float
    S_excess: float
    S_Fth: float
    eta_det: float = 1.0

    def __post_init__(self):
        for name in ("S_xx_imp", "S_Fba", "S_excess", "S_Fth"):
            check_non_negative(getattr(self, name), "NoiseBudget", name)
        check_positive(self.eta_det, "NoiseBudget", "eta_det")
        if self.eta_det > 1.0:
            raise ValueError(f"The NoiseBudget:eta_det must be at most 1. Was {self.eta_det}")

    @property
    def S_FN(self) -> float:
        """
        Total force noise acting on the particle [N^2/Hz].
        """
        return self.S_Fth + self.S_Fba

    @property
    def S_sigma(self) -> float:
        """
        Total measurement imprecision including detection losses [m^2/Hz].
        """
        return self.S_xx_imp / self.eta_det + self.S_excess

    @classmethod
    def free_space(cls, laser: LaserSpec, mode: OscillatorMode, temperature: float,
                   excess_asd: float = 0.0) -> "NoiseBudget":
        """
        Budget of the free-space interferometer.

        :param excess_asd: one-sided excess imprecision floor [m/sqrt(Hz)]
        :type excess_asd: float
        """
        S_xx_imp, S_Fba = imprecision_backaction(laser.wavenumber, laser.n_in)
        S_Fth = 2.0 * mode.gamma * mode.mass * CONSTANTS.kB * temperature
        return cls(S_xx_imp, S_Fba, excess_asd ** 2 / 2.0, S_Fth, laser.detection_efficiency)


def displacement_phase(z: float, wavelength: float) -> float:
    """
    Reflection-geometry phase 4 pi z / lambda; lambda/8 maps onto pi/2.
    """
    return 4.0 * math.pi * z / wavelength


def shot_noise_psd(wavelength: float, n_det: float) -> float:
    """
    Two-sided shot-noise displacement PSD lambda^2 / (64 pi^2 n_det).

    :param wavelength: laser wavelength [m]
    :type wavelength: float
    :param n_det: detected photon flux [1/s]
    :type n_det: float
    :raises ValueError: for a non-positive flux
    :return: PSD [m^2/Hz]
    :rtype: float
    """
    check_positive(wavelength, "shot_noise_psd", "wavelength")
    check_positive(n_det, "shot_noise_psd", "n_det")
    return wavelength ** 2 / (64.0 * math.pi ** 2 * n_det)


def imprecision_backaction(wavenumber: float, n_in: float) -> Tuple[float, float]:
    """
    Photon imprecision 1/(16 k^2 n_in) and back-action 4 hbar^2 k^2 n_in. Their product is the
    standard quantum limit hbar^2/4.

    :return: (S_xx_imp [m^2/Hz], S_Fba [N^2/Hz])
    :rtype: tuple
    """
    check_positive(wavenumber, "imprecision_backaction", "wavenumber")
    check_positive(n_in, "imprecision_backaction", "n_in")
    return 1.0 / (16.0 * wavenumber ** 2 * n_in), 4.0 * CONSTANTS.hbar ** 2 * wavenumber ** 2 * n_in


def _draw_counts(mean: float, rng: np.random.Generator, gaussian_threshold: float,
                 normal: Optional[float] = None) -> float:
    if mean > gaussian_threshold:
        deviate = rng.standard_normal() if normal is None else normal
        return float(max(round(mean + math.sqrt(mean) * deviate), 0))
    return float(rng.poisson(max(mean, 0.0)))


def interferometer_counts(z: float, phase_ref: float, laser: LaserSpec, roughness_phase: float, bin_width: float,
                          rng: np.random.Generator, t: float = 0.0,
                          gaussian_threshold: float = GAUSSIAN_THRESHOLD) -> DetectorRecord:
    """
    Draws the counts of both homodyne ports for one bin.

    :param z: axial displacement [m]
    :type z: float
    :param phase_ref: reference phase of the local oscillator [rad]
    :type phase_ref: float
    :param laser: the probe laser
    :type laser: LaserSpec
    :param roughness_phase: instantaneous roughness phase [rad]
    :type roughness_phase: float
    :param bin_width: counting bin [s]
    :type bin_width: float
    :param rng: random generator
    :type rng: numpy.random.Generator
    :param t: time stamp of the bin [s]
    :type t: float
    :param gaussian_threshold: expected counts per port above which the Poisson draw is replaced by
        its Gaussian limit
    :type gaussian_threshold: float
    :rtype: DetectorRecord
    """
    check_positive(bin_width, "interferometer_counts", "bin_width")
    plus, minus = expected_port_counts(displacement_phase(z, laser.wavelength) + phase_ref + roughness_phase,
                                       laser, bin_width)
    n_plus = _draw_counts(plus, rng, gaussian_threshold)
    n_minus = _draw_counts(minus, rng, gaussian_threshold)
    return DetectorRecord(t, n_plus + n_minus, n_plus - n_minus, bin_width)


def expected_port_counts(phase: float, laser: LaserSpec, bin_width: float) -> Tuple[float, float]:
    """
    :return: expected counts of the (+, -) ports for the total optical phase
    :rtype: tuple
    """
    signal = laser.n_det * bin_width
    reference = laser.n_lo * bin_width
    interference = math.sqrt(signal * reference) * math.sin(phase)
    mean = 0.5 * (signal + reference)
    return mean + interference, mean - interference


def fringe_contrast(laser: LaserSpec, bin_width: float) -> float:
    """
    Half the peak-to-peak excursion of ``count_diff``, 2 sqrt(N_lo N_s).
    """
    return 2.0 * math.sqrt(laser.n_det * laser.n_lo) * bin_width


def homodyne_shot_noise_psd(laser: LaserSpec) -> float:
    """
    Shot-noise floor of the homodyne readout including the finite local oscillator,
    lambda^2 / (64 pi^2 n_det) * (1 + n_det / n_lo).
    """
    return shot_noise_psd(laser.wavelength, laser.n_det) * (1.0 + laser.n_det / laser.n_lo)


class HomodyneDetector:
    """
    Fast single-owner homodyne detector used inside the simulation loop. Gaussian deviates are
    drawn in chunks.
    """

    def __init__(self, laser: LaserSpec, bin_width: float, rng: np.random.Generator,
                 gaussian_threshold: float = GAUSSIAN_THRESHOLD):
        """
        Constructor

        :param laser: the probe laser
        :type laser: LaserSpec
        :param bin_width: counting bin [s]
        :type bin_width: float
        :param rng: random generator owned by this detector
        :type rng: numpy.random.Generator
        """
        check_positive(bin_width, "HomodyneDetector", "bin_width")
        self.__laser = laser
        self.__bin_width = bin_width
        self.__rng = rng
        self.__threshold = gaussian_threshold
        self.__signal = laser.n_det * bin_width
        self.__reference = laser.n_lo * bin_width
        self.__mean = 0.5 * (self.__signal + self.__reference)
        self.__amplitude = math.sqrt(self.__signal * self.__reference)
        self.__gaussian = self.__mean - self.__amplitude > gaussian_threshold
        self.__normals: list = []
        self.__index = 0

    def get_laser(self) -> LaserSpec:
        return self.__laser

    def get_bin_width(self) -> float:
        return self.__bin_width

    def get_contrast(self) -> float:
        return 2.0 * self.__amplitude

    def counts(self, phase: float) -> Tuple[float, float]:
        """
        :param phase: total optical phase [rad]
        :type phase: float
        :return: (count_sum, count_diff)
        :rtype: tuple
        """
        interference = self.__amplitude * math.sin(phase)
        plus = self.__mean + interference
        minus = self.__mean - interference
        if self.__gaussian:
            if self.__index + 2 > len(self.__normals):
                self.__normals = self.__rng.standard_normal(RANDOM_CHUNK).tolist()
                self.__index = 0
            n_plus = float(max(round(plus + math.sqrt(plus) * self.__normals[self.__index]), 0))
            n_minus = float(max(round(minus + math.sqrt(minus) * self.__normals[self.__index + 1]), 0))
            self.__index += 2
        else:
            n_plus = float(self.__rng.poisson(plus))
            n_minus = float(self.__rng.poisson(minus))
        return n_plus + n_minus, n_plus - n_minus

    def normalized_error(self, count_diff: float) -> float:
        """
        Difference counts in units of the fringe contrast, sin(phase) on average.
        """
        return count_diff / (2.0 * self.__amplitude)

    def record(self, t: float, phase: float) -> DetectorRecord:
        count_sum, count_diff = self.counts(phase)
        return DetectorRecord(t, count_sum, count_diff, self.__bin_width)


class RoughnessProcess:
    """
    Zero-mean stationary Ornstein-Uhlenbeck apparent displacement with standard deviation
    ``amplitude`` and correlation time ``correlation_time``. Its two-sided PSD is
    2 sigma^2 tau / (1 + (2 pi f tau)^2).
    """

    def __init__(self, amplitude: float, correlation_time: float, rng: Optional[np.random.Generator] = None):
        check_non_negative(amplitude, "RoughnessProcess", "amplitude")
        check_positive(correlation_time, "RoughnessProcess", "correlation_time")
        self.__amplitude = amplitude
        self.__tau = correlation_time
        self.__rng = rng if rng is not None else np.random.default_rng(0)
        self.__value = self.__amplitude * self.__rng.standard_normal() if amplitude > 0 else 0.0
        self.__normals: list = []
        self.__index = 0
        self.__dt = None
        self.__decay = 0.0
        self.__kick = 0.0

    def get_amplitude(self) -> float:
        return self.__amplitude

    def get_correlation_time(self) -> float:
        return self.__tau

    def psd(self, frequency) -> np.ndarray:
        """
        Two-sided PSD [m^2/Hz] at the given ordinary frequencies.
        """
        f = np.asarray(frequency, dtype=float)
        return 2.0 * self.__amplitude ** 2 * self.__tau / (1.0 + (2.0 * math.pi * f * self.__tau) ** 2)

    def asd(self, frequency) -> np.ndarray:
        """
        One-sided amplitude spectral density [m/sqrt(Hz)].
        """
        return np.sqrt(2.0 * self.psd(frequency))

    def flatness(self, band: Tuple[float, float]) -> float:
        """
        Ratio of the PSD at the lower to the upper edge of ``band`` [Hz]. The PSD decreases
        monotonically, so this is its largest variation inside the band.
        """
        if self.__amplitude == 0.0:
            return 1.0
        low, high = band
        return float(self.psd(low) / self.psd(high))

    def step(self, dt: float) -> float:
        """
        Advances the process by ``dt`` with the exact OU update and returns the new value [m].
        """
        if self.__amplitude == 0.0:
            return 0.0
        if dt != self.__dt:
            self.__dt = dt
            self.__decay = math.exp(-dt / self.__tau)
            self.__kick = self.__amplitude * math.sqrt(1.0 - self.__decay ** 2)
        if self.__index >= len(self.__normals):
            self.__normals = self.__rng.standard_normal(RANDOM_CHUNK).tolist()
            self.__index = 0
        self.__value = self.__value * self.__decay + self.__kick * self.__normals[self.__index]
        self.__index += 1
        return self.__value

    def sample(self, n: int, dt: float) -> np.ndarray:
        """
        :return: ``n`` consecutive values spaced by ``dt`` [m]
        :rtype: numpy.ndarray
        """
        return np.array([self.step(dt) for _ in range(n)])

    def phase(self, dt: float, wavelength: float) -> float:
        """
        Advances the process and returns the corresponding optical phase [rad].
        """
        return displacement_phase(self.step(dt), wavelength)


def roughness_correlation_time(target_asd: float, amplitude: float, reference_frequency: float) -> float:
    """
    Shortest correlation time whose one-sided floor at ``reference_frequency`` equals
    ``target_asd`` for the given process amplitude.

    :raises UnsatisfiableConditionError: if the amplitude is too small to reach the target
    """
    omega = 2.0 * math.pi * reference_frequency
    # a^2 w^2 tau^2 - 4 sigma^2 tau + a^2 = 0
    a2 = target_asd ** 2
    discriminant = 16.0 * amplitude ** 4 - 4.0 * a2 * a2 * omega ** 2
    if discriminant < 0.0:
        raise UnsatisfiableConditionError(
            f"A roughness amplitude of {amplitude} m cannot produce a floor of {target_asd} m/sqrt(Hz) "
            f"at {reference_frequency} Hz")
    if omega == 0.0:
        return a2 / (4.0 * amplitude ** 2)
    return (4.0 * amplitude ** 2 - math.sqrt(discriminant)) / (2.0 * a2 * omega ** 2)


def roughness_excess_noise(sigma_r: float, rotation_rate: Optional[float], correlation_length: float,
                           radius: float, rng: Optional[np.random.Generator] = None,
                           target_asd: float = DEFAULT_FLOOR, reference_frequency: float = 160.0) -> RoughnessProcess:
    """
    Builds the roughness apparent-displacement process of a rotating sphere.

    With a known rotation rate the correlation time is correlation_length / (radius * rotation_rate)
    and the amplitude is calibrated so that the one-sided floor at ``reference_frequency`` equals
    ``target_asd``. Without a rotation rate the amplitude is the surface roughness itself and the
    correlation time is solved for instead. ``sigma_r = 0`` yields an identically zero process.

    :param sigma_r: rms surface roughness [m]
    :type sigma_r: float
    :param rotation_rate: rotation rate of the sphere [rad/s], or None
    :type rotation_rate: float or None
    :param correlation_length: lateral correlation length of the roughness [m]
    :type correlation_length: float
    :param radius: sphere radius [m]
    :type radius: float
    :rtype: RoughnessProcess
    """
    check_non_negative(sigma_r, "roughness_excess_noise", "sigma_r")
    check_positive(correlation_length, "roughness_excess_noise", "correlation_length")
    check_positive(radius, "roughness_excess_noise", "radius")
    check_positive(target_asd, "roughness_excess_noise", "target_asd")
    check_non_negative(reference_frequency, "roughness_excess_noise", "reference_frequency")
    if sigma_r == 0.0:
        return RoughnessProcess(0.0, 1.0, rng)

    if rotation_rate is None:
        tau = roughness_correlation_time(target_asd, sigma_r, reference_frequency)
        amplitude = sigma_r
        logger.debug("Roughness correlation time %s s implies a rotation rate of %s rad/s",
                     tau, correlation_length / (radius * tau))
    else:
        check_positive(rotation_rate, "roughness_excess_noise", "rotation_rate")
        tau = correlation_length / (radius * rotation_rate)
        knee = 1.0 + (2.0 * math.pi * reference_frequency * tau) ** 2
        amplitude = target_asd * math.sqrt(knee) / (2.0 * math.sqrt(tau))
    return RoughnessProcess(amplitude, tau, rng)


def intensity_counts(radial_pos: Sequence[float], profile: BeamProfile, bin_width: float,
                     rng: np.random.Generator, gaussian_threshold: float = GAUSSIAN_THRESHOLD) -> float:
    """
    Sum-channel counts for one bin, Poisson distributed around peak * profile(r) * bin.

    :param radial_pos: particle position (x, y) [m]
    :type radial_pos: Sequence[float]
    :rtype: float
    """
    check_positive(bin_width, "intensity_counts", "bin_width")
    mean = profile.flux(radial_pos[0], radial_pos[1]) * bin_width
    return _draw_counts(mean, rng, gaussian_threshold)


def inflection_relative_slope(profile: BeamProfile) -> float:
    """
    Relative count slope (dN/dx)/N at the inflection point of the profile, 1/sigma [1/m].
    """
    return 1.0 / profile.sigma


class IntensitySensor:
    """
    Linearised radial position estimate from the sum channel,
    x_est = (N - N_0) / (dN/dx at the trap centre), along one radial axis.
    """

    def __init__(self, profile: BeamProfile, bin_width: float, rng: np.random.Generator, axes: Sequence[str],
                 axis: str = "x", gaussian_threshold: float = GAUSSIAN_THRESHOLD):
        check_positive(bin_width, "IntensitySensor", "bin_width")
        if axis not in ("x", "y"):
            raise ValueError(f"The IntensitySensor:axis must be a radial axis. Was {axis}")
        self.__profile = profile
        self.__bin_width = bin_width
        self.__rng = rng
        self.__threshold = gaussian_threshold
        self.__ix = list(axes).index("x")
        self.__iy = list(axes).index("y")
        gradient = profile.flux_gradient(0.0, 0.0)
        self.__slope = (gradient[0] if axis == "x" else gradient[1]) * bin_width
        if self.__slope == 0.0:
            raise ValueError("The IntensitySensor:profile must place the trap centre on a slope of the beam")
        self.__baseline = profile.flux(0.0, 0.0) * bin_width

    def get_slope(self) -> float:
        """
        Counts per bin per metre at the trap centre.
        """
        return self.__slope

    def measure(self, t: float, positions: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        counts = intensity_counts((positions[self.__ix], positions[self.__iy]), self.__profile,
                                  self.__bin_width, self.__rng, self.__threshold)
        return np.array([(counts - self.__baseline) / self.__slope])


@dataclass(frozen=True)
class CameraSpec:
    """
    Idealised camera: centroids are quantised to the pixel pitch, blurred by Gaussian centroid
    noise and exactly calibrated. ``field_of_view`` is the full width of the square image [m].
    """
    pixel_pitch: float
    centroid_noise: float
    field_of_view: float = 200e-6

    def __post_init__(self):
        check_positive(self.pixel_pitch, "CameraSpec", "pixel_pitch")
        check_non_negative(self.centroid_noise, "CameraSpec", "centroid_noise")
        check_positive(self.field_of_view, "CameraSpec", "field_of_view")


@dataclass(frozen=True)
class CameraSnapshot:
    """
    Centroid of one frame in pixel coordinates relative to the trap centre.
    """
    t: float
    pixels: Tuple[float, float]
    pixel_pitch: float

    @property
    def position(self) -> Tuple[float, float]:
        return self.pixels[0] * self.pixel_pitch, self.pixels[1] * self.pixel_pitch

    @property
    def quadrant(self) -> Tuple[int, int]:
        """
        Signs of the centroid coordinates, 0 for a coordinate exactly on an axis.
        """
        return int(np.sign(self.pixels[0])), int(np.sign(self.pixels[1]))


def camera_snapshot(radial_pos: Sequence[float], pixel_pitch: float, centroid_noise: float,
                    rng: np.random.Generator, field_of_view: float = 200e-6, t: float = 0.0) -> CameraSnapshot:
    """
    Takes one camera frame of the particle.

    :param radial_pos: true position (x, y) [m]
    :type radial_pos: Sequence[float]
    :param pixel_pitch: object-plane pixel size [m]
    :type pixel_pitch: float
    :param centroid_noise: rms centroid error [m]
    :type centroid_noise: float
    :raises ParticleLostError: if the particle is outside the field of view
    :rtype: CameraSnapshot
    """
    check_positive(pixel_pitch, "camera_snapshot", "pixel_pitch")
    check_non_negative(centroid_noise, "camera_snapshot", "centroid_noise")
    half_width = field_of_view / 2.0
    if abs(radial_pos[0]) > half_width or abs(radial_pos[1]) > half_width:
        raise ParticleLostError(f"particle lost: position ({radial_pos[0]}, {radial_pos[1]}) m at t = {t} s is "
                                f"outside the {field_of_view} m field of view")
    pixels = []
    for coordinate in radial_pos[:2]:
        blurred = round(coordinate / pixel_pitch)
        if centroid_noise > 0.0:
            blurred += centroid_noise * rng.standard_normal() / pixel_pitch
        pixels.append(float(blurred))
    return CameraSnapshot(t, (pixels[0], pixels[1]), pixel_pitch)

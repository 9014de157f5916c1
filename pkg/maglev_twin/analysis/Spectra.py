# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Estimation and fitting on recorded time series: averaged periodograms, tone and noise-floor
extraction, ring-up fits and the probe-tone calibration of detector units.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal, stats

from maglev_twin.model.Mechanics import CONSTANTS, OscillatorMode, driven_response_amplitude
from maglev_twin.simulation.PhaseLock import MirrorCalibration
from maglev_twin.util.Exceptions import FitError
from maglev_twin.util.File import write_columns
from maglev_twin.util.ValidityChecks import check_non_negative, check_positive

logger = logging.getLogger(__name__)

SPECTRUM_HEADER = ("f_Hz", "asd_unit_per_sqrtHz")
PEAK_THRESHOLD = 10.0


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """
    One-sided power spectral density with the parameters it was estimated with.
    ``resolution_bandwidth`` is the equivalent noise bandwidth of one bin [Hz].
    """
    frequencies: np.ndarray
    psd: np.ndarray
    segments: int
    window: str
    resolution_bandwidth: float
    segment_length: int
    unit: str = "m"

    def __post_init__(self):
        if len(self.frequencies) != len(self.psd):
            raise ValueError(f"The SpectrumEstimate:psd must match the frequency grid. "
                             f"Was {len(self.psd)} for {len(self.frequencies)}")
        if np.any(self.psd < 0):
            raise ValueError("The SpectrumEstimate:psd must be non-negative")

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    @property
    def asd(self) -> np.ndarray:
        return np.sqrt(self.psd)

    def band(self, low: float, high: float) -> np.ndarray:
        """
        Boolean mask of the bins inside [low, high].
        """
        return (self.frequencies >= low) & (self.frequencies <= high)

    def total_power(self) -> float:
        return float(np.sum(self.psd) * self.bin_width)

    def scaled(self, factor: float) -> "SpectrumEstimate":
        """
        Spectrum of the series multiplied by ``factor``, e.g. detector units converted to metres.
        """
        return SpectrumEstimate(self.frequencies, self.psd * factor ** 2, self.segments, self.window,
                                self.resolution_bandwidth, self.segment_length, self.unit)

    def export(self, file_path: str) -> str:
        """
        Writes ``f_Hz,asd_unit_per_sqrtHz`` with the estimation parameters as header comments.
        """
        return write_columns(file_path, SPECTRUM_HEADER, [self.frequencies, self.asd], comments={
            "unit": self.unit,
            "window": self.window,
            "segments": self.segments,
            "segment_length": self.segment_length,
            "rbw_Hz": self.resolution_bandwidth,
        })


def estimate_psd(series: Sequence[float], sample_rate: float, segment_length: Optional[int] = None,
                 window: str = "hann", unit: str = "m") -> SpectrumEstimate:
    """
    Averaged modified periodogram with 50% overlap and window power compensation.

    :param series: uniformly sampled record
    :type series: Sequence[float]
    :param sample_rate: sampling rate [Hz]
    :type sample_rate: float
    :param segment_length: samples per segment, an eighth of the record when omitted
    :type segment_length: int or None
    :param window: window name understood by :func:`scipy.signal.get_window`
    :type window: str
    :raises ValueError: if the record is shorter than two segments
    :return: one-sided PSD in unit^2/Hz
    :rtype: SpectrumEstimate
    """
    check_positive(sample_rate, "estimate_psd", "sample_rate")
    data = np.asarray(series, dtype=float)
    if segment_length is None:
        segment_length = max(len(data) // 8, 2)
    if segment_length < 2 or len(data) < 2 * segment_length:
        raise ValueError(f"The series:length must cover at least two segments of {segment_length} samples. "
                         f"Was {len(data)}")
    overlap = segment_length // 2
    frequencies, psd = signal.welch(data, fs=sample_rate, window=window, nperseg=segment_length,
                                    noverlap=overlap, detrend="constant", scaling="density",
                                    return_onesided=True, average="mean")
    taper = signal.get_window(window, segment_length)
    enbw_bins = segment_length * np.sum(taper ** 2) / np.sum(taper) ** 2
    segments = (len(data) - segment_length) // (segment_length - overlap) + 1
    return SpectrumEstimate(frequencies, psd, segments, window, float(enbw_bins * sample_rate / segment_length),
                            segment_length, unit)


def tone_power(spectrum: SpectrumEstimate, frequency: float, half_width: float = 2.0) -> float:
    """
    Power of a tone integrated over +- ``half_width`` resolution bandwidths [unit^2].
    """
    span = half_width * spectrum.resolution_bandwidth
    mask = spectrum.band(frequency - span, frequency + span)
    if not np.any(mask):
        raise ValueError(f"The frequency:value must lie on the spectrum grid. Was {frequency}")
    return float(np.sum(spectrum.psd[mask]) * spectrum.bin_width)


def tone_rms(spectrum: SpectrumEstimate, frequency: float, half_width: float = 2.0) -> float:
    return math.sqrt(tone_power(spectrum, frequency, half_width))


def _peak_notch(spectrum: SpectrumEstimate, mask: np.ndarray, linewidths: float) -> Optional[Tuple[float, float]]:
    values = spectrum.psd[mask]
    if len(values) == 0:
        return None
    median = float(np.median(values))
    index_in_band = int(np.argmax(values))
    if median > 0.0 and values[index_in_band] < PEAK_THRESHOLD * median:
        return None
    indices = np.flatnonzero(mask)
    peak = indices[index_in_band]
    half = spectrum.psd[peak] / 2.0
    low = peak
    while low > 0 and spectrum.psd[low - 1] > half:
        low -= 1
    high = peak
    while high < len(spectrum.psd) - 1 and spectrum.psd[high + 1] > half:
        high += 1
    width = max((high - low + 1) * spectrum.bin_width, spectrum.resolution_bandwidth)
    centre = float(spectrum.frequencies[peak])
    return centre - linewidths * width, centre + linewidths * width


def noise_floor(spectrum: SpectrumEstimate, band: Tuple[float, float], peak: Optional[Tuple[float, float]] = None,
                linewidths: float = 3.0) -> float:
    """
    Robust one-sided amplitude spectral density sqrt(2 S) of the background in ``band``.

    The median of the averaged periodogram is divided by the median of its chi-square
    distribution to remove the median bias. A mechanical peak is notched out over +- ``linewidths``
    linewidths, either at the given (frequency, linewidth) or where the spectrum exceeds ten times
    its median.

    :param spectrum: estimated spectrum
    :type spectrum: SpectrumEstimate
    :param band: (low, high) [Hz]
    :type band: tuple
    :param peak: known (centre frequency, linewidth) [Hz], detected automatically when omitted
    :type peak: tuple or None
    :raises FitError: if no bin of the band remains outside the notch
    :return: floor [unit/sqrt(Hz)]
    :rtype: float
    """
    low, high = band
    if not low < high:
        raise ValueError(f"The band:limits must be increasing. Was {band}")
    mask = spectrum.band(low, high)
    if peak is not None:
        centre, width = peak
        width = max(width, spectrum.resolution_bandwidth)
        notch: Optional[Tuple[float, float]] = (centre - linewidths * width, centre + linewidths * width)
    else:
        notch = _peak_notch(spectrum, mask, linewidths)
    if notch is not None:
        mask &= ~spectrum.band(*notch)
    if not np.any(mask):
        raise FitError(f"noise floor: the band {band} Hz is fully occupied by the mechanical peak")
    dof = 2 * spectrum.segments
    bias = stats.chi2.median(dof) / dof
    return math.sqrt(float(np.median(spectrum.psd[mask])) / bias)


@dataclass(frozen=True)
class RingUpFit:
    """
    Linear reheating fit n(t) = n0 + rate * (t - t0) below the detected changepoint.
    ``changepoint`` is None when the record shows a single slope.
    """
    n0: float
    rate: float
    rate_stderr: float
    changepoint: Optional[float]
    t0: float
    r_squared: float


def _segment_rss(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    # residual sum of squares of a straight-line fit to every prefix of (t, y)
    n = np.arange(1, len(t) + 1, dtype=float)
    st, sy = np.cumsum(t), np.cumsum(y)
    stt, sty, syy = np.cumsum(t * t), np.cumsum(t * y), np.cumsum(y * y)
    with np.errstate(divide="ignore", invalid="ignore"):
        var_t = stt - st * st / n
        cov = sty - st * sy / n
        rss = syy - sy * sy / n - np.where(var_t > 0, cov * cov / var_t, 0.0)
    return np.maximum(rss, 0.0)


def detect_changepoint(times: np.ndarray, values: np.ndarray, min_fraction: float = 0.1,
                       improvement: float = 4.0, slope_change: float = 0.1) -> Optional[int]:
    """
    Two-segment piecewise-linear least squares. The break with the smallest total residual is
    accepted when it lowers the residual of a single line by the factor ``improvement`` and the two
    slopes differ by more than ``slope_change`` relative.

    :return: index of the first sample after the break, or None
    :rtype: int or None
    """
    n = len(times)
    edge = max(int(n * min_fraction), 3)
    if n < 2 * edge:
        return None
    t = times - times.mean()
    y = values - values.mean()
    prefix = _segment_rss(t, y)
    suffix = _segment_rss(t[::-1], y[::-1])[::-1]
    candidates = np.arange(edge, n - edge + 1)
    total = prefix[candidates - 1] + suffix[candidates]
    best = int(candidates[np.argmin(total)])
    single = prefix[-1]
    if single <= 1e-12 * float(np.sum(y * y)):
        return None
    if total.min() > 0.0 and single / total.min() < improvement:
        return None
    before = stats.linregress(times[:best], values[:best]).slope
    after = stats.linregress(times[best:], values[best:]).slope
    if abs(after - before) <= slope_change * max(abs(before), abs(after)):
        return None
    return best


def fit_ring_up(times: Sequence[float], energies: Sequence[float], mode: OscillatorMode,
                detect_break: bool = True) -> RingUpFit:
    """
    Fits the linear reheating n0 + Gamma_th t of a mode released from feedback. Energies in J are
    converted to phonons with hbar omega0; a persistent change of slope ends the fitted range.

    :param times: sample times [s]
    :type times: Sequence[float]
    :param energies: mode energy [J]
    :type energies: Sequence[float]
    :param mode: the reheating mode
    :type mode: OscillatorMode
    :raises FitError: on too few or non-finite samples, or a non-positive fitted rate
    :rtype: RingUpFit
    """
    t = np.asarray(times, dtype=float)
    n = np.asarray(energies, dtype=float) / (CONSTANTS.hbar * mode.omega0)
    if len(t) != len(n) or len(t) < 3:
        raise FitError(f"ring-up fit needs at least three matching samples, got {len(t)} times and {len(n)} energies")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(n))) or np.ptp(t) == 0.0:
        raise FitError("ring-up fit: degenerate or non-finite series")
    t0 = float(t[0])
    break_index = detect_changepoint(t, n) if detect_break else None
    stop = break_index if break_index is not None else len(t)
    fit = stats.linregress(t[:stop] - t0, n[:stop])
    if not fit.slope > 0.0:
        raise FitError(f"ring-up fit: energy does not grow (slope {fit.slope} phonons/s)")
    changepoint = float(t[break_index]) if break_index is not None else None
    logger.info("Ring-up fit: n0 = %.4g, Gamma_th = %.4g /s%s", fit.intercept, fit.slope,
                f", rate change at t = {changepoint} s" if changepoint is not None else "")
    return RingUpFit(float(fit.intercept), float(fit.slope), float(fit.stderr), changepoint, t0,
                     float(fit.rvalue ** 2))


@dataclass(frozen=True)
class ProbeResponse:
    """
    One probe-tone measurement: the drive current amplitude set on the coil and the rms response
    in detector units at the drive frequency.
    """
    trap_frequency: float
    axial_gradient: float
    drive_current: float
    detector_rms: float
    detector_uncertainty: float = 0.0

    def __post_init__(self):
        check_positive(self.trap_frequency, "ProbeResponse", "trap_frequency")
        check_positive(self.axial_gradient, "ProbeResponse", "axial_gradient")
        check_positive(self.drive_current, "ProbeResponse", "drive_current")
        check_positive(self.detector_rms, "ProbeResponse", "detector_rms")
        check_non_negative(self.detector_uncertainty, "ProbeResponse", "detector_uncertainty")


@dataclass(frozen=True)
class CalibrationResult:
    """
    Conversion from detector units to metres. ``uncertainty`` is relative.
    """
    factor: float
    uncertainty: float
    method: str
    r_squared: float = 1.0
    residuals: Tuple[float, ...] = ()
    per_frequency: Dict[float, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        check_positive(self.factor, "CalibrationResult", "factor")
        check_non_negative(self.uncertainty, "CalibrationResult", "uncertainty")
        if self.method not in ("probe-tone", "mirror"):
            raise ValueError(f"The CalibrationResult:method must be 'probe-tone' or 'mirror'. Was {self.method}")

    def suppression(self, wavelength: float) -> float:
        """
        Lock suppression implied by a factor in metres per normalised error unit,
        factor * 4 pi / lambda.
        """
        return self.factor * 4.0 * math.pi / wavelength

    def agrees_with(self, other: "CalibrationResult", sigmas: float = 1.0) -> bool:
        combined = math.hypot(self.uncertainty * self.factor, other.uncertainty * other.factor)
        return abs(self.factor - other.factor) <= sigmas * combined


def predicted_probe_displacement(response: ProbeResponse, field_per_ampere: float, mass: float, Q: float,
                                 drive_frequency: float) -> float:
    """
    Rms displacement driven by a coil current: the field offset B = field_per_ampere * I shifts the
    trap minimum by B / (dB/dz), which acts as the force m omega0^2 dz off resonance.
    """
    mode = OscillatorMode.from_frequency(mass, response.trap_frequency, Q)
    shift = field_per_ampere * response.drive_current / response.axial_gradient
    force = mode.mass * mode.omega0 ** 2 * shift
    return driven_response_amplitude(force, mode, 2.0 * math.pi * drive_frequency)


def probe_tone_calibration(responses: Sequence[ProbeResponse], field_per_ampere: float, mass: float,
                           drive_frequency: float, Q: float = 2.6e7,
                           consistency_sigmas: float = 3.0) -> CalibrationResult:
    """
    Probe-tone calibration. For each trap frequency the detector response is fitted linearly
    against the predicted displacement through the origin; the per-frequency factors are pooled by
    weighted least squares.

    :param responses: measurements at two or more trap frequencies
    :type responses: Sequence[ProbeResponse]
    :param field_per_ampere: field of the drive coil at the particle [T/A]
    :type field_per_ampere: float
    :param mass: particle mass [kg]
    :type mass: float
    :param drive_frequency: probe-tone frequency [Hz]
    :type drive_frequency: float
    :param consistency_sigmas: allowed spread of the per-frequency factors
    :type consistency_sigmas: float
    :raises NearResonantDriveError: if the drive is too close to a trap frequency
    :raises FitError: if fewer than two trap frequencies are given or the factors disagree
    :return: factor in metres per detector unit
    :rtype: CalibrationResult
    """
    check_positive(field_per_ampere, "probe_tone_calibration", "field_per_ampere")
    groups: Dict[float, List[ProbeResponse]] = {}
    for response in responses:
        groups.setdefault(response.trap_frequency, []).append(response)
    if len(groups) < 2:
        raise FitError(f"probe-tone calibration needs at least two trap frequencies, got {len(groups)}")

    per_frequency: Dict[float, Tuple[float, float]] = {}
    predicted_all: List[float] = []
    measured_all: List[float] = []
    for frequency, group in sorted(groups.items()):
        x = np.array([predicted_probe_displacement(r, field_per_ampere, mass, Q, drive_frequency) for r in group])
        d = np.array([r.detector_rms for r in group])
        sigma = np.array([r.detector_uncertainty for r in group])
        weights = 1.0 / sigma ** 2 if np.all(sigma > 0) else np.ones_like(d)
        # detector units per metre through the origin
        slope = float(np.sum(weights * x * d) / np.sum(weights * x * x))
        if np.all(sigma > 0):
            slope_error = float(1.0 / math.sqrt(np.sum(weights * x * x)))
        elif len(d) > 1:
            residual = d - slope * x
            slope_error = float(math.sqrt(np.sum(residual ** 2) / (len(d) - 1) / np.sum(x * x)))
        else:
            slope_error = 0.0
        factor = 1.0 / slope
        per_frequency[frequency] = (factor, factor * slope_error / slope)
        predicted_all.extend(x.tolist())
        measured_all.extend(d.tolist())

    factors = np.array([value[0] for value in per_frequency.values()])
    errors = np.array([value[1] for value in per_frequency.values()])
    floor = 1e-12 * float(np.mean(factors))
    errors = np.maximum(errors, floor)
    weights = 1.0 / errors ** 2
    pooled = float(np.sum(weights * factors) / np.sum(weights))
    pooled_error = float(1.0 / math.sqrt(np.sum(weights)))
    spread = np.abs(factors - pooled) / np.sqrt(errors ** 2 + pooled_error ** 2)
    if np.any(spread > consistency_sigmas):
        raise FitError(f"probe-tone calibration rejected: factors {factors.tolist()} m/unit at "
                       f"{list(per_frequency)} Hz disagree by up to {spread.max():.2f} sigma")

    x_all = np.array(predicted_all)
    d_all = np.array(measured_all)
    residuals = d_all - x_all / pooled
    total = np.sum((d_all - d_all.mean()) ** 2)
    r_squared = float(1.0 - np.sum(residuals ** 2) / total) if total > 0 else 1.0
    logger.info("Probe-tone calibration: %.6g m/unit +- %.2g%% from %d trap frequencies", pooled,
                100 * pooled_error / pooled, len(per_frequency))
    return CalibrationResult(pooled, pooled_error / pooled, "probe-tone", r_squared, tuple(residuals.tolist()),
                             per_frequency)


def calibration_from_mirror(calibration: MirrorCalibration, wavelength: float) -> CalibrationResult:
    """
    Expresses a moving-mirror calibration as metres per normalised error unit, so that it can be
    compared with a probe-tone calibration of the same lock.
    """
    residual_phase = calibration.measured_amplitude * 4.0 * math.pi / wavelength
    return CalibrationResult(calibration.true_amplitude / residual_phase, calibration.uncertainty, "mirror")

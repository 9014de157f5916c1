# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Analytic theory of velocity feedback on a harmonic mode: closed-loop and in-loop (squashed)
spectra, the optimal damping rate, the cooled variance with its effective temperature and the
measurement-limited cooling bound.

Spectral densities are two-sided per Hz and ``omega`` is angular frequency: the variance is the
integral of S_xx over the whole real line with measure d omega / (2 pi). ``S_ee`` is the noise of
the position estimate fed back, ``S_ss`` the noise added to the observed record.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from maglev_twin.model.Mechanics import CONSTANTS, OscillatorMode
from maglev_twin.util.Exceptions import UnsatisfiableConditionError
from maglev_twin.util.ValidityChecks import check_non_negative


def _susceptibility_denominator(omega, mode: OscillatorMode, gamma_total: float):
    omega = np.asarray(omega, dtype=float)
    return mode.mass ** 2 * ((mode.omega0 ** 2 - omega ** 2) ** 2 + omega ** 2 * gamma_total ** 2)


def closed_loop_psd(omega, mode: OscillatorMode, gamma_fb: float, S_FN: float, S_ee: float) -> np.ndarray:
    """
    Displacement PSD of the feedback-cooled mode,
    (S_FN + omega^2 m^2 gamma_fb^2 S_ee) / (m^2 ((omega0^2 - omega^2)^2 + omega^2 (gamma + gamma_fb)^2)).

    :param omega: angular frequency [rad/s], scalar or array
    :param mode: the cooled mode
    :type mode: OscillatorMode
    :param gamma_fb: feedback damping rate [rad/s]
    :type gamma_fb: float
    :param S_FN: total force noise PSD [N^2/Hz]
    :type S_FN: float
    :param S_ee: PSD of the noise in the fed-back position estimate [m^2/Hz]
    :type S_ee: float
    :return: S_xx [m^2/Hz]
    :rtype: numpy.ndarray
    """
    check_non_negative(gamma_fb, "closed_loop_psd", "gamma_fb")
    check_non_negative(S_FN, "closed_loop_psd", "S_FN")
    check_non_negative(S_ee, "closed_loop_psd", "S_ee")
    omega = np.asarray(omega, dtype=float)
    numerator = S_FN + omega ** 2 * mode.mass ** 2 * gamma_fb ** 2 * S_ee
    return numerator / _susceptibility_denominator(omega, mode, mode.gamma + gamma_fb)


def measured_psd_with_squashing(omega, mode: OscillatorMode, gamma_fb: float, S_FN: float,
                                S_ss: float) -> np.ndarray:
    """
    In-loop spectrum of the observed record when its own noise is fed back,
    (S_FN + m^2 ((omega0^2 - omega^2)^2 + omega^2 gamma^2) S_ss) / (m^2 ((omega0^2 - omega^2)^2
    + omega^2 (gamma + gamma_fb)^2)). Tends to S_ss far from resonance and dips below it at high gain.

    :rtype: numpy.ndarray
    """
    check_non_negative(gamma_fb, "measured_psd_with_squashing", "gamma_fb")
    check_non_negative(S_FN, "measured_psd_with_squashing", "S_FN")
    check_non_negative(S_ss, "measured_psd_with_squashing", "S_ss")
    omega = np.asarray(omega, dtype=float)
    numerator = S_FN + _susceptibility_denominator(omega, mode, mode.gamma) * S_ss
    return numerator / _susceptibility_denominator(omega, mode, mode.gamma + gamma_fb)


def optimal_gain(S_FN: float, S_ee: float, mode: OscillatorMode) -> float:
    """
    Damping rate minimising the cooled variance, sqrt(S_FN / (m^2 omega0^2 S_ee) + gamma^2) - gamma.

    :raises UnsatisfiableConditionError: for a noiseless measurement (S_ee = 0), where the
        optimum is unbounded
    :return: gamma_fb_opt [rad/s]
    :rtype: float
    """
    check_non_negative(S_FN, "optimal_gain", "S_FN")
    check_non_negative(S_ee, "optimal_gain", "S_ee")
    if S_ee == 0.0:
        raise UnsatisfiableConditionError("noiseless measurement: S_ee = 0 makes the optimal feedback gain unbounded")
    gamma = mode.gamma
    return math.sqrt(S_FN / (mode.mass ** 2 * mode.omega0 ** 2 * S_ee) + gamma ** 2) - gamma


def cooled_variance(mode: OscillatorMode, gamma_fb: float, S_FN: float, S_ee: float) -> float:
    """
    <x^2> = S_FN / (2 m^2 omega0^2 (gamma + gamma_fb)) + gamma_fb^2 S_ee / (2 (gamma + gamma_fb)).
    """
    check_non_negative(gamma_fb, "cooled_variance", "gamma_fb")
    total = mode.gamma + gamma_fb
    return S_FN / (2.0 * mode.mass ** 2 * mode.omega0 ** 2 * total) + gamma_fb ** 2 * S_ee / (2.0 * total)


@dataclass(frozen=True)
class CooledState:
    """
    Variance of a cooled mode with its effective temperature and occupation. The ``*_amplitude``
    fields use the amplitude convention, in which the quoted displacement is the peak amplitude
    sqrt(2 <x^2>) instead of the rms value.
    """
    variance: float
    temperature: float
    occupation: float
    temperature_amplitude: float
    occupation_amplitude: float

    @property
    def rms(self) -> float:
        return math.sqrt(self.variance)


def state_from_variance(mode: OscillatorMode, variance: float) -> CooledState:
    """
    Applies k_B T_eff = m omega0^2 <x^2> and <x^2> = hbar / (m omega0) (n + 1/2) in both
    conventions.
    """
    check_non_negative(variance, "state_from_variance", "variance")
    stiffness = mode.mass * mode.omega0 ** 2
    quantum = CONSTANTS.hbar / (mode.mass * mode.omega0)
    return CooledState(
        variance=variance,
        temperature=stiffness * variance / CONSTANTS.kB,
        occupation=variance / quantum - 0.5,
        temperature_amplitude=2.0 * stiffness * variance / CONSTANTS.kB,
        occupation_amplitude=2.0 * variance / quantum - 0.5,
    )


def variance_and_teff(mode: OscillatorMode, gamma_fb: float, S_FN: float, S_ee: float) -> CooledState:
    """
    Closed-form cooled variance with its effective temperature and mean occupation.

    :param mode: the cooled mode
    :type mode: OscillatorMode
    :param gamma_fb: feedback damping rate [rad/s]
    :type gamma_fb: float
    :param S_FN: force noise PSD [N^2/Hz]
    :type S_FN: float
    :param S_ee: feedback estimate noise PSD [m^2/Hz]
    :type S_ee: float
    :rtype: CooledState
    """
    return state_from_variance(mode, cooled_variance(mode, gamma_fb, S_FN, S_ee))


def numeric_variance(mode: OscillatorMode, gamma_fb: float, S_FN: float, S_ee: float) -> float:
    """
    Quadrature of :func:`closed_loop_psd` over all frequencies, with break points placed at
    multiples of the closed-loop linewidth around the resonance.
    """
    width = mode.gamma + gamma_fb
    w0 = mode.omega0
    points = sorted({w0 + sign * k * width for sign in (-1, 1) for k in (0.0, 1.0, 10.0, 100.0)
                     if 0.0 < w0 + sign * k * width < 2.0 * w0})

    def integrand(omega):
        return float(closed_loop_psd(omega, mode, gamma_fb, S_FN, S_ee))

    near, _ = integrate.quad(integrand, 0.0, 2.0 * w0, points=points, limit=1000, epsabs=0.0, epsrel=1e-8)
    far, _ = integrate.quad(integrand, 2.0 * w0, np.inf, limit=1000, epsabs=0.0, epsrel=1e-8)
    # even integrand: both half lines, measure d omega / (2 pi)
    return (near + far) / math.pi


def min_variance(S_FN: float, S_ee: float, mode: OscillatorMode, approximate: bool = False) -> float:
    """
    Smallest variance reachable with velocity feedback.

    The exact branch evaluates the closed form at :func:`optimal_gain`; the approximate branch is
    the high-gain limit sqrt(S_FN S_ee / (m^2 omega0^2)). A noiseless measurement gives 0.

    :rtype: float
    """
    check_non_negative(S_FN, "min_variance", "S_FN")
    check_non_negative(S_ee, "min_variance", "S_ee")
    if approximate:
        return math.sqrt(S_FN * S_ee / (mode.mass ** 2 * mode.omega0 ** 2))
    if S_ee == 0.0:
        return 0.0
    return cooled_variance(mode, optimal_gain(S_FN, S_ee, mode), S_FN, S_ee)


def cooling_limit_occupation(S_FN: float, S_ee: float) -> float:
    """
    Occupation at the measurement limit, from S_ee S_FN = hbar^2 (n_min + 1/2)^2.
    """
    check_non_negative(S_FN, "cooling_limit_occupation", "S_FN")
    check_non_negative(S_ee, "cooling_limit_occupation", "S_ee")
    return math.sqrt(S_ee * S_FN) / CONSTANTS.hbar - 0.5


@dataclass(frozen=True, eq=False)
class ClosedLoopSpectra:
    """
    Closed-loop and in-loop spectra on a common angular-frequency grid together with the
    component noise levels they were built from.
    """
    omega: np.ndarray
    S_xx: np.ndarray
    S_measured: np.ndarray
    S_FN: float
    S_ee: float
    S_ss: float
    gamma_fb: float

    @classmethod
    def evaluate(cls, omega, mode: OscillatorMode, gamma_fb: float, S_FN: float, S_ee: float,
                 S_ss: Optional[float] = None) -> "ClosedLoopSpectra":
        """
        :param S_ss: noise of the observed record, ``S_ee`` (in-loop observation) when omitted
        :type S_ss: float or None
        """
        S_ss = S_ee if S_ss is None else S_ss
        omega = np.asarray(omega, dtype=float)
        return cls(omega, closed_loop_psd(omega, mode, gamma_fb, S_FN, S_ee),
                   measured_psd_with_squashing(omega, mode, gamma_fb, S_FN, S_ss), S_FN, S_ee, S_ss, gamma_fb)

    @property
    def frequencies(self) -> np.ndarray:
        return self.omega / (2.0 * math.pi)

    def one_sided_asd(self, measured: bool = True) -> np.ndarray:
        """
        sqrt(2 S) of the in-loop (default) or true spectrum.
        """
        return np.sqrt(2.0 * (self.S_measured if measured else self.S_xx))

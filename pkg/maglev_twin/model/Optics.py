# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Optical descriptions: the probe laser, the Gaussian reflection profile used for radial readout and
the optical cavity of the forward-design calculations.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from maglev_twin.model.Mechanics import CONSTANTS, OscillatorMode
from maglev_twin.util.ValidityChecks import check_non_negative, check_positive, check_range

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def photon_energy(wavelength: float) -> float:
    """
    :param wavelength: vacuum wavelength [m]
    :type wavelength: float
    :return: 2 pi hbar c / lambda [J]
    :rtype: float
    """
    check_positive(wavelength, "photon_energy", "wavelength")
    return 2.0 * math.pi * CONSTANTS.hbar * CONSTANTS.c_light / wavelength


def flux_to_power(flux: float, wavelength: float) -> float:
    """
    :return: optical power [W] of a photon flux [1/s]
    :rtype: float
    """
    check_non_negative(flux, "flux_to_power", "flux")
    return flux * photon_energy(wavelength)


def power_to_flux(power: float, wavelength: float) -> float:
    """
    :return: photon flux [1/s] of an optical power [W]
    :rtype: float
    """
    check_non_negative(power, "power_to_flux", "power")
    return power / photon_energy(wavelength)


@dataclass(frozen=True)
class LaserSpec:
    """
    Probe laser of the homodyne interferometer. ``n_lo`` is the local-oscillator flux reaching the
    detectors; it defaults to a hundred times the detected signal flux.
    """
    wavelength: float
    n_in: float
    n_det: float
    n_lo: Optional[float] = None

    def __post_init__(self):
        check_positive(self.wavelength, "LaserSpec", "wavelength")
        check_positive(self.n_in, "LaserSpec", "n_in")
        check_positive(self.n_det, "LaserSpec", "n_det")
        if self.n_det > self.n_in:
            raise ValueError(f"The LaserSpec:n_det must not exceed n_in ({self.n_in}). Was {self.n_det}")
        if self.n_lo is None:
            object.__setattr__(self, "n_lo", 100.0 * self.n_det)
        check_positive(self.n_lo, "LaserSpec", "n_lo")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def detection_efficiency(self) -> float:
        return self.n_det / self.n_in

    @property
    def power(self) -> float:
        """
        Input power [W].
        """
        return flux_to_power(self.n_in, self.wavelength)


@dataclass(frozen=True)
class BeamProfile:
    """
    Gaussian reflected-intensity profile seen by the sum channel as a function of the radial
    particle position.
    """
    offset: Tuple[float, float]
    fwhm: float
    peak_flux: float

    def __post_init__(self):
        if len(self.offset) != 2:
            raise TypeError(f"The BeamProfile:offset must have two entries (x, y). Was {self.offset}")
        check_positive(self.fwhm, "BeamProfile", "fwhm")
        check_non_negative(self.peak_flux, "BeamProfile", "peak_flux")

    @classmethod
    def on_slope(cls, fwhm: float, peak_flux: float, axis: int = 0) -> "BeamProfile":
        """
        Places the beam so that the trap centre sits on the inflection point of the profile along
        the given radial axis, where the count slope is steepest.
        """
        sigma = fwhm / FWHM_PER_SIGMA
        offset = (sigma, 0.0) if axis == 0 else (0.0, sigma)
        return cls(offset=offset, fwhm=fwhm, peak_flux=peak_flux)

    @property
    def sigma(self) -> float:
        return self.fwhm / FWHM_PER_SIGMA

    def relative_intensity(self, x: float, y: float) -> float:
        """
        Profile value in [0, 1] at the radial position (x, y).
        """
        dx = x - self.offset[0]
        dy = y - self.offset[1]
        return math.exp(-(dx * dx + dy * dy) / (2.0 * self.sigma ** 2))

    def flux(self, x: float, y: float) -> float:
        return self.peak_flux * self.relative_intensity(x, y)

    def flux_gradient(self, x: float, y: float) -> Tuple[float, float]:
        """
        Gradient of the detected flux with respect to the particle position [1/(s m)].
        """
        value = self.flux(x, y)
        sigma2 = self.sigma ** 2
        return -(x - self.offset[0]) / sigma2 * value, -(y - self.offset[1]) / sigma2 * value


@dataclass(frozen=True)
class CavitySpec:
    """
    Fabry-Perot cavity formed with the levitated mirror. ``kappa`` and ``kappa_ext`` are power loss
    rates in rad/s; the finesse and the frequency pull follow from them.
    """
    wavelength: float
    length: float
    kappa: float
    kappa_ext: float
    eta_det: float = 1.0
    n_cav: float = 0.0

    def __post_init__(self):
        check_positive(self.wavelength, "CavitySpec", "wavelength")
        check_positive(self.length, "CavitySpec", "length")
        check_positive(self.kappa, "CavitySpec", "kappa")
        check_positive(self.kappa_ext, "CavitySpec", "kappa_ext")
        if self.kappa_ext > self.kappa:
            raise ValueError(f"The CavitySpec:kappa_ext must not exceed kappa ({self.kappa}). Was {self.kappa_ext}")
        check_range(self.eta_det, 0.0, 1.0, "CavitySpec", "eta_det")
        check_positive(self.eta_det, "CavitySpec", "eta_det")
        check_non_negative(self.n_cav, "CavitySpec", "n_cav")

    @classmethod
    def from_finesse(cls, wavelength: float, length: float, finesse: float, eta_det: float = 1.0,
                     coupling_ratio: float = 1.0, n_cav: float = 0.0) -> "CavitySpec":
        """
        Builds a cavity from its finesse using kappa = c pi / (F L).

        :param coupling_ratio: kappa_ext / kappa, 1 for a fully over-coupled one-sided cavity
        :type coupling_ratio: float
        :rtype: CavitySpec
        """
        check_positive(finesse, "CavitySpec", "finesse")
        check_positive(length, "CavitySpec", "length")
        check_range(coupling_ratio, 0.0, 1.0, "CavitySpec", "coupling_ratio")
        kappa = CONSTANTS.c_light * math.pi / (finesse * length)
        return cls(wavelength=wavelength, length=length, kappa=kappa, kappa_ext=coupling_ratio * kappa,
                   eta_det=eta_det, n_cav=n_cav)

    @property
    def finesse(self) -> float:
        return CONSTANTS.c_light * math.pi / (self.kappa * self.length)

    @property
    def omega_cav(self) -> float:
        return 2.0 * math.pi * CONSTANTS.c_light / self.wavelength

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def G(self) -> float:
        """
        Frequency pull per displacement, -omega_cav / L [rad/(s m)].
        """
        return -self.omega_cav / self.length

    @property
    def eta(self) -> float:
        """
        Total efficiency eta_det * kappa_ext / kappa.
        """
        return self.eta_det * self.kappa_ext / self.kappa

    def g(self, mode: OscillatorMode) -> float:
        """
        Bare optomechanical coupling z_zpf |G| [rad/s].
        """
        return mode.z_zpf * abs(self.G)

    def with_photons(self, n_cav: float) -> "CavitySpec":
        return CavitySpec(self.wavelength, self.length, self.kappa, self.kappa_ext, self.eta_det, n_cav)

    def intracavity_photons(self, n_in: float) -> float:
        """
        One-sided over-coupled relation n_cav = 4 n_in / kappa.
        """
        check_non_negative(n_in, "CavitySpec", "n_in")
        return 4.0 * n_in / self.kappa

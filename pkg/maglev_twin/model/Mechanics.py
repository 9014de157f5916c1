# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Static physics of the levitated particle and its magnetic trap: physical constants, particle and
trap descriptions, the per-axis harmonic mode and the closed-form relations between trap gradients,
frequencies, static displacements and probe forces.

Units convention: angular frequencies are stored in rad/s. Every constructor or function taking a
"frequency" takes Hz and converts once.
"""

import math
from dataclasses import dataclass
from typing import Dict, Tuple

from scipy import constants as sc

from maglev_twin.util.Exceptions import NearResonantDriveError
from maglev_twin.util.ValidityChecks import check_non_negative, check_positive, check_range

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class PhysicalConstants:
    """
    CODATA constants used throughout the package. Not configurable.
    """
    mu0: float = sc.mu_0
    kB: float = sc.k
    hbar: float = sc.hbar
    c_light: float = sc.c

    def __post_init__(self):
        for name in ("mu0", "kB", "hbar", "c_light"):
            check_positive(getattr(self, name), "PhysicalConstants", name)


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class ParticleSpec:
    """
    Material and geometric description of the levitated superconducting sphere.

    ``heat_capacity_coeff`` is the combined (lattice and electron) coefficient of c(T) = coeff*T^3,
    ``electron_heat_capacity_coeff`` the electron-only coefficient.
    """
    density: float
    radius: float
    mass: float
    reflectivity: float = 0.63
    T_c: float = 7.2
    H0: float = 6.4e4
    heat_capacity_coeff: float = 0.0115
    electron_heat_capacity_coeff: float = 0.0010
    roughness: float = 50e-9

    def __post_init__(self):
        check_positive(self.density, "ParticleSpec", "density")
        check_positive(self.radius, "ParticleSpec", "radius")
        check_positive(self.mass, "ParticleSpec", "mass")
        check_range(self.reflectivity, 0.0, 1.0, "ParticleSpec", "reflectivity")
        check_positive(self.T_c, "ParticleSpec", "T_c")
        check_positive(self.H0, "ParticleSpec", "H0")
        check_positive(self.heat_capacity_coeff, "ParticleSpec", "heat_capacity_coeff")
        check_positive(self.electron_heat_capacity_coeff, "ParticleSpec", "electron_heat_capacity_coeff")
        check_non_negative(self.roughness, "ParticleSpec", "roughness")

        geometric_mass = self.density * 4.0 / 3.0 * math.pi * self.radius ** 3
        if abs(geometric_mass - self.mass) > 1e-3 * self.mass:
            raise ValueError(f"The ParticleSpec:mass must equal density * 4/3 pi radius^3 within 0.1%. "
                             f"Was {self.mass} for a geometric mass of {geometric_mass}")

    @classmethod
    def from_mass(cls, mass: float, density: float = 1.1e4, **kwargs) -> "ParticleSpec":
        """
        Builds a sphere of the given mass and density, deriving the radius.

        :param mass: particle mass [kg]
        :type mass: float
        :param density: material density [kg/m^3]
        :type density: float
        :return: the particle description
        :rtype: ParticleSpec
        """
        check_positive(mass, "ParticleSpec", "mass")
        check_positive(density, "ParticleSpec", "density")
        radius = (3.0 * mass / (4.0 * math.pi * density)) ** (1.0 / 3.0)
        return cls(density=density, radius=radius, mass=mass, **kwargs)


@dataclass(frozen=True)
class OscillatorMode:
    """
    Harmonic mode of one trap axis. ``gamma`` equals ``omega0 / Q`` exactly.
    """
    mass: float
    omega0: float
    Q: float

    def __post_init__(self):
        check_positive(self.mass, "OscillatorMode", "mass")
        check_positive(self.omega0, "OscillatorMode", "omega0")
        check_positive(self.Q, "OscillatorMode", "Q")

    @classmethod
    def from_frequency(cls, mass: float, f0: float, Q: float) -> "OscillatorMode":
        """
        :param mass: oscillating mass [kg]
        :type mass: float
        :param f0: mode frequency [Hz]
        :type f0: float
        :param Q: quality factor
        :type Q: float
        :rtype: OscillatorMode
        """
        check_positive(f0, "OscillatorMode", "f0")
        return cls(mass=mass, omega0=2.0 * math.pi * f0, Q=Q)

    @property
    def f0(self) -> float:
        return self.omega0 / (2.0 * math.pi)

    @property
    def gamma(self) -> float:
        return self.omega0 / self.Q

    @property
    def z_zpf(self) -> float:
        return math.sqrt(CONSTANTS.hbar / (2.0 * self.mass * self.omega0))

    @property
    def p_zpf(self) -> float:
        return math.sqrt(CONSTANTS.hbar * self.mass * self.omega0 / 2.0)

    def thermal_occupation(self, temperature: float) -> float:
        """
        High-temperature mean phonon number k_B T / (hbar omega0).
        """
        check_non_negative(temperature, "OscillatorMode", "temperature")
        return CONSTANTS.kB * temperature / (CONSTANTS.hbar * self.omega0)

    def thermal_variance(self, temperature: float) -> float:
        """
        Equipartition position variance k_B T / (m omega0^2).
        """
        check_non_negative(temperature, "OscillatorMode", "temperature")
        return CONSTANTS.kB * temperature / (self.mass * self.omega0 ** 2)


@dataclass(frozen=True)
class TrapSpec:
    """
    Anti-Helmholtz trap. Gradients are linear in the coil current and the axial coefficient is
    twice each radial one.
    """
    gradient_per_ampere: Tuple[float, float, float]
    current: float
    quality_factor: float = 2.6e7
    radial_quality_factor: float = 1e5

    def __post_init__(self):
        if len(self.gradient_per_ampere) != 3:
            raise TypeError(f"The TrapSpec:gradient_per_ampere must have three entries (x, y, z). "
                            f"Was {self.gradient_per_ampere}")
        for axis, value in zip(AXES, self.gradient_per_ampere):
            check_positive(value, "TrapSpec", f"gradient_per_ampere.{axis}")
        check_non_negative(self.current, "TrapSpec", "current")
        check_positive(self.quality_factor, "TrapSpec", "quality_factor")
        check_positive(self.radial_quality_factor, "TrapSpec", "radial_quality_factor")

        bx, by, bz = self.gradient_per_ampere
        for axis, radial in (("x", bx), ("y", by)):
            if not math.isclose(bz, 2.0 * radial, rel_tol=1e-9):
                raise ValueError(f"The TrapSpec:gradient_per_ampere.z must be twice the radial coefficient "
                                 f"{axis}. Was {bz} for {radial}")

    @classmethod
    def from_axial_gradient(cls, axial_gradient_per_ampere: float, current: float, **kwargs) -> "TrapSpec":
        """
        Builds a trap whose radial coefficients are half the axial one.
        """
        radial = axial_gradient_per_ampere / 2.0
        return cls(gradient_per_ampere=(radial, radial, axial_gradient_per_ampere), current=current, **kwargs)

    @property
    def gradients(self) -> Tuple[float, float, float]:
        """
        Field gradients b_i = gradient_per_ampere_i * current [T/m].
        """
        bx, by, bz = self.gradient_per_ampere
        return bx * self.current, by * self.current, bz * self.current

    def frequencies(self, density: float) -> Dict[str, float]:
        """
        :return: trap frequency per axis [Hz]
        :rtype: dict
        """
        return {axis: trap_frequency(b, density) for axis, b in zip(AXES, self.gradients)}

    def modes(self, particle: ParticleSpec) -> Dict[str, OscillatorMode]:
        """
        Per-axis harmonic modes of the given particle in this trap.

        :raises ValueError: if the current is zero (no confinement)
        :rtype: dict
        """
        frequencies = self.frequencies(particle.density)
        return {axis: OscillatorMode.from_frequency(
            particle.mass, frequency, self.quality_factor if axis == "z" else self.radial_quality_factor)
            for axis, frequency in frequencies.items()}


def trap_frequency(gradient: float, density: float) -> float:
    """
    Trap frequency f_i = sqrt(3 / (8 pi^2 mu0 rho)) * b_i of a superconducting sphere in a linear
    gradient field.

    :param gradient: field gradient along the axis [T/m]
    :type gradient: float
    :param density: particle density [kg/m^3]
    :type density: float
    :raises ValueError: on a non-positive density or a negative gradient
    :return: ordinary frequency [Hz]
    :rtype: float
    """
    check_positive(density, "trap_frequency", "density")
    check_non_negative(gradient, "trap_frequency", "gradient")
    return math.sqrt(3.0 / (8.0 * math.pi ** 2 * CONSTANTS.mu0 * density)) * gradient


def equilibrium_displacement(field_offset: float, axial_gradient: float) -> float:
    """
    Static shift of the trap minimum caused by a homogeneous field offset, B_ext / (dB/dz).

    :param field_offset: external field offset [T], signed
    :type field_offset: float
    :param axial_gradient: axial gradient [T/m]
    :type axial_gradient: float
    :raises ValueError: if the gradient is not positive
    :return: displacement [m]
    :rtype: float
    """
    check_positive(axial_gradient, "equilibrium_displacement", "axial_gradient")
    return field_offset / axial_gradient


def probe_force(mode: OscillatorMode, displacement: float) -> float:
    """
    Force m omega^2 dz corresponding to a displacement of the trap minimum.

    :param mode: the driven mode
    :type mode: OscillatorMode
    :param displacement: shift of the trap minimum [m]
    :type displacement: float
    :return: force amplitude [N]
    :rtype: float
    """
    return mode.mass * mode.omega0 ** 2 * displacement


def driven_response_amplitude(force_amplitude: float, mode: OscillatorMode, omega_drive: float,
                              exclusion_linewidths: float = 5.0) -> float:
    """
    Off-resonant displacement amplitude F0 / (m sqrt(2) (omega0^2 - omega_dr^2)) of a harmonically
    driven mode. Only the magnitude is returned.

    :param force_amplitude: drive force amplitude [N]
    :type force_amplitude: float
    :param mode: driven mode
    :type mode: OscillatorMode
    :param omega_drive: drive angular frequency [rad/s]
    :type omega_drive: float
    :param exclusion_linewidths: minimum separation |f0 - f_dr| in units of the linewidth gamma/2pi
    :type exclusion_linewidths: float
    :raises NearResonantDriveError: if the drive lies inside the resonance exclusion band
    :return: displacement amplitude [m]
    :rtype: float
    """
    check_non_negative(exclusion_linewidths, "driven_response_amplitude", "exclusion_linewidths")
    separation = abs(mode.omega0 - omega_drive)
    detuning = mode.omega0 ** 2 - omega_drive ** 2
    if separation < exclusion_linewidths * mode.gamma or detuning == 0.0:
        raise NearResonantDriveError(
            f"near-resonant drive: |f0 - f_dr| = {separation / (2 * math.pi)} Hz is below "
            f"{exclusion_linewidths} linewidths ({exclusion_linewidths * mode.gamma / (2 * math.pi)} Hz)")
    return abs(force_amplitude / (mode.mass * math.sqrt(2.0) * detuning))

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Forward-design calculators: decoherence rates and cooperativities, ground-state cooling
requirements in free space and with a cavity, the occupation reachable with optimal feedback as a
function of the input flux, and the thermal quench model that bounds the levitation time.

Noise spectral densities are two-sided per Hz, as everywhere in the package. Amplitudes printed for
comparison with measured spectra are one-sided, sqrt(2 S).
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from maglev_twin.model.Mechanics import CONSTANTS, OscillatorMode, ParticleSpec
from maglev_twin.model.Optics import CavitySpec, flux_to_power
from maglev_twin.util.Exceptions import FitError, UnsatisfiableConditionError
from maglev_twin.util.File import write_columns
from maglev_twin.util.JsonRepr import JsonRepr
from maglev_twin.util.ValidityChecks import check_non_negative, check_positive, check_range

logger = logging.getLogger(__name__)

ETA_LIMIT = 1.0 / 9.0
RADIATION_LIMITED = "radiation-limited"
HEAT_CAPACITY_LAWS = ("combined", "electron")
FEASIBILITY_HEADER = ("n_in", "phonons", "finesse")


def _check_efficiency(eta: float, obj: str):
    check_range(eta, 0.0, 1.0, obj, "eta")
    if eta <= ETA_LIMIT:
        raise UnsatisfiableConditionError(f"ground-state cooling is unsatisfiable for eta = {eta}: the detection "
                                          f"efficiency must exceed 1/9")


def thermal_decoherence_rate(mode: OscillatorMode, temperature: float) -> float:
    """
    Gamma_th = n_th gamma with the high-temperature occupation k_B T / (hbar omega0).
    """
    return mode.thermal_occupation(temperature) * mode.gamma


def decoherence_rates(mode: OscillatorMode, temperature: float, S_Fba: float) -> Tuple[float, float]:
    """
    Thermal and measurement back-action decoherence rates.

    :param mode: the mechanical mode
    :type mode: OscillatorMode
    :param temperature: bath temperature [K]
    :type temperature: float
    :param S_Fba: back-action force PSD [N^2/Hz]
    :type S_Fba: float
    :return: (Gamma_th, Gamma_ba) with Gamma_ba = S_Fba / (2 hbar m omega0) [1/s]
    :rtype: tuple
    """
    check_non_negative(S_Fba, "decoherence_rates", "S_Fba")
    gamma_ba = S_Fba / (2.0 * CONSTANTS.hbar * mode.mass * mode.omega0)
    return thermal_decoherence_rate(mode, temperature), gamma_ba


def free_space_backaction_rate(mode: OscillatorMode, wavelength: float, n_in: float) -> float:
    """
    Gamma_ba of a free-space reflection measurement, S_Fba = 4 hbar^2 k^2 n_in.
    """
    check_non_negative(n_in, "free_space_backaction_rate", "n_in")
    k = 2.0 * math.pi / wavelength
    return decoherence_rates(mode, 0.0, 4.0 * CONSTANTS.hbar ** 2 * k ** 2 * n_in)[1]


@dataclass(frozen=True)
class GroundStateCondition:
    """
    ``margin`` is C_q (9 eta - 1) - 1; the condition holds for a non-negative margin.
    """
    satisfied: bool
    margin: float
    threshold: float


def ground_state_condition(C_q: float, eta: float) -> GroundStateCondition:
    """
    Ground-state cooling requires C_q >= 1 / (9 eta - 1).

    :param C_q: quantum cooperativity
    :type C_q: float
    :param eta: total detection efficiency
    :type eta: float
    :raises UnsatisfiableConditionError: for eta <= 1/9
    :rtype: GroundStateCondition
    """
    check_non_negative(C_q, "ground_state_condition", "C_q")
    _check_efficiency(eta, "ground_state_condition")
    margin = C_q * (9.0 * eta - 1.0) - 1.0
    return GroundStateCondition(margin >= 0.0, margin, 1.0 / (9.0 * eta - 1.0))


@dataclass(frozen=True)
class FluxRequirement:
    """
    Input photon flux with its optical power, power == n_in * 2 pi hbar c / lambda.
    """
    n_in: float
    power: float
    wavelength: float


def _requirement(n_in: float, wavelength: float) -> FluxRequirement:
    return FluxRequirement(n_in, flux_to_power(n_in, wavelength), wavelength)


def min_input_flux_freespace(mode: OscillatorMode, temperature: float, wavelength: float, eta: float,
                             decoherence_rate: Optional[float] = None) -> FluxRequirement:
    """
    Smallest free-space input flux reaching the ground-state condition,
    n_in = Gamma_th m omega0 / (2 hbar k^2 (9 eta - 1)).

    :param decoherence_rate: measured Gamma_th [1/s], derived from the temperature when omitted
    :type decoherence_rate: float or None
    :raises UnsatisfiableConditionError: for eta <= 1/9
    :rtype: FluxRequirement
    """
    _check_efficiency(eta, "min_input_flux_freespace")
    gamma_th = thermal_decoherence_rate(mode, temperature) if decoherence_rate is None else decoherence_rate
    check_non_negative(gamma_th, "min_input_flux_freespace", "decoherence_rate")
    per_photon = free_space_backaction_rate(mode, wavelength, 1.0)
    return _requirement(gamma_th / ((9.0 * eta - 1.0) * per_photon), wavelength)


def cavity_backaction_psd(cavity: CavitySpec, mode: OscillatorMode, n_cav: Optional[float] = None) -> float:
    """
    Back-action force PSD 4 hbar^2 G^2 n_cav / (kappa (1 + 4 omega0^2 / kappa^2)).
    """
    n_cav = cavity.n_cav if n_cav is None else n_cav
    check_non_negative(n_cav, "cavity_backaction_psd", "n_cav")
    sideband = 1.0 + 4.0 * mode.omega0 ** 2 / cavity.kappa ** 2
    return 4.0 * CONSTANTS.hbar ** 2 * cavity.G ** 2 * n_cav / (cavity.kappa * sideband)


def cavity_imprecision_psd(cavity: CavitySpec, mode: OscillatorMode, n_cav: Optional[float] = None,
                           eta: Optional[float] = None) -> float:
    """
    Imprecision kappa (1 + 4 omega0^2 / kappa^2) / (16 eta n_cav G^2), which forms hbar^2 / (4 eta)
    with the back-action.

    :raises UnsatisfiableConditionError: without intracavity photons
    """
    n_cav = cavity.n_cav if n_cav is None else n_cav
    eta = cavity.eta if eta is None else eta
    check_range(eta, 0.0, 1.0, "cavity_imprecision_psd", "eta")
    if n_cav <= 0.0 or eta <= 0.0:
        raise UnsatisfiableConditionError("an empty cavity or zero efficiency has unbounded imprecision")
    sideband = 1.0 + 4.0 * mode.omega0 ** 2 / cavity.kappa ** 2
    return cavity.kappa * sideband / (16.0 * eta * n_cav * cavity.G ** 2)


def optomechanical_cooperativity(cavity: CavitySpec, mode: OscillatorMode, n_cav: Optional[float] = None) -> float:
    """
    C_om = 4 g^2 n_cav / (kappa gamma).
    """
    n_cav = cavity.n_cav if n_cav is None else n_cav
    check_non_negative(n_cav, "optomechanical_cooperativity", "n_cav")
    return 4.0 * cavity.g(mode) ** 2 * n_cav / (cavity.kappa * mode.gamma)


def quantum_cooperativity(cavity: CavitySpec, mode: OscillatorMode, temperature: float,
                          n_cav: Optional[float] = None) -> float:
    """
    C_q = C_om / n_th.

    :raises UnsatisfiableConditionError: at zero temperature, where C_q is unbounded
    """
    n_th = mode.thermal_occupation(temperature)
    if n_th == 0.0:
        raise UnsatisfiableConditionError("quantum cooperativity is unbounded at zero bath temperature")
    return optomechanical_cooperativity(cavity, mode, n_cav) / n_th


def min_input_flux_cavity(mode: OscillatorMode, temperature: float, cavity: CavitySpec,
                          eta: Optional[float] = None) -> FluxRequirement:
    """
    Smallest input flux of a one-sided over-coupled cavity reaching the ground-state condition.
    With n_cav = 4 n_in / kappa the cavity length cancels:
    n_in = pi^2 Gamma_th / (16 z_zpf^2 k^2 F^2 (9 eta - 1)).

    :param cavity: the cavity, its photon number is ignored
    :type cavity: CavitySpec
    :param eta: total efficiency, ``cavity.eta`` when omitted
    :type eta: float or None
    :raises UnsatisfiableConditionError: for eta <= 1/9
    :rtype: FluxRequirement
    """
    eta = cavity.eta if eta is None else eta
    _check_efficiency(eta, "min_input_flux_cavity")
    gamma_th = thermal_decoherence_rate(mode, temperature)
    n_in = math.pi ** 2 * gamma_th / (16.0 * mode.z_zpf ** 2 * cavity.wavenumber ** 2 * cavity.finesse ** 2
                                      * (9.0 * eta - 1.0))
    return _requirement(n_in, cavity.wavelength)


def occupation_from_budget(cavity: CavitySpec, mode: OscillatorMode, n_cav: float, S_FN_plus: float,
                           S_sigma_plus: float, eta: Optional[float] = None) -> float:
    """
    Occupation reachable with optimal feedback, sqrt(S_ee S_FN) / hbar - 1/2, where the cavity adds
    its imprecision to ``S_sigma_plus`` and its back-action to ``S_FN_plus``.
    """
    S_ee = cavity_imprecision_psd(cavity, mode, n_cav, eta) + S_sigma_plus
    S_FN = S_FN_plus + cavity_backaction_psd(cavity, mode, n_cav)
    return math.sqrt(S_ee * S_FN) / CONSTANTS.hbar - 0.5


def cooled_occupation_vs_flux(mode: OscillatorMode, temperature: float, cavity: CavitySpec,
                              n_in_grid: Sequence[float], eta: Optional[float] = None,
                              S_sigma_plus: float = 0.0) -> np.ndarray:
    """
    Minimum occupation with optimal feedback for every input flux of the grid, from thermal force
    noise plus the cavity imprecision and back-action at n_cav = 4 n_in / kappa.

    :param n_in_grid: positive input fluxes [1/s]
    :type n_in_grid: Sequence[float]
    :param S_sigma_plus: excess imprecision [m^2/Hz]
    :type S_sigma_plus: float
    :return: occupation per grid point
    :rtype: numpy.ndarray
    """
    grid = np.asarray(n_in_grid, dtype=float)
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ValueError("The n_in_grid:values must be finite and positive")
    S_th = 2.0 * mode.gamma * mode.mass * CONSTANTS.kB * temperature
    return np.array([occupation_from_budget(cavity, mode, cavity.intracavity_photons(n), S_th, S_sigma_plus, eta)
                     for n in grid])


def occupation_curves(mode: OscillatorMode, temperature: float, cavity: CavitySpec, finesses: Sequence[float],
                      n_in_grid: Sequence[float], eta: Optional[float] = None) -> Dict[float, np.ndarray]:
    """
    One occupation-versus-flux curve per finesse, all other cavity properties kept.
    """
    curves = {}
    for finesse in finesses:
        variant = CavitySpec.from_finesse(cavity.wavelength, cavity.length, finesse, cavity.eta_det,
                                          cavity.kappa_ext / cavity.kappa)
        curves[float(finesse)] = cooled_occupation_vs_flux(mode, temperature, variant, n_in_grid, eta)
    return curves


def export_occupation_curves(file_path: str, n_in_grid: Sequence[float], curves: Dict[float, np.ndarray],
                             comments: Optional[Dict[str, object]] = None) -> str:
    """
    Writes ``n_in,phonons,finesse`` with one block of rows per finesse.
    """
    grid = np.asarray(n_in_grid, dtype=float)
    n_in = np.concatenate([grid for _ in curves])
    phonons = np.concatenate(list(curves.values())) if curves else np.empty(0)
    finesse = np.concatenate([np.full(len(grid), f) for f in curves])
    return write_columns(file_path, FEASIBILITY_HEADER, [n_in, phonons, finesse], comments)


def optimal_ncav(cavity: CavitySpec, S_FN_plus: float, S_sigma_plus: float, eta: float,
                 mode: OscillatorMode) -> float:
    """
    Intracavity photon number minimising the occupation for given excess noises,
    kappa / (8 G^2 hbar sqrt(eta)) sqrt(S_FN_plus / S_sigma_plus) (1 + 4 omega0^2 / kappa^2).

    :raises UnsatisfiableConditionError: without excess imprecision, where the optimum is unbounded
    :rtype: float
    """
    check_non_negative(S_FN_plus, "optimal_ncav", "S_FN_plus")
    check_non_negative(S_sigma_plus, "optimal_ncav", "S_sigma_plus")
    check_range(eta, 0.0, 1.0, "optimal_ncav", "eta")
    check_positive(eta, "optimal_ncav", "eta")
    if S_sigma_plus == 0.0:
        raise UnsatisfiableConditionError("zero excess measurement noise makes the optimal photon number unbounded")
    sideband = 1.0 + 4.0 * mode.omega0 ** 2 / cavity.kappa ** 2
    return cavity.kappa / (8.0 * cavity.G ** 2 * CONSTANTS.hbar * math.sqrt(eta)) \
        * math.sqrt(S_FN_plus / S_sigma_plus) * sideband


@dataclass(frozen=True)
class ExcessNoiseBound:
    """
    Largest excess imprecision still allowing ground-state cooling. ``S_bound`` is two-sided per
    Hz with gamma in rad/s; the amplitudes express it in the conventions found in the literature.
    """
    S_bound: float
    one_sided: float
    two_sided: float
    ordinary_linewidth: float

    def describe(self) -> str:
        return (f"excess imprecision bound: sqrt(2 S) = {self.one_sided:.3e} m/sqrt(Hz) (one-sided), "
                f"sqrt(S) = {self.two_sided:.3e} m/sqrt(Hz) (two-sided), "
                f"{self.ordinary_linewidth:.3e} m/sqrt(Hz) (one-sided, linewidth in Hz)")


def excess_noise_bound(eta: float, mode: OscillatorMode, temperature: float) -> ExcessNoiseBound:
    """
    S_sigma_plus < (1 / eta) hbar^2 / (8 m gamma k_B T) (3 sqrt(eta) - 1)^2, from
    sqrt(S_sigma_plus S_FN_plus) < (hbar / 2)(3 - 1 / sqrt(eta)) with S_FN_plus = 2 m gamma k_B T.

    :raises UnsatisfiableConditionError: for eta < 1/9 or zero temperature
    :rtype: ExcessNoiseBound
    """
    check_range(eta, 0.0, 1.0, "excess_noise_bound", "eta")
    if eta < ETA_LIMIT and not math.isclose(eta, ETA_LIMIT):
        raise UnsatisfiableConditionError(f"no excess noise is tolerable for eta = {eta} below 1/9")
    check_positive(temperature, "excess_noise_bound", "temperature")
    margin = max(3.0 * math.sqrt(eta) - 1.0, 0.0)
    S_bound = CONSTANTS.hbar ** 2 * margin ** 2 / (eta * 8.0 * mode.mass * mode.gamma * CONSTANTS.kB * temperature)
    return ExcessNoiseBound(S_bound, math.sqrt(2.0 * S_bound), math.sqrt(S_bound),
                            math.sqrt(2.0 * S_bound * 2.0 * math.pi))


@dataclass(frozen=True)
class FeasibilityReport(JsonRepr):
    """
    Ground-state feasibility of one configuration with all inputs echoed.
    """
    Gamma_ba: float
    Gamma_th: float
    C_om: float
    C_q: float
    n_in_required: float
    power_required: float
    excess_noise_bound: float
    coolable: bool
    inputs: Tuple[Tuple[str, float], ...] = ()

    def create_json_repr(self) -> dict:
        return {
            "Gamma_ba": self.Gamma_ba,
            "Gamma_th": self.Gamma_th,
            "C_om": self.C_om,
            "C_q": self.C_q,
            "n_in_required": self.n_in_required,
            "power_required_W": self.power_required,
            "excess_noise_bound_m_per_sqrtHz": self.excess_noise_bound,
            "ground_state_coolable": self.coolable,
            "inputs": dict(self.inputs),
        }

    def to_text(self) -> str:
        lines = [f"{key} = {value!r}" for key, value in self.inputs]
        lines += [f"{key} = {value!r}" for key, value in self.create_json_repr().items() if key != "inputs"]
        return "\n".join(lines) + "\n"


def freespace_report(mode: OscillatorMode, temperature: float, wavelength: float, n_in: float, eta: float,
                     decoherence_rate: Optional[float] = None) -> FeasibilityReport:
    """
    Feasibility of free-space measurement, where C_om = Gamma_ba / gamma.
    """
    gamma_th = thermal_decoherence_rate(mode, temperature) if decoherence_rate is None else decoherence_rate
    gamma_ba = free_space_backaction_rate(mode, wavelength, n_in)
    C_q = gamma_ba / gamma_th if gamma_th > 0 else math.inf
    required = min_input_flux_freespace(mode, temperature, wavelength, eta, gamma_th)
    condition = ground_state_condition(C_q, eta)
    bound = excess_noise_bound(eta, mode, temperature).one_sided
    return FeasibilityReport(gamma_ba, gamma_th, gamma_ba / mode.gamma, C_q, required.n_in, required.power, bound,
                             condition.satisfied,
                             (("mass", mode.mass), ("f0", mode.f0), ("Q", mode.Q), ("temperature", temperature),
                              ("wavelength", wavelength), ("n_in", n_in), ("eta", eta),
                              ("Gamma_th", gamma_th)))


def cavity_report(mode: OscillatorMode, temperature: float, cavity: CavitySpec, n_in: float,
                  eta: Optional[float] = None) -> FeasibilityReport:
    """
    Feasibility of a cavity readout driven with ``n_in`` input photons per second.
    """
    eta = cavity.eta if eta is None else eta
    n_cav = cavity.intracavity_photons(n_in)
    gamma_th = thermal_decoherence_rate(mode, temperature)
    _, gamma_ba = decoherence_rates(mode, temperature, cavity_backaction_psd(cavity, mode, n_cav))
    C_om = optomechanical_cooperativity(cavity, mode, n_cav)
    C_q = quantum_cooperativity(cavity, mode, temperature, n_cav)
    required = min_input_flux_cavity(mode, temperature, cavity, eta)
    condition = ground_state_condition(C_q, eta)
    bound = excess_noise_bound(eta, mode, temperature).one_sided
    return FeasibilityReport(gamma_ba, gamma_th, C_om, C_q, required.n_in, required.power, bound,
                             condition.satisfied,
                             (("mass", mode.mass), ("f0", mode.f0), ("Q", mode.Q), ("temperature", temperature),
                              ("wavelength", cavity.wavelength), ("length", cavity.length),
                              ("finesse", cavity.finesse), ("n_in", n_in), ("eta", eta)))


def critical_field(temperature: float, H0: float, T_c: float) -> float:
    """
    H_c = H0 (1 - T^2 / T_c^2), zero above T_c [A/m].
    """
    check_non_negative(temperature, "critical_field", "temperature")
    check_positive(H0, "critical_field", "H0")
    check_positive(T_c, "critical_field", "T_c")
    return max(H0 * (1.0 - temperature ** 2 / T_c ** 2), 0.0)


def quench_temperature(H: float, H0: float, T_c: float) -> float:
    """
    Temperature at which the field ``H`` at the surface reaches the critical field,
    T_c sqrt(1 - H / H0).

    :raises UnsatisfiableConditionError: if H >= H0 (no superconducting state)
    :rtype: float
    """
    check_non_negative(H, "quench_temperature", "H")
    check_positive(H0, "quench_temperature", "H0")
    check_positive(T_c, "quench_temperature", "T_c")
    if H >= H0:
        raise UnsatisfiableConditionError(f"no superconducting state: H = {H} A/m is not below H0 = {H0} A/m")
    return T_c * math.sqrt(1.0 - H / H0)


def heat_capacity_coefficient(particle: ParticleSpec, law: str) -> float:
    if law == "combined":
        return particle.heat_capacity_coeff
    if law == "electron":
        return particle.electron_heat_capacity_coeff
    raise ValueError(f"The energy_budget:law must be one of {HEAT_CAPACITY_LAWS}. Was {law}")


def energy_budget(particle: ParticleSpec, T_start: float, T_end: float, law: str = "combined") -> float:
    """
    Heat needed to warm the particle, integral of c m dT with c = coeff T^3:
    coeff m (T_end^4 - T_start^4) / 4.

    :param law: ``combined`` (lattice and electrons) or ``electron``
    :type law: str
    :raises ValueError: if T_start exceeds T_end
    :return: Delta E [J]
    :rtype: float
    """
    check_non_negative(T_start, "energy_budget", "T_start")
    check_non_negative(T_end, "energy_budget", "T_end")
    if T_start > T_end:
        raise ValueError(f"The energy_budget:T_start must not exceed T_end ({T_end}). Was {T_start}")
    coeff = heat_capacity_coefficient(particle, law)
    return coeff * particle.mass * (T_end ** 4 - T_start ** 4) / 4.0


def absorbed_power(n_in: float, wavelength: float, reflectivity: float) -> float:
    """
    Power absorbed from the probe beam, n_in * hbar omega * (1 - reflectivity) [W].
    """
    check_range(reflectivity, 0.0, 1.0, "absorbed_power", "reflectivity")
    return flux_to_power(n_in, wavelength) * (1.0 - reflectivity)


def levitation_lifetime(delta_E: float, power: float) -> Union[float, str]:
    """
    tau = Delta E / P. Without absorbed power the lifetime is bounded only by other heat sources and
    :data:`RADIATION_LIMITED` is returned instead of a number.
    """
    check_non_negative(delta_E, "levitation_lifetime", "delta_E")
    check_non_negative(power, "levitation_lifetime", "power")
    if power == 0.0:
        return RADIATION_LIMITED
    return delta_E / power


def lifetime_fit(data: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """
    Fits tau = a / (b + n_laser) by linear least squares on 1/tau = n_laser / a + b / a.

    :param data: (n_laser, tau) pairs
    :type data: Sequence[tuple]
    :raises FitError: for fewer than three points or a non-positive slope
    :return: (a, b)
    :rtype: tuple
    """
    points = np.asarray(data, dtype=float).reshape(-1, 2)
    if len(points) < 3:
        raise FitError(f"lifetime fit needs at least three points, got {len(points)}")
    if np.any(points[:, 1] <= 0):
        raise FitError("lifetime fit needs positive lifetimes")
    fit = stats.linregress(points[:, 0], 1.0 / points[:, 1])
    if not fit.slope > 0:
        raise FitError(f"lifetime fit: 1/tau does not grow with the laser flux (slope {fit.slope})")
    return 1.0 / fit.slope, fit.intercept / fit.slope


@dataclass(frozen=True)
class ThermalBudget(JsonRepr):
    """
    Heat budget between the start temperature and the quench temperature. ``lifetime`` is
    :data:`RADIATION_LIMITED` without absorbed power.
    """
    T_start: float
    T_quench: float
    delta_E: float
    absorbed_power: float
    lifetime: Union[float, str]
    law: str

    def __post_init__(self):
        if self.law not in HEAT_CAPACITY_LAWS:
            raise ValueError(f"The ThermalBudget:law must be one of {HEAT_CAPACITY_LAWS}. Was {self.law}")
        if not self.T_start < self.T_quench:
            raise ValueError(f"The ThermalBudget:T_start must be below T_quench ({self.T_quench}). Was {self.T_start}")

    def create_json_repr(self) -> dict:
        return {
            "T_start": self.T_start,
            "T_quench": self.T_quench,
            "delta_E_J": self.delta_E,
            "absorbed_power_W": self.absorbed_power,
            "lifetime_s": self.lifetime,
            "law": self.law,
        }


def thermal_budget(particle: ParticleSpec, T_start: float, H: float, power: float,
                   law: str = "combined") -> ThermalBudget:
    """
    Levitation lifetime of a particle at ``T_start`` in a surface field ``H`` heated with ``power``.

    :raises UnsatisfiableConditionError: if H >= H0
    :rtype: ThermalBudget
    """
    T_quench = min(quench_temperature(H, particle.H0, particle.T_c), particle.T_c)
    delta_E = energy_budget(particle, T_start, T_quench, law)
    budget = ThermalBudget(T_start, T_quench, delta_E, power, levitation_lifetime(delta_E, power), law)
    logger.info("Thermal budget (%s law): quench at %.3f K, Delta E = %.3e J, lifetime %s s", law, T_quench,
                delta_E, budget.lifetime)
    return budget


def finesse_scaling(mode: OscillatorMode, temperature: float, cavity: CavitySpec, finesses: Sequence[float],
                    eta: Optional[float] = None) -> List[Tuple[float, float]]:
    """
    Required input flux per finesse.
    """
    rows = []
    for finesse in finesses:
        variant = CavitySpec.from_finesse(cavity.wavelength, cavity.length, finesse, cavity.eta_det,
                                          cavity.kappa_ext / cavity.kappa)
        rows.append((float(finesse), min_input_flux_cavity(mode, temperature, variant, eta).n_in))
    return rows


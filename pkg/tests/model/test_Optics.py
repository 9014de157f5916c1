# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import math

import pytest

from maglev_twin.model.Mechanics import CONSTANTS
from maglev_twin.model.Optics import (FWHM_PER_SIGMA, BeamProfile, CavitySpec, LaserSpec, flux_to_power,
                                      photon_energy, power_to_flux)


def test_photon_energy_at_1550_nm():
    assert photon_energy(1.55e-6) == pytest.approx(1.28e-19, rel=1e-2)


def test_flux_and_power_are_inverse():
    power = flux_to_power(3e14, 637e-9)

    assert power_to_flux(power, 637e-9) == pytest.approx(3e14)


class TestLaserSpec:

    def test_default_local_oscillator(self, laser):
        assert laser.n_lo == pytest.approx(1e9)
        assert laser.detection_efficiency == 1.0

    def test_explicit_local_oscillator(self):
        assert LaserSpec(637e-9, 1e7, 5e6, n_lo=2e8).n_lo == 2e8

    def test_detected_exceeds_input(self):
        with pytest.raises(ValueError) as error:
            LaserSpec(637e-9, 1e7, 2e7)

        assert str(error.value) == "The LaserSpec:n_det must not exceed n_in (10000000.0). Was 20000000.0"

    @pytest.mark.parametrize("kwargs", [
        {"wavelength": 0.0, "n_in": 1e7, "n_det": 1e6},
        {"wavelength": 637e-9, "n_in": 0.0, "n_det": 1e6},
        {"wavelength": 637e-9, "n_in": 1e7, "n_det": -1.0},
    ])
    def test_non_positive(self, kwargs):
        with pytest.raises(ValueError):
            LaserSpec(**kwargs)


class TestBeamProfile:

    def test_on_slope_sits_on_inflection_point(self):
        beam = BeamProfile.on_slope(10e-6, 1e6)

        assert beam.sigma == pytest.approx(10e-6 / FWHM_PER_SIGMA)
        assert beam.relative_intensity(0.0, 0.0) == pytest.approx(math.exp(-0.5))

    def test_gradient_is_steepest_at_trap_centre(self):
        beam = BeamProfile.on_slope(10e-6, 1e6)
        centre = abs(beam.flux_gradient(0.0, 0.0)[0])

        for x in (-2e-6, 2e-6):
            assert abs(beam.flux_gradient(x, 0.0)[0]) < centre

    def test_second_axis(self):
        beam = BeamProfile.on_slope(10e-6, 1e6, axis=1)

        assert beam.offset[0] == 0.0
        assert beam.flux_gradient(0.0, 0.0)[0] == 0.0

    def test_offset_must_be_radial(self):
        with pytest.raises(TypeError):
            BeamProfile(offset=(0.0, 0.0, 0.0), fwhm=1e-5, peak_flux=1.0)


class TestCavitySpec:

    def test_finesse_round_trip(self, cavity):
        assert cavity.finesse == pytest.approx(1e5)
        assert cavity.kappa == pytest.approx(CONSTANTS.c_light * math.pi / (1e5 * 1e-2))

    def test_efficiency(self, cavity):
        assert cavity.eta == pytest.approx(0.75)
        assert CavitySpec.from_finesse(1.55e-6, 1e-2, 1e5, eta_det=0.75, coupling_ratio=0.5).eta == \
            pytest.approx(0.375)

    def test_intracavity_photons(self, cavity):
        assert cavity.intracavity_photons(1e15) == pytest.approx(4e15 / cavity.kappa)

    def test_frequency_pull(self, cavity, mode_200hz):
        assert cavity.G == pytest.approx(-cavity.omega_cav / 1e-2)
        assert cavity.g(mode_200hz) == pytest.approx(mode_200hz.z_zpf * cavity.omega_cav / 1e-2)

    def test_with_photons(self, cavity):
        loaded = cavity.with_photons(1e8)

        assert loaded.n_cav == 1e8
        assert cavity.n_cav == 0.0
        assert loaded.kappa == cavity.kappa

    def test_external_exceeds_total(self):
        with pytest.raises(ValueError) as error:
            CavitySpec(1.55e-6, 1e-2, kappa=1e6, kappa_ext=2e6)

        assert str(error.value).startswith("The CavitySpec:kappa_ext must not exceed kappa")

    @pytest.mark.parametrize("eta_det", [0.0, 1.5])
    def test_invalid_detection_efficiency(self, eta_det):
        with pytest.raises(ValueError):
            CavitySpec.from_finesse(1.55e-6, 1e-2, 1e5, eta_det=eta_det)

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import math

import pytest

from maglev_twin.model.Scenario import RunManifest, Scenario, StageOutcome, check_key
from maglev_twin.util.Exceptions import ConfigurationError
from maglev_twin.util.File import file_manifest_entry, get_sha256_hash_from_text
from maglev_twin.util.JsonValidator import MANIFEST_SCHEMA_PATH, JsonValidator

MINIMAL = "[scenario]\nseed = 7\n"


def _violations(text):
    with pytest.raises(ConfigurationError) as e:
        Scenario.from_text(text)
    return e.value.violations


def test_example_file(example_scenario_path):
    scenario = Scenario.from_file(example_scenario_path)

    assert scenario.get_name() == "example"
    assert scenario.get_seed() == 20260101
    assert scenario.get_stages() == ["friction", "camera", "intensity", "interferometric", "ringup", "calibration"]
    assert scenario.get("particle.mass") == pytest.approx(6e-9)
    assert scenario.get("particle.density") == pytest.approx(1.1e4)
    assert scenario.get("roughness.floor") == pytest.approx(955e-12)
    assert scenario.get("calibration.drive_currents") == pytest.approx([0.2e-3, 0.4e-3, 0.6e-3])


def test_defaults_fill_missing_keys():
    scenario = Scenario.from_text(MINIMAL)

    assert scenario.get("laser.wavelength") == pytest.approx(637e-9)
    assert scenario.get("lock.slew_limit") == math.inf
    assert scenario.get_output_dir() == "results"


def test_invalid_file_lists_every_problem(invalid_scenario_path):
    with pytest.raises(ConfigurationError) as e:
        Scenario.from_file(invalid_scenario_path)

    violations = e.value.violations
    assert any(v.startswith("lock.gain:") for v in violations)
    assert any("'seed' is a required property" in v for v in violations)
    assert any(v.startswith("trap.current") for v in violations)
    # physical invariants are checked only once the file itself is well-formed
    assert not any("LaserSpec" in v for v in violations)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError) as e:
        Scenario.from_file(str(tmp_path / "absent.scenario"))

    assert "does not exist" in e.value.violations[0]


def test_unknown_key_is_reported():
    violations = _violations(MINIMAL + "[trap]\ncoil_turns = 12\n")

    assert any(v.startswith("trap") and "coil_turns" in v for v in violations)


@pytest.mark.parametrize("text, expected", [
    ("[scenario]\nseed = 1\nstages = camera, friction\n", "must follow the sequence"),
    (MINIMAL + "[laser]\nn_in = 1e7 /s\nn_det = 2e7 /s\n", "The LaserSpec:n_det must not exceed n_in"),
    (MINIMAL + "[analysis]\nn_in_min = 1e12 /s\nn_in_max = 1e3 /s\n", "The analysis:n_in_min must be below"),
    (MINIMAL + "[calibration]\ndrive_frequency = 174 Hz\n", "near-resonant drive"),
])
def test_domain_violations(text, expected):
    assert any(expected in v for v in _violations(text))


def test_every_domain_violation_is_collected():
    violations = _violations(MINIMAL + "[laser]\nn_det = 2e7 /s\n[analysis]\nn_in_min = 1e13 /s\n")

    assert len(violations) == 2


def test_text_round_trip(example_scenario_path):
    scenario = Scenario.from_file(example_scenario_path)
    parsed = Scenario.from_text(scenario.to_text())

    assert parsed.get_values() == scenario.get_values()
    assert parsed.to_text() == scenario.to_text()


def test_with_value_parses_units():
    scenario = Scenario.from_text(MINIMAL)
    changed = scenario.with_value("interferometric_feedback.gamma_fb", "30 rad/s")

    assert changed.get("interferometric_feedback.gamma_fb") == 30.0
    assert scenario.get("interferometric_feedback.gamma_fb") == 22.0


def test_with_value_list():
    changed = Scenario.from_text(MINIMAL).with_value("analysis.finesses", "1e3, 1e4")

    assert changed.get("analysis.finesses") == [1e3, 1e4]


def test_with_value_unknown_key():
    with pytest.raises(ConfigurationError) as e:
        Scenario.from_text(MINIMAL).with_value("trap.coil_turns", 3)

    assert e.value.violations[0].startswith("unknown scenario key trap.coil_turns; valid keys are: scenario.name")


def test_with_value_wrong_unit():
    with pytest.raises(ConfigurationError) as e:
        Scenario.from_text(MINIMAL).with_value("trap.current", "2 m")

    assert e.value.violations[0].startswith("trap.current:")


def test_with_value_is_validated():
    with pytest.raises(ConfigurationError):
        Scenario.from_text(MINIMAL).with_value("laser.n_det", 1e9)


def test_check_key():
    check_key("ringup.duration")

    with pytest.raises(ConfigurationError):
        check_key("ringup")


def test_get_unknown_key():
    with pytest.raises(KeyError):
        Scenario.from_text(MINIMAL).get("ringup.length")


def test_hash_ignores_output_dir():
    scenario = Scenario.from_text(MINIMAL)

    assert scenario.with_output_dir("elsewhere").get_hash() == scenario.get_hash()
    assert scenario.with_value("scenario.seed", 8).get_hash() != scenario.get_hash()
    assert len(scenario.get_hash()) == 64


def test_built_objects():
    scenario = Scenario.from_text(MINIMAL)
    modes = scenario.modes()

    assert modes["z"].f0 == pytest.approx(165.8, rel=1e-3)
    assert modes["x"].f0 == pytest.approx(modes["z"].f0 / 2.0)
    assert scenario.laser().n_lo == pytest.approx(1e9)
    assert scenario.lock_config().update_rate == 20e3
    assert scenario.sim_config(3).dt == pytest.approx(5e-5)
    assert scenario.interferometric_feedback().center_frequency == pytest.approx(modes["z"].f0)
    assert scenario.cavity().finesse == pytest.approx(1e5)


def test_initial_state_is_circular_orbit():
    scenario = Scenario.from_text(MINIMAL)
    state = scenario.initial_state(("x", "y", "z"))

    assert state.position == (50e-6, 0.0, 300e-9)
    assert state.velocity[1] == pytest.approx(50e-6 * scenario.modes()["y"].omega0)


def test_n_in_grid():
    grid = Scenario.from_text(MINIMAL).n_in_grid()

    assert len(grid) == 91
    assert grid[0] == pytest.approx(1e3)
    assert grid[-1] == pytest.approx(1e12)


def test_roughness_disabled(rng):
    assert Scenario.from_text(MINIMAL + "[roughness]\nenabled = false\n").roughness(rng) is None


def test_default_roughness_is_flat_around_axial_frequency(rng):
    scenario = Scenario.from_text(MINIMAL)
    f0 = scenario.modes()["z"].f0

    assert scenario.roughness(rng).flatness((0.5 * f0, 2.0 * f0)) < 2.0


def test_slow_rotation_is_rejected():
    violations = _violations(MINIMAL + "[roughness]\nrotation_rate = 2 rad/s\n")

    assert len(violations) == 1
    assert violations[0].startswith("The roughness:rotation_rate must keep the excess noise flat within a factor 2.0")
    assert violations[0].endswith("Was 2.0")


def test_unknown_rotation_rate_solves_correlation_time(rng):
    scenario = Scenario.from_text(MINIMAL + "[roughness]\nrotation_rate = 0 rad/s\n")

    assert scenario.roughness(rng).get_amplitude() == pytest.approx(50e-9)


class TestStageOutcome:

    def test_invalid_status(self):
        with pytest.raises(ValueError) as e:
            StageOutcome("camera", status="finished")

        assert str(e.value) == "The StageOutcome:status must be one of ('completed', 'aborted', 'skipped'). " \
                               "Was finished"

    def test_json_repr(self):
        outcome = StageOutcome("ringup", initial_amplitude=1e-9, final_amplitude=2e-9, results={"n0": 1.5})

        assert StageOutcome.from_json_repr(outcome.create_json_repr()) == outcome


def _manifest():
    return RunManifest("fast", get_sha256_hash_from_text("fast"), 1234, "0.3.0", "2026-01-01T00:00:00Z")


class TestRunManifest:

    def test_add_stage(self):
        manifest = _manifest().add_stage(StageOutcome("camera", final_amplitude=1e-6))

        assert manifest.get_stage("camera").final_amplitude == 1e-6
        assert manifest.get_stage("ringup") is None
        assert manifest.get_status() == "completed"

    def test_add_stage_wrong_type(self):
        with pytest.raises(ValueError) as e:
            _manifest().add_stage("camera")

        assert str(e.value) == "Argument outcome must be of type StageOutcome."

    def test_aborted_stage(self):
        manifest = _manifest().add_stage(StageOutcome("camera", status="aborted"))

        assert manifest.get_status() == "aborted"

    def test_error(self):
        manifest = _manifest().set_error("particle lost")

        assert manifest.get_status() == "aborted"
        assert manifest.create_json_repr()["error"] == "particle lost"

    def test_name_length(self):
        with pytest.raises(ValueError):
            RunManifest("", get_sha256_hash_from_text(""), 0, "0.3.0", "now")

    def test_add_file(self, tmp_path):
        path = tmp_path / "data" / "trace.csv"
        path.parent.mkdir()
        path.write_text("t,z\n", encoding="utf-8")

        manifest = _manifest().add_file(str(path), str(tmp_path))
        path.write_text("t,z\n0.0,1.0\n", encoding="utf-8")
        manifest.add_file(str(path), str(tmp_path))

        assert manifest.get_files() == [file_manifest_entry(str(path), str(tmp_path))]
        assert manifest.get_files()[0]["path"] == "data/trace.csv"
        assert manifest.get_file("trace.csv") == "data/trace.csv"
        assert manifest.get_file("other.csv") is None

    def test_json_repr_matches_schema(self, tmp_path):
        path = tmp_path / "scenario.ini"
        path.write_text(MINIMAL, encoding="utf-8")
        manifest = _manifest().add_stage(StageOutcome("interferometric", results={"agree": True, "floor": 1e-12}))
        manifest.add_file(str(path), str(tmp_path))

        json_repr = manifest.create_json_repr()

        assert JsonValidator(MANIFEST_SCHEMA_PATH).validate_json(json_repr)
        assert RunManifest.from_json_repr(json_repr).create_json_repr() == json_repr

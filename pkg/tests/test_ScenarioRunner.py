# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import json
import math
import os
import sys
from unittest.mock import patch

import pytest

from conftest import FAST_SCENARIO_TEXT
from maglev_twin.ScenarioRunner import (ANALYSES_NAME, MANIFEST_NAME, OCCUPATION_NAME, SCENARIO_COPY_NAME,
                                        SPECTRUM_NAME, SWEEP_SUMMARY_NAME, SWEEP_TABLE_NAME, WORKERS_ENV,
                                        ScenarioRunner, emit_plotdata, feasibility_analyses, run_scenario, sweep)
from maglev_twin.analysis.Feasibility import min_input_flux_cavity, min_input_flux_freespace
from maglev_twin.model.Scenario import Scenario
from maglev_twin.util.Exceptions import ConfigurationError, StageAbortedError
from maglev_twin.util.File import file_manifest_entry, read_columns
from maglev_twin.util.JsonValidator import MANIFEST_SCHEMA_PATH, JsonValidator


def _load(file_path):
    with open(file_path, 'r', encoding='utf-8') as file:
        return json.loads(file.read())


def test_run_writes_manifest(light_scenario):
    manifest = ScenarioRunner(light_scenario).run()
    run_dir = light_scenario.get_output_dir()

    content = _load(os.path.join(run_dir, MANIFEST_NAME))

    assert JsonValidator(MANIFEST_SCHEMA_PATH).validate_json(content)
    assert content == manifest.create_json_repr()
    assert content["status"] == "completed"
    assert content["seed"] == 7
    assert content["scenario_hash"] == light_scenario.get_hash()
    assert [stage["stage"] for stage in content["stages"]] == ["friction", "feasibility"]
    paths = [entry["path"] for entry in content["files"]]
    assert {SCENARIO_COPY_NAME, ANALYSES_NAME, OCCUPATION_NAME} == set(paths)
    for entry in content["files"]:
        assert entry == file_manifest_entry(os.path.join(run_dir, entry["path"]), run_dir)


def test_friction_keeps_amplitude(light_scenario):
    outcome = ScenarioRunner(light_scenario).run().get_stage("friction")

    assert outcome.status == "completed"
    assert outcome.initial_amplitude == outcome.final_amplitude
    assert outcome.initial_amplitude == pytest.approx(50e-6, rel=1e-6)


def test_scenario_copy_reproduces_hash(light_scenario):
    ScenarioRunner(light_scenario).run()

    copy = Scenario.from_file(os.path.join(light_scenario.get_output_dir(), SCENARIO_COPY_NAME))

    assert copy.get_hash() == light_scenario.get_hash()


def test_rerun_is_identical_except_creation_time(light_scenario):
    run_dir = light_scenario.get_output_dir()
    ScenarioRunner(light_scenario).run()
    first = _load(os.path.join(run_dir, MANIFEST_NAME))
    ScenarioRunner(light_scenario).run()
    second = _load(os.path.join(run_dir, MANIFEST_NAME))

    first.pop("created")
    second.pop("created")
    assert first == second


def test_feasibility_results(light_scenario):
    ScenarioRunner(light_scenario).run()

    analyses = _load(os.path.join(light_scenario.get_output_dir(), ANALYSES_NAME))
    outcome = _load(os.path.join(light_scenario.get_output_dir(), MANIFEST_NAME))["stages"][-1]

    mode = light_scenario.modes()["z"]
    assert analyses["cavity"]["n_in_required"] == pytest.approx(
        min_input_flux_cavity(mode, 15e-3, light_scenario.cavity()).n_in)
    assert analyses["freespace"]["n_in_required"] == pytest.approx(
        min_input_flux_freespace(mode, 3.0, 637e-9, 1.0).n_in)
    assert analyses["thermal"]["lifetime_s"] == pytest.approx(12000.0, rel=0.1)
    assert analyses["excess_noise"]["text"].startswith("excess imprecision bound")
    assert outcome["results"]["cavity.n_in_required"] == analyses["cavity"]["n_in_required"]
    assert outcome["message"] is None


def test_feasibility_skips_unsatisfiable(light_scenario, caplog):
    scenario = light_scenario.with_value("cavity.eta_det", 0.1)

    analyses, messages = feasibility_analyses(scenario)

    assert "cavity" not in analyses
    assert "excess_noise" not in analyses
    assert "thermal" in analyses
    assert any(message.startswith("cavity: ") for message in messages)
    assert "Skipped cavity" in caplog.text


def test_aborted_stage_still_writes_manifest(light_scenario):
    # The package re-exports the ScenarioRunner class, which shadows the module of the same name for
    # dotted patch targets, so patch the module object directly.
    with patch.object(sys.modules["maglev_twin.ScenarioRunner"], "radial_rms") as mock_rms:
        mock_rms.side_effect = StageAbortedError("particle lost at t = 0 s")

        with pytest.raises(StageAbortedError):
            ScenarioRunner(light_scenario).run()

    content = _load(os.path.join(light_scenario.get_output_dir(), MANIFEST_NAME))

    assert JsonValidator(MANIFEST_SCHEMA_PATH).validate_json(content)
    assert content["status"] == "aborted"
    assert content["error"] == "StageAbortedError: particle lost at t = 0 s"
    assert content["stages"] == [{"stage": "friction", "status": "aborted", "initial_amplitude": None,
                                  "final_amplitude": None, "results": {},
                                  "message": "particle lost at t = 0 s"}]


def test_run_scenario_from_file(light_scenario_path, tmp_path):
    manifest = run_scenario(light_scenario_path)

    assert manifest.get_status() == "completed"
    assert os.path.exists(tmp_path / "run" / MANIFEST_NAME)


def test_run_scenario_output_dir_override(light_scenario_path, tmp_path):
    run_scenario(light_scenario_path, str(tmp_path / "elsewhere"))

    assert os.path.exists(tmp_path / "elsewhere" / MANIFEST_NAME)
    assert not os.path.exists(tmp_path / "run")


def test_run_scenario_invalid_file(invalid_scenario_path):
    with pytest.raises(ConfigurationError):
        run_scenario(invalid_scenario_path)


class TestSweep:

    def test_runs_every_value(self, light_scenario, tmp_path):
        manifests = sweep(light_scenario, "thermal.absorbed_power", ["3 pW", "6 pW"], str(tmp_path), workers=1)
        sweep_dir = tmp_path / "sweep_thermal_absorbed_power"

        summary = _load(sweep_dir / SWEEP_SUMMARY_NAME)

        assert [manifest.get_status() for manifest in manifests] == ["completed", "completed"]
        assert [entry["value"] for entry in summary["runs"]] == pytest.approx([3e-12, 6e-12])
        assert [entry["manifest"] for entry in summary["runs"]] == ["run_000/manifest.json", "run_001/manifest.json"]
        assert [entry["seed"] for entry in summary["runs"]] == [manifest.get_seed() for manifest in manifests]
        assert len({manifest.get_seed() for manifest in manifests} | {7}) == 3
        lifetimes = [manifest.get_stage("feasibility").results["thermal.lifetime_s"] for manifest in manifests]
        assert lifetimes[0] == pytest.approx(2.0 * lifetimes[1])

    def test_summary_table(self, light_scenario, tmp_path):
        sweep(light_scenario, "thermal.absorbed_power", [3e-12, 6e-12], str(tmp_path), workers=1)

        table = read_columns(tmp_path / "sweep_thermal_absorbed_power" / SWEEP_TABLE_NAME)

        assert table["value"].tolist() == [3e-12, 6e-12]
        assert table["#"]["parameter"] == "thermal.absorbed_power"
        # no cooling stage in this scenario
        assert all(math.isnan(value) for value in table["camera_final"])

    def test_seeds_are_reproducible(self, light_scenario, tmp_path):
        first = sweep(light_scenario, "thermal.absorbed_power", [3e-12], str(tmp_path / "a"), workers=1)
        second = sweep(light_scenario, "thermal.absorbed_power", [3e-12], str(tmp_path / "b"), workers=1)

        assert first[0].get_seed() == second[0].get_seed()

    def test_empty_values(self, light_scenario, tmp_path):
        assert sweep(light_scenario, "thermal.absorbed_power", [], str(tmp_path), workers=1) == []

        summary = _load(tmp_path / "sweep_thermal_absorbed_power" / SWEEP_SUMMARY_NAME)
        assert summary["runs"] == []

    def test_unknown_parameter(self, light_scenario, tmp_path):
        with pytest.raises(ConfigurationError) as e:
            sweep(light_scenario, "trap.spin", [1.0], str(tmp_path))

        assert "unknown scenario key trap.spin; valid keys are: scenario.name" in str(e.value)

    def test_invalid_value(self, light_scenario, tmp_path):
        with pytest.raises(ConfigurationError):
            sweep(light_scenario, "thermal.absorbed_power", ["3 furlongs"], str(tmp_path))

    def test_workers_from_environment(self, light_scenario, tmp_path, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "1")

        manifests = sweep(light_scenario, "thermal.absorbed_power", [3e-12, 6e-12], str(tmp_path))

        assert len(manifests) == 2

    @pytest.mark.parametrize("workers", ["0", "many"])
    def test_invalid_worker_count(self, light_scenario, tmp_path, monkeypatch, workers):
        monkeypatch.setenv(WORKERS_ENV, workers)

        with pytest.raises(ConfigurationError) as e:
            sweep(light_scenario, "thermal.absorbed_power", [3e-12, 6e-12], str(tmp_path))

        assert f"{WORKERS_ENV} must be a positive integer" in str(e.value)


class TestEmitPlotdata:

    def test_unknown_tag(self, light_scenario):
        ScenarioRunner(light_scenario).run()

        with pytest.raises(ConfigurationError) as e:
            emit_plotdata(os.path.join(light_scenario.get_output_dir(), MANIFEST_NAME), "fig9")

        assert e.value.violations == ["unknown figure tag 'fig9'; available tags: fig4a, fig5"]

    def test_fig5_from_run(self, light_scenario, tmp_path):
        ScenarioRunner(light_scenario).run()

        written = emit_plotdata(os.path.join(light_scenario.get_output_dir(), MANIFEST_NAME), "fig5",
                                str(tmp_path / "plots"))
        table = read_columns(written[0])

        assert written == [str(tmp_path / "plots" / "fig5.csv")]
        assert len(table["n_in"]) == 15
        assert sorted(set(table["finesse"].tolist())) == [1e4, 1e5, 1e6]

    def test_fig5_from_sweep_keeps_first_run(self, light_scenario, tmp_path):
        sweep(light_scenario, "thermal.absorbed_power", [3e-12, 6e-12], str(tmp_path), workers=1)

        written = emit_plotdata(str(tmp_path / "sweep_thermal_absorbed_power" / SWEEP_SUMMARY_NAME), "fig5")

        assert len(read_columns(written[0])["n_in"]) == 15

    def test_fig5_needs_feasibility(self, light_scenario):
        scenario = light_scenario.with_value("analysis.feasibility", False)
        ScenarioRunner(scenario).run()

        with pytest.raises(ConfigurationError) as e:
            emit_plotdata(os.path.join(scenario.get_output_dir(), MANIFEST_NAME), "fig5")

        assert "feasibility = true" in str(e.value)

    def test_fig4a_needs_interferometric_stage(self, light_scenario):
        ScenarioRunner(light_scenario).run()

        with pytest.raises(ConfigurationError) as e:
            emit_plotdata(os.path.join(light_scenario.get_output_dir(), MANIFEST_NAME), "fig4a")

        assert "fig4a needs the interferometric spectrum" in str(e.value)


@pytest.fixture(scope="module")
def fast_run(tmp_path_factory):
    scenario = Scenario.from_text(FAST_SCENARIO_TEXT).with_output_dir(str(tmp_path_factory.mktemp("fast")))
    return scenario, ScenarioRunner(scenario).run()


class TestCoolingSequence:

    def test_all_stages_complete(self, fast_run):
        _, manifest = fast_run

        assert manifest.get_status() == "completed"
        assert [outcome.stage for outcome in manifest.get_stages()] == ["friction", "camera", "intensity",
                                                                        "interferometric", "ringup"]

    def test_camera_cools_radial_motion(self, fast_run):
        outcome = fast_run[1].get_stage("camera")

        assert outcome.final_amplitude < outcome.initial_amplitude

    def test_interferometric_results(self, fast_run):
        results = fast_run[1].get_stage("interferometric").results

        assert results["gamma_fb"] == 22.0
        assert results["floor_asd"] > 0.0
        assert results["lock_gain_hz_per_volt"] == 8000.0

    def test_ring_up_fit(self, fast_run):
        results = fast_run[1].get_stage("ringup").results

        assert results["Gamma_th"] > 0.0
        assert 0.0 <= results["r_squared"] <= 1.0

    def test_exports_listed(self, fast_run):
        scenario, manifest = fast_run

        for name in (SPECTRUM_NAME, "interferometric_trajectory.csv", "ringup_energy.csv",
                     "camera_amplitudes.csv", "intensity_amplitudes.csv"):
            assert manifest.get_file(name) == name
            assert os.path.exists(os.path.join(scenario.get_output_dir(), name))

    def test_fig4a(self, fast_run, tmp_path):
        scenario, _ = fast_run

        written = emit_plotdata(os.path.join(scenario.get_output_dir(), MANIFEST_NAME), "fig4a", str(tmp_path))
        table = read_columns(written[0])

        assert os.path.basename(written[0]) == "fig4a_gamma_fb_22.0.csv"
        assert [name for name in table if name != "#"] == ["f_Hz", "asd"]
        assert table["#"]["gamma_fb_rad_per_s"] == "22.0"

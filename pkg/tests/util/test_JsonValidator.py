# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

import json

from maglev_twin.util.JsonValidator import MANIFEST_SCHEMA_PATH, SCENARIO_SCHEMA_PATH, JsonValidator


def test_manifest_file_valid(valid_manifest_path):
    validator = JsonValidator(MANIFEST_SCHEMA_PATH)
    assert validator.validate_file(valid_manifest_path)


def test_manifest_file_invalid(invalid_manifest_path, caplog):
    validator = JsonValidator(MANIFEST_SCHEMA_PATH)
    assert not validator.validate_file(invalid_manifest_path)
    assert "scenario_hash: 'not-a-hash' does not match" in caplog.text


def test_manifest_collect_errors(invalid_manifest_path):
    with open(invalid_manifest_path, 'r', encoding='utf-8') as file:
        manifest = json.load(file)

    errors = JsonValidator(MANIFEST_SCHEMA_PATH).collect_errors(manifest)

    assert len(errors) == 4
    assert any(error.startswith("files.0: 'md5' is a required property") for error in errors)
    assert any(error.startswith("stages.0.stage:") for error in errors)
    assert any(error.startswith("status:") for error in errors)


def test_default_schema_is_scenario():
    validator = JsonValidator()
    assert validator.validate_json({"scenario": {"seed": 1}})


def test_scenario_required_seed():
    errors = JsonValidator(SCENARIO_SCHEMA_PATH).collect_errors({"scenario": {"name": "x"}})

    assert errors == ["scenario: 'seed' is a required property"]


def test_scenario_root_errors():
    errors = JsonValidator(SCENARIO_SCHEMA_PATH).collect_errors({})

    assert errors == ["<root>: 'scenario' is a required property"]


def test_scenario_unknown_section():
    validator = JsonValidator(SCENARIO_SCHEMA_PATH)
    assert not validator.validate_json({"scenario": {"seed": 1}, "levitation": {}})

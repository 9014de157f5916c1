# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
This module contains the JsonValidator class.
"""

import json
import logging
import os
from typing import List

import jsonschema

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "schema")
SCENARIO_SCHEMA_PATH = os.path.join(SCHEMA_DIR, "scenario.json")
MANIFEST_SCHEMA_PATH = os.path.join(SCHEMA_DIR, "manifest.json")

logger = logging.getLogger(__name__)


class JsonValidator:
    """
    Validator for scenario dictionaries and run manifests.
    """

    def __init__(self, json_schema_file_path: str = SCENARIO_SCHEMA_PATH):
        """
        Constructor.

        :param json_schema_file_path: path to Json schema file
        :type json_schema_file_path: str
        """

        with open(json_schema_file_path, 'r', encoding='utf-8') as file:
            self.__schema = json.loads(file.read())

    def collect_errors(self, json_object: dict) -> List[str]:
        """
        Validates the given json object against the schema and returns every violation found.

        :param json_object: dictionary which represents json formatted data
        :type json_object: dict
        :return: one message per violation, prefixed with the path of the offending entry
        :rtype: list
        """

        validator = jsonschema.Draft7Validator(self.__schema)
        errors = sorted(validator.iter_errors(json_object), key=lambda e: list(e.path))
        messages = []
        for error in errors:
            location = ".".join(str(part) for part in error.path) or "<root>"
            messages.append(f"{location}: {error.message}")
            for sub_error in sorted(error.context or [], key=lambda e: list(e.schema_path)):
                logger.debug("%s, %s", list(sub_error.schema_path), sub_error.message)
        return messages

    def validate_json(self, json_object: dict) -> bool:
        """
        Validates the given json object against the schema.

        :param json_object: dictionary which represents json formatted data
        :type json_object: dict
        :return: true if the validation was successful, otherwise false
        :rtype: boolean
        """
        messages = self.collect_errors(json_object)
        for message in messages:
            logger.warning(message)
        return len(messages) == 0

    def validate_file(self, json_file_path: str) -> bool:
        """
        Validates the given json file against the schema.

        :param json_file_path: path to the json file
        :type json_file_path: str
        :return: true if the validation was successful, otherwise false
        :rtype: boolean
        """

        with open(json_file_path, 'r', encoding='utf-8') as file:
            json_content = json.loads(file.read())
        return self.validate_json(json_content)

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
This module contains the abstract class JsonRepr.
"""

from abc import ABC, abstractmethod


class JsonRepr(ABC):
    """
    Interface for all data classes, which should be translated into Json.
    """

    @abstractmethod
    def create_json_repr(self) -> dict:
        """
        :return: the JSON representation.
        :rtype: dict
        """
        raise NotImplementedError("To be implemented")  # pragma: no cover

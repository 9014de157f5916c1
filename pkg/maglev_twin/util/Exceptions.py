# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Exception hierarchy of the package. Each family maps onto one exit code of the command line
front end:

    ConfigurationError          -> 2
    StageAbortedError (+ subs)  -> 3
    NumericalInstabilityError   -> 4
"""

from typing import Iterable


class ConfigurationError(ValueError):
    """
    Raised when a scenario or sub-configuration violates one or more invariants. All violations
    are collected, not only the first one.
    """

    def __init__(self, violations: Iterable[str]):
        """
        Constructor

        :param violations: human readable description of every violated invariant
        :type violations: Iterable[str]
        """
        self.violations = list(violations)
        super().__init__("Invalid configuration:\n  - " + "\n  - ".join(self.violations))


class NearResonantDriveError(ValueError):
    """
    The driven-response approximation requires the drive to be well separated from resonance.
    """


class UnsatisfiableConditionError(ValueError):
    """
    A requested physical condition cannot be met for the given inputs, e.g. an efficiency at or
    below 1/9, a field above the critical field or a noiseless measurement.
    """


class StageAbortedError(RuntimeError):
    """
    A stage of the experimental sequence could not be completed.
    """


class ParticleLostError(StageAbortedError):
    """
    The particle left the camera field of view.
    """


class AntiDampingError(StageAbortedError):
    """
    The feedback heats instead of cools (wrong sign or phase).
    """


class LockLostError(StageAbortedError):
    """
    The phase lock left its capture range.
    """


class FitError(StageAbortedError):
    """
    A fit could not be performed on the supplied data.
    """


class NumericalInstabilityError(ArithmeticError):
    """
    The integration produced non-finite values or left the configured displacement bound.
    """

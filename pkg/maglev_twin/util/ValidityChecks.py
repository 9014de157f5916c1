# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Module containing checking methods to ensure that the physical objects of a scenario are
constructed in a valid manner. This guarantees that errors are found early during setup of a
simulation, before any time is spent integrating.
"""

import math
from typing import Callable, List


def check_positive(value: float, obj: str, prop: str) -> float:
    """
    Checks that the given property is a finite number strictly greater than zero.

    :param value: value to check
    :type value: float
    :param obj: name of the object containing the property
    :type obj: str
    :param prop: name of the property being checked
    :type prop: str
    :raises ValueError: if the value is not finite or not positive
    :return: the original value if valid
    :rtype: float
    """
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"The {obj}:{prop} must be a finite positive number. Was {value}")
    return value


def check_non_negative(value: float, obj: str, prop: str) -> float:
    """
    Checks that the given property is a finite number greater than or equal to zero.

    :param value: value to check
    :type value: float
    :param obj: name of the object containing the property
    :type obj: str
    :param prop: name of the property being checked
    :type prop: str
    :raises ValueError: if the value is not finite or negative
    :return: the original value if valid
    :rtype: float
    """
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"The {obj}:{prop} must be a finite non-negative number. Was {value}")
    return value


def check_range(value: float, min_val: float, max_val: float, obj: str, prop: str) -> float:
    """
    Checks that the given property lies within the closed interval [min_val, max_val].

    :param value: value to check
    :type value: float
    :param min_val: minimum allowed value (inclusive)
    :type min_val: float
    :param max_val: maximum allowed value (inclusive)
    :type max_val: float
    :param obj: name of the object containing the property
    :type obj: str
    :param prop: name of the property being checked
    :type prop: str
    :raises ValueError: if the value is outside of the bounds
    :return: the original value if valid
    :rtype: float
    """
    if not min_val <= value <= max_val:
        raise ValueError(f"The {obj}:{prop} must be between {min_val} and {max_val}. Was {value}")
    return value


def check_finite(value: float, obj: str, prop: str) -> float:
    """
    Checks that the given property is a finite number.

    :raises ValueError: if the value is NaN or infinite
    :return: the original value if valid
    :rtype: float
    """
    if not math.isfinite(value):
        raise ValueError(f"The {obj}:{prop} must be finite. Was {value}")
    return value


def check_string_length(value: str, min_len: int, max_len: int, obj: str, prop: str) -> str:
    """
    Checks that the length of a name lies within the given bounds.

    :raises ValueError: if the string length is not within the specified bounds
    :return: the original string if valid
    :rtype: str
    """
    if len(value) not in range(min_len, max_len + 1):
        raise ValueError(
            f"The {obj}:{prop} must have a length between {min_len} and {max_len} characters. "
            f"Was {len(value)} -> {value}"
        )
    return value


def collect_violations(*checks: Callable[[], object]) -> List[str]:
    """
    Runs every check and collects the messages of those raising ValueError or TypeError, so that
    a configuration error can list every violated invariant instead of only the first one.

    :param checks: zero-argument callables, typically constructors wrapped in lambdas
    :type checks: Callable
    :return: list of violation messages, empty if all checks passed
    :rtype: list
    """
    violations = []
    for check in checks:
        try:
            check()
        except (ValueError, TypeError) as error:
            violations.append(str(error))
    return violations

# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
This module reads and writes the line-oriented scenario format: ``[section]`` headers,
``key = value`` lines, ``#`` comments and SI quantities with an optional unit suffix, for example
``wavelength = 637 nm``. Values are converted to SI once, here. Parsing never stops at the first
problem; every malformed value is reported.
"""

import configparser
import math
import re
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

SCENARIO_STAGES = ("friction", "camera", "intensity", "interferometric", "ringup", "calibration")

# suffix -> (factor to SI, dimension)
UNITS: Dict[str, Tuple[float, str]] = {
    "m": (1.0, "m"), "cm": (1e-2, "m"), "mm": (1e-3, "m"), "um": (1e-6, "m"), "nm": (1e-9, "m"),
    "pm": (1e-12, "m"), "fm": (1e-15, "m"),
    "kg": (1.0, "kg"), "g": (1e-3, "kg"), "mg": (1e-6, "kg"), "ug": (1e-9, "kg"), "ng": (1e-12, "kg"),
    "kg/m^3": (1.0, "kg/m^3"), "g/cm^3": (1e3, "kg/m^3"),
    "s": (1.0, "s"), "ms": (1e-3, "s"), "us": (1e-6, "s"), "min": (60.0, "s"),
    "Hz": (1.0, "Hz"), "kHz": (1e3, "Hz"), "MHz": (1e6, "Hz"), "mHz": (1e-3, "Hz"),
    "1/s": (1.0, "1/s"), "/s": (1.0, "1/s"),
    "rad/s": (1.0, "rad/s"),
    "rad": (1.0, "rad"), "deg": (math.pi / 180.0, "rad"),
    "K": (1.0, "K"), "mK": (1e-3, "K"), "uK": (1e-6, "K"),
    "W": (1.0, "W"), "mW": (1e-3, "W"), "uW": (1e-6, "W"), "nW": (1e-9, "W"), "pW": (1e-12, "W"),
    "T": (1.0, "T"), "mT": (1e-3, "T"), "uT": (1e-6, "T"), "nT": (1e-9, "T"),
    "T/m": (1.0, "T/m"), "T/m/A": (1.0, "T/m/A"), "T/A": (1.0, "T/A"), "mT/A": (1e-3, "T/A"),
    "A/m": (1.0, "A/m"), "A": (1.0, "A"), "mA": (1e-3, "A"), "uA": (1e-6, "A"),
    "N": (1.0, "N"), "nN": (1e-9, "N"), "pN": (1e-12, "N"), "fN": (1e-15, "N"),
    "N s": (1.0, "N s"), "N*s": (1.0, "N s"),
    "J": (1.0, "J"),
    "m/sqrtHz": (1.0, "m/sqrtHz"), "nm/sqrtHz": (1e-9, "m/sqrtHz"), "pm/sqrtHz": (1e-12, "m/sqrtHz"),
    "fm/sqrtHz": (1e-15, "m/sqrtHz"),
    "Hz/V": (1.0, "Hz/V"), "kHz/V": (1e3, "Hz/V"),
    "Hz/s": (1.0, "Hz/s"),
}

_NUMBER = re.compile(r"^\s*([-+]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?))\s*(.*?)\s*$")


@dataclass(frozen=True)
class FieldSpec:
    """
    One recognised scenario key. ``kind`` is a dimension of :data:`UNITS`, ``1`` for a pure number,
    or one of ``int``, ``bool``, ``str``; a ``list:`` prefix makes it a comma-separated list.
    """
    kind: str
    default: Any = None
    required: bool = False


FIELDS: Dict[str, Dict[str, FieldSpec]] = {
    "scenario": {
        "name": FieldSpec("str", "maglev"),
        "seed": FieldSpec("int", required=True),
        "output_dir": FieldSpec("str", "results"),
        "stages": FieldSpec("list:str", list(SCENARIO_STAGES)),
    },
    "particle": {
        "mass": FieldSpec("kg", 6e-9),
        "density": FieldSpec("kg/m^3", 1.1e4),
        "reflectivity": FieldSpec("1", 0.63),
        "T_c": FieldSpec("K", 7.2),
        "H0": FieldSpec("A/m", 6.4e4),
        "roughness": FieldSpec("m", 50e-9),
    },
    "trap": {
        "axial_gradient_per_ampere": FieldSpec("T/m/A", 50.0),
        "current": FieldSpec("A", 2.0),
        "quality_factor": FieldSpec("1", 2.6e7),
        "radial_quality_factor": FieldSpec("1", 1e5),
    },
    "laser": {
        "wavelength": FieldSpec("m", 637e-9),
        "n_in": FieldSpec("1/s", 1e7),
        "n_det": FieldSpec("1/s", 1e7),
        "lo_ratio": FieldSpec("1", 100.0),
    },
    "beam": {
        "fwhm": FieldSpec("m", 4e-6),
        "peak_flux": FieldSpec("1/s", 2e5),
    },
    "camera": {
        "pixel_pitch": FieldSpec("m", 0.3e-6),
        "centroid_noise": FieldSpec("m", 100e-9),
        "field_of_view": FieldSpec("m", 200e-6),
    },
    "lock": {
        "gain": FieldSpec("Hz/V", 8000.0),
        "slew_limit": FieldSpec("Hz/s", math.inf),
        "enabled": FieldSpec("bool", True),
    },
    "sim": {
        "sample_rate": FieldSpec("Hz", 20e3),
        "decimation": FieldSpec("int", 1),
        "temperature": FieldSpec("K", 1.27e9),
        "displacement_bound": FieldSpec("m", 1e-3),
        "latency": FieldSpec("int", 1),
        "initial_radial_amplitude": FieldSpec("m", 50e-6),
        "initial_axial_amplitude": FieldSpec("m", 300e-9),
    },
    "roughness": {
        "enabled": FieldSpec("bool", True),
        "floor": FieldSpec("m/sqrtHz", 955e-12),
        "rotation_rate": FieldSpec("rad/s", 100.0),
        "correlation_length": FieldSpec("m", 1e-6),
        "reference_frequency": FieldSpec("Hz", 160.0),
    },
    "camera_feedback": {
        "enabled": FieldSpec("bool", True),
        "impulse": FieldSpec("N s", 5e-13),
        "separation": FieldSpec("1", 0.2),
        "wait": FieldSpec("1", 2.0),
        "iterations": FieldSpec("int", 25),
    },
    "intensity_feedback": {
        "enabled": FieldSpec("bool", True),
        "axis": FieldSpec("str", "x"),
        "bandwidth": FieldSpec("Hz", 20.0),
        "gamma_fb": FieldSpec("rad/s", 60.0),
        "phase": FieldSpec("rad", math.pi / 2),
        "force_limit": FieldSpec("N", 1e-9),
        "duration": FieldSpec("s", 2.0),
    },
    "interferometric_feedback": {
        "enabled": FieldSpec("bool", True),
        "bandwidth": FieldSpec("Hz", 20.0),
        "gamma_fb": FieldSpec("rad/s", 22.0),
        "phase": FieldSpec("rad", math.pi / 2),
        "force_limit": FieldSpec("N", 1e-9),
        "duration": FieldSpec("s", 2.0),
    },
    "ringup": {
        "duration": FieldSpec("s", 10.0),
        "detect_break": FieldSpec("bool", True),
    },
    "calibration": {
        "drive_frequency": FieldSpec("Hz", 217.0),
        "field_per_ampere": FieldSpec("T/A", 1e-3),
        "drive_currents": FieldSpec("list:A", [0.2e-3, 0.4e-3, 0.6e-3]),
        "trap_frequencies": FieldSpec("list:Hz", [174.0, 186.0, 233.0]),
        "duration": FieldSpec("s", 4.0),
        # a quarter fringe at the default wavelength
        "mirror_amplitude": FieldSpec("m", 637e-9 / 8.0),
        "mirror_duration": FieldSpec("s", 0.5),
        "amplitude_tolerance": FieldSpec("1", 0.1),
    },
    "cavity": {
        "wavelength": FieldSpec("m", 1.55e-6),
        "length": FieldSpec("m", 1e-2),
        "finesse": FieldSpec("1", 1e5),
        "eta_det": FieldSpec("1", 0.75),
        "coupling_ratio": FieldSpec("1", 1.0),
        "n_in": FieldSpec("1/s", 7e6),
    },
    "thermal": {
        "temperature": FieldSpec("K", 15e-3),
        "T_start": FieldSpec("K", 3.5),
        "surface_field": FieldSpec("A/m", 5000.0),
        "absorbed_power": FieldSpec("W", 3e-12),
        "law": FieldSpec("str", "combined"),
    },
    "analysis": {
        "feasibility": FieldSpec("bool", True),
        "finesses": FieldSpec("list:1", [1e4, 1e5, 1e6]),
        "n_in_min": FieldSpec("1/s", 1e3),
        "n_in_max": FieldSpec("1/s", 1e12),
        "n_in_points": FieldSpec("int", 91),
        "freespace_eta": FieldSpec("1", 1.0),
        "freespace_temperature": FieldSpec("K", 3.0),
    },
}


def field_keys() -> List[str]:
    """
    :return: every recognised dotted key ``section.key``
    :rtype: list
    """
    return [f"{section}.{key}" for section, keys in FIELDS.items() for key in keys]


def defaults() -> Dict[str, Dict[str, Any]]:
    """
    :return: the nested dictionary of default values, without the required keys
    :rtype: dict
    """
    return {section: {key: (list(spec.default) if isinstance(spec.default, list) else spec.default)
                      for key, spec in keys.items() if not spec.required}
            for section, keys in FIELDS.items()}


def parse_quantity(text: str, dimension: str) -> float:
    """
    Converts ``"637 nm"`` into 6.37e-7. A bare number is taken as SI.

    :param text: number with an optional unit suffix
    :type text: str
    :param dimension: expected dimension, ``1`` for a pure number
    :type dimension: str
    :raises ValueError: on a malformed number, an unknown unit or a unit of another dimension
    :rtype: float
    """
    match = _NUMBER.match(text)
    if match is None:
        raise ValueError(f"'{text}' is not a number")
    value = float(match.group(1))
    suffix = match.group(2)
    if not suffix:
        return value
    if suffix not in UNITS:
        raise ValueError(f"unknown unit '{suffix}' in '{text}'")
    factor, unit_dimension = UNITS[suffix]
    if unit_dimension != dimension:
        raise ValueError(f"unit '{suffix}' has dimension {unit_dimension}, expected {dimension}")
    return value * factor


def parse_value(text: str, kind: str) -> Any:
    """
    Converts the raw text of one value into its Python value.

    :raises ValueError: if the text does not match ``kind``
    """
    if kind.startswith("list:"):
        item_kind = kind[len("list:"):]
        items = [item.strip() for item in text.split(",") if item.strip()]
        return [parse_value(item, item_kind) for item in items]
    if kind == "str":
        return text.strip()
    if kind == "bool":
        lowered = text.strip().lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"'{text}' is not a boolean")
    if kind == "int":
        try:
            return int(text.strip())
        except ValueError as error:
            raise ValueError(f"'{text}' is not an integer") from error
    return parse_quantity(text, kind)


def parse_text(text: str) -> Tuple[Dict[str, Dict[str, Any]], List[str]]:
    """
    Parses scenario text into a nested dictionary of SI values. Unknown sections and keys are kept
    as raw strings so that schema validation can report them.

    :param text: scenario file contents
    :type text: str
    :return: (values, violations)
    :rtype: tuple
    """
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       strict=True)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text)
    except configparser.Error as error:
        return {}, [f"<file>: {error}"]

    values: Dict[str, Dict[str, Any]] = {}
    violations: List[str] = []
    for section in parser.sections():
        entries = values.setdefault(section, {})
        specs = FIELDS.get(section, {})
        for key, raw in parser.items(section, raw=True):
            if key not in specs:
                entries[key] = raw
                continue
            try:
                entries[key] = parse_value(raw, specs[key].kind)
            except ValueError as error:
                violations.append(f"{section}.{key}: {error}")
    return values, violations


def parse_file(file_path: str) -> Tuple[Dict[str, Dict[str, Any]], List[str]]:
    """
    :see: :func:`parse_text`
    """
    with open(file_path, 'r', encoding='utf-8') as file:
        return parse_text(file.read())


def format_value(value: Any) -> str:
    """
    Writes a value so that :func:`parse_value` reads it back identically: SI numbers with
    ``repr`` precision and no unit suffix.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ", ".join(format_value(item) for item in value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize(values: Dict[str, Dict[str, Any]]) -> str:
    """
    Canonical text of a nested value dictionary: sections and keys in the order of
    :data:`FIELDS`, unknown entries last.

    :rtype: str
    """
    lines: List[str] = []
    sections = [s for s in FIELDS if s in values] + sorted(s for s in values if s not in FIELDS)
    for section in sections:
        entries = values[section]
        known = [k for k in FIELDS.get(section, {}) if k in entries]
        keys = known + sorted(k for k in entries if k not in known)
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {format_value(entries[key])}" for key in keys)
        lines.append("")
    return "\n".join(lines)

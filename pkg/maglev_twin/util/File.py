# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
This module contains file utility methods: manifest checksums and the columnar exports shared by
all modules.
"""

import hashlib
import os
from typing import Dict, Iterable, Mapping, Optional, Sequence

import numpy as np


def file_manifest_entry(file_path: str, root: str, chunk_size: int = 1 << 16) -> Dict[str, str]:
    """
    Builds the manifest listing of a written file: its path relative to ``root`` with forward
    slashes, and the MD5 digest of its content, read in chunks of ``chunk_size`` bytes.

    :param file_path: path of the written file
    :type file_path: str
    :param root: run directory the listing is relative to
    :type root: str
    :return: ``{"path": ..., "md5": ...}``
    :rtype: dict
    """
    digest = hashlib.md5()
    with open(file_path, 'rb') as file:
        for chunk in iter(lambda: file.read(chunk_size), b""):
            digest.update(chunk)
    relative = os.path.relpath(file_path, root).replace(os.sep, "/")
    return {"path": relative, "md5": digest.hexdigest()}


def get_sha256_hash_from_text(text: str) -> str:
    """
    Calculates the SHA-256 hash of a text, e.g. a canonical scenario serialisation.

    :param text: text to hash
    :type text: str
    :return: SHA-256 hex digest
    :rtype: str
    """
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_columns(file_path: str, header: Sequence[str], columns: Iterable[Sequence[float]],
                  comments: Optional[Mapping[str, object]] = None) -> str:
    """
    Writes equal-length numeric columns as a UTF-8, comma-separated file. Metadata is written as
    ``# key = value`` comment lines above the header row. Values use full ``repr`` precision.

    :param file_path: output path, parent directories are created
    :type file_path: str
    :param header: column names
    :type header: Sequence[str]
    :param columns: one sequence per column
    :type columns: Iterable[Sequence[float]]
    :param comments: optional metadata written as header comments
    :type comments: Mapping or None
    :raises ValueError: if the column count does not match the header or lengths differ
    :return: the path written
    :rtype: str
    """
    data = [np.asarray(column, dtype=float) for column in columns]
    if len(data) != len(header):
        raise ValueError(f"The columns:count must match the header. Was {len(data)} for {len(header)} names")
    lengths = {len(column) for column in data}
    if len(lengths) > 1:
        raise ValueError(f"The columns:length must be equal. Was {sorted(lengths)}")

    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(file_path, 'w', encoding='utf-8', newline='\n') as file:
        for key, value in (comments or {}).items():
            file.write(f"# {key} = {value}\n")
        file.write(",".join(header) + "\n")
        for row in zip(*data):
            file.write(",".join(repr(float(value)) for value in row) + "\n")
    return file_path


def read_columns(file_path: str) -> Dict[str, np.ndarray]:
    """
    Reads a file written by :func:`write_columns`.

    :param file_path: input path
    :type file_path: str
    :return: mapping of column name to values; metadata comments under the key ``"#"``
    :rtype: dict
    """
    comments = {}
    header = None
    rows = []
    with open(file_path, 'r', encoding='utf-8') as file:
        for line in file:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                comments[key.strip()] = value.strip()
            elif header is None:
                header = line.split(",")
            else:
                rows.append([float(value) for value in line.split(",")])
    table = np.array(rows, dtype=float).reshape(len(rows), len(header or []))
    result: Dict[str, np.ndarray] = {name: table[:, index] for index, name in enumerate(header or [])}
    result["#"] = comments  # type: ignore[assignment]
    return result

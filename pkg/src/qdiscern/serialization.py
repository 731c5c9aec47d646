"""JSON encoding of complex vectors and matrices.

A complex number is ``[re, im]``, a vector a list of those, a matrix a list
of rows. Parse errors name the offending field.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import NotHermitianError, NotUnitError
from .linalg import as_hermitian, as_vector


class InputError(ValueError):
    """Malformed or invalid input; message names the field."""


def complex_to_json(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def vector_to_json(v) -> list[list[float]]:
    return [complex_to_json(z) for z in np.asarray(v, dtype=complex)]


def matrix_to_json(m) -> list[list[list[float]]]:
    return [vector_to_json(row) for row in np.asarray(m, dtype=complex)]


def _complex(x, field: str) -> complex:
    if (not isinstance(x, (list, tuple)) or len(x) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in x)):
        raise InputError(f"{field}: expected [re, im] pair of numbers, got {x!r}")
    return complex(x[0], x[1])


def parse_vector(data, field: str, unit: bool = True) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise InputError(f"{field}: expected a non-empty list of [re, im] pairs")
    v = np.array([_complex(x, f"{field}[{i}]") for i, x in enumerate(data)])
    try:
        return as_vector(v, unit=unit)
    except NotUnitError as exc:
        raise InputError(f"{field}: {exc}") from None


def parse_matrix(data, field: str) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise InputError(f"{field}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != len(data):
            raise InputError(f"{field}[{i}]: expected a row of length {len(data)}")
        rows.append([_complex(x, f"{field}[{i}][{j}]") for j, x in enumerate(row)])
    try:
        return as_hermitian(np.array(rows))
    except NotHermitianError as exc:
        raise InputError(f"{field}: {exc}") from None


def to_jsonable(obj):
    """Recursively convert numpy arrays, complex numbers and non-finite floats."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj) if obj.ndim == 2 else vector_to_json(obj)
        return to_jsonable(obj.tolist())
    if isinstance(obj, complex):
        return complex_to_json(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    # json writes floats with repr, the shortest exact round-trip form
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False)


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

"""JSON matrix format and atomic file writes.

A matrix is ``{"dim": n, "real": [[...]], "imag": [[...]]}`` with ``imag``
optional; a matrix set is a JSON array of such objects. Floats are written
with 17 significant digits so that reading them back is exact.
"""

import json
import os
import tempfile

import numpy as np

from .linalg import DimensionError


def matrix_to_obj(a):
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got ndim={a.ndim}")
    obj = {"dim": int(a.shape[0]), "real": np.real(a).astype(float)}
    if np.iscomplexobj(a) and np.any(np.imag(a) != 0):
        obj["imag"] = np.imag(a).astype(float)
    return obj


def matrix_from_obj(obj):
    try:
        re = np.array(obj["real"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError("matrix object needs a 'real' field") from exc
    if re.ndim != 2:
        raise DimensionError("'real' must be a 2-D array")
    if "dim" in obj and re.shape[0] != int(obj["dim"]):
        raise DimensionError(f"'dim' is {obj['dim']} but 'real' has {re.shape[0]} rows")
    if "imag" in obj and obj["imag"] is not None:
        im = np.array(obj["imag"], dtype=float)
        if im.shape != re.shape:
            raise DimensionError("'imag' and 'real' shapes differ")
        return re + 1j * im
    return re


def format_float(x):
    """17 significant digits; ``NaN``/``Infinity`` spelled as JSON readers expect."""
    x = float(x)
    if np.isnan(x):
        return "NaN"
    if np.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _encode(o, indent, level):
    if isinstance(o, np.ndarray):
        o = o.tolist()
    if o is None:
        return "null"
    if isinstance(o, (bool, np.bool_)):
        return "true" if o else "false"
    if isinstance(o, (int, np.integer)):
        return str(int(o))
    if isinstance(o, (float, np.floating)):
        return format_float(o)
    if isinstance(o, str):
        return json.dumps(o)
    if indent is None:
        sep, pad, end = ", ", "", ""
    else:
        pad = "\n" + " " * (indent * (level + 1))
        end = "\n" + " " * (indent * level)
        sep = ","
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in o.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(o, (list, tuple)):
        if not o:
            return "[]"
        # matrices rows stay on one line
        inner_indent = None if all(not isinstance(v, (list, tuple, dict)) for v in o) else indent
        if inner_indent is None:
            return "[" + ", ".join(_encode(v, None, 0) for v in o) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in o]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot encode {type(o).__name__}")


def dumps(obj, indent=None):
    """JSON text with every float at 17 significant digits."""
    return _encode(obj, indent, 0)


def dumps_matrix(a):
    return dumps(matrix_to_obj(a))


def dumps_matrix_set(mats):
    return dumps([matrix_to_obj(a) for a in mats])


def loads_matrix(text):
    return matrix_from_obj(json.loads(text))


def loads_matrix_set(text):
    data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("matrices", [data])
    return [matrix_from_obj(o) for o in data]


def read_matrix(path):
    with open(path) as fh:
        return loads_matrix(fh.read())


def read_matrix_set(path):
    with open(path) as fh:
        return loads_matrix_set(fh.read())


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

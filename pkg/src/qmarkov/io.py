"""JSON input and output.

Matrices are lists of rows; each entry is either a real number or a pair
``[re, im]``.  Output is written deterministically: sorted keys and floats
at 17 significant digits, so the same input always gives identical bytes.
"""

import json
import math

import numpy as np

from .channel import DensityState, KrausChannel
from .errors import QMarkovError, SchemaError


def _entry(z):
    if isinstance(z, bool):
        raise SchemaError("boolean is not a matrix entry")
    if isinstance(z, (int, float)):
        return complex(z)
    if isinstance(z, (list, tuple)) and len(z) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in z):
        return complex(z[0], z[1])
    raise SchemaError("matrix entries must be numbers or [re, im] pairs")


def matrix_from_json(obj, name="matrix"):
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{name} must be a non-empty list of rows")
    width = len(obj[0])
    if any(len(r) != width for r in obj):
        raise SchemaError(f"{name} has ragged rows")
    return np.array([[_entry(z) for z in row] for row in obj], dtype=complex)


def matrix_to_json(a):
    a = np.asarray(a)
    if a.ndim == 1:
        return [complex_to_json(z) for z in a]
    return [matrix_to_json(r) for r in a]


def complex_to_json(z):
    z = complex(z)
    return [z.real, z.imag]


def channel_from_json(doc, tol=1e-10):
    if not isinstance(doc, dict) or "kraus" not in doc:
        raise SchemaError("input must be an object with a 'kraus' list")
    ks = doc["kraus"]
    if not isinstance(ks, list) or not ks:
        raise SchemaError("'kraus' must be a non-empty list of matrices")
    mats = [matrix_from_json(k, f"kraus[{i}]") for i, k in enumerate(ks)]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        from .errors import DimensionMismatch

        raise DimensionMismatch("Kraus operators have different shapes", shapes=sorted(map(list, shapes)))
    return KrausChannel(np.array(mats), tol=tol)


def state_from_json(doc, tol=1e-10):
    if "state" not in doc or doc["state"] is None:
        return None
    return DensityState(matrix_from_json(doc["state"], "state"), tol=tol)


def channel_to_json(channel, state=None):
    out = {"kraus": [matrix_to_json(k) for k in channel.kraus]}
    if state is not None:
        out["state"] = matrix_to_json(state.rho)
    return out


def load_document(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc


def _fmt_float(x):
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    if x == 0:
        return "0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _plain(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj)
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_json(obj)
    return obj


def dumps(obj, indent=2, _level=0):
    """Deterministic JSON with 17 significant digits."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [dumps(v, indent, _level + 1) for v in obj]
        if all("\n" not in p for p in parts) and sum(len(p) for p in parts) < 100:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def error_document(exc):
    if isinstance(exc, QMarkovError):
        return {"error": exc.to_dict()}
    return {"error": {"code": "internal_error", "message": str(exc)}}

"""Deterministic serialization: sorted keys, exact scalars as strings, floats as ``%.12e``."""
from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .exact import QSqrt3, format_scalar

__all__ = ["to_jsonable", "dumps", "format_float", "format_complex"]


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.12e" % x


def format_complex(z: complex) -> str:
    if z.imag == 0:
        return "%.12e" % z.real
    return "%.12e%+.12ej" % (z.real, z.imag)


def to_jsonable(obj):
    """Plain JSON data with exact scalars rendered as strings; floats stay floats."""
    if isinstance(obj, (Fraction, QSqrt3)):
        return format_scalar(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [to_jsonable(v) for v in obj]
        return items
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _key(k) -> str:
    if isinstance(k, str):
        return k
    if isinstance(k, tuple):
        return "(" + ", ".join(_key(x) for x in k) + ")"
    if isinstance(k, (Fraction, QSqrt3)):
        return format_scalar(k)
    return str(k)


def _dump(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{pad}{json.dumps(k)}: {_dump(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(parts) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        parts = [pad + _dump(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(parts) + "\n" + end + "]"
    if isinstance(obj, float):
        return format_float(obj)
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    """Canonical JSON text; identical inputs give byte-identical output."""
    return _dump(to_jsonable(obj), indent, 0) + "\n"

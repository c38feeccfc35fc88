"""Deterministic JSON report emission.

All floats are printed with 17 significant digits so that golden files are
exact and re-runs byte-reproduce. The config hash covers the semantic fields
only; timings live outside the hashed region.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return f"{x:.17g}"


def dumps(obj, indent: int = 0) -> str:
    """Canonical JSON: sorted dict keys, 17-significant-digit floats."""
    pad = " " * indent
    if isinstance(obj, np.generic):
        obj = obj.item()
    elif isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\t", "\\t")
        return f'"{out}"'
    if isinstance(obj, (list, tuple)):
        items = [dumps(v, indent + 2) for v in obj]
        if not items:
            return "[]"
        inner = (",\n" + pad + "  ").join(items)
        return "[\n" + pad + "  " + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        keys = sorted(obj, key=str)
        items = [f'"{k}": ' + dumps(obj[k], indent + 2) for k in keys]
        if not items:
            return "{}"
        inner = (",\n" + pad + "  ").join(items)
        return "{\n" + pad + "  " + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)}")


def config_hash(semantic: dict) -> str:
    return hashlib.sha256(dumps(semantic).encode()).hexdigest()


def write_report(path, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(payload))
        fh.write("\n")

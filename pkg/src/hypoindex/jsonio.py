"""Deterministic JSON/CSV rendering and the matrix input document schema.

Identical data must serialize to identical bytes: dict insertion order is
preserved, floats are rendered at 17 significant digits (lossless for
float64), lines end with LF. Non-finite floats cannot appear in strict JSON,
so inf maps to the string "infinite" (the index sentinel) and nan to null.

Input documents look like

    {"n": 2, "matrix": [[1.0, [0.0, -0.5]], [[0.0, 0.5], 1.0]],
     "split": {"A": ..., "C": ...}}

where an entry is a real number or a two-element [re, im] list, and the
optional split carries the conservative/dissipative parts A and C.
"""

import json
import math

import numpy as np

from .errors import ValidationError
from .linalg import is_anti_hermitian, is_hermitian


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _render(obj, level: int) -> str:
    pad = "  " * level
    inner = "  " * (level + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "null"
        if math.isinf(x):
            return '"infinite"' if x > 0 else '"-infinite"'
        return format_float(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = []
        for key, value in obj.items():
            if not isinstance(key, str):
                raise ValidationError(f"JSON object keys must be strings, got {type(key)}")
            parts.append(f"{inner}{json.dumps(key)}: {_render(value, level + 1)}")
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            return "[]"
        scalars = all(not isinstance(i, (dict, list, tuple, np.ndarray)) for i in items)
        if scalars:
            return "[" + ", ".join(_render(i, level + 1) for i in items) + "]"
        parts = [f"{inner}{_render(i, level + 1)}" for i in items]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    raise ValidationError(f"cannot serialize {type(obj)}")


def render_json(obj) -> str:
    return _render(obj, 0) + "\n"


def csv_text(header: str, rows) -> str:
    """RFC 4180 flavored CSV, LF line endings, trailing newline."""

    def cell(v) -> str:
        if v is None:
            return "nan"
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            x = float(v)
            return "nan" if math.isnan(x) else format_float(x)
        return str(v)

    lines = [header]
    for row in rows:
        lines.append(",".join(cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _parse_entry(entry, where: str) -> complex:
    if isinstance(entry, bool):
        raise ValidationError(f"{where}: boolean is not a matrix entry")
    if isinstance(entry, (int, float)):
        return complex(float(entry), 0.0)
    if isinstance(entry, list) and len(entry) == 2:
        re_part, im_part = entry
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in entry):
            raise ValidationError(f"{where}: [re, im] parts must be numbers")
        return complex(float(re_part), float(im_part))
    raise ValidationError(f"{where}: entry must be a number or [re, im] pair")


def _parse_rows(rows, n: int, name: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n:
        raise ValidationError(f"{name} must be a list of {n} rows")
    M = np.zeros((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ValidationError(f"{name} row {i} must hold exactly {n} entries")
        for j, entry in enumerate(row):
            M[i, j] = _parse_entry(entry, f"{name}[{i}][{j}]")
    if not np.all(np.isfinite(M.real)) or not np.all(np.isfinite(M.imag)):
        raise ValidationError(f"{name} has non-finite entries")
    return M


def parse_matrix_document(doc) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray] | None]:
    """Parse {n, matrix, split?} into (B, optional (A, C))."""
    if not isinstance(doc, dict):
        raise ValidationError("input document must be a JSON object")
    if "n" not in doc or isinstance(doc["n"], bool) or not isinstance(doc["n"], int):
        raise ValidationError('input document needs an integer field "n"')
    n = doc["n"]
    if n < 1:
        raise ValidationError(f"matrix dimension must be >= 1, got {n}")
    if "matrix" not in doc:
        raise ValidationError('input document needs a field "matrix"')
    B = _parse_rows(doc["matrix"], n, "matrix")

    split = None
    if "split" in doc and doc["split"] is not None:
        blob = doc["split"]
        if not isinstance(blob, dict) or "A" not in blob or "C" not in blob:
            raise ValidationError('split must be an object with fields "A" and "C"')
        A = _parse_rows(blob["A"], n, "split.A")
        C = _parse_rows(blob["C"], n, "split.C")
        if not is_anti_hermitian(A):
            raise ValidationError("split.A is not anti-Hermitian within tolerance")
        if not is_hermitian(C):
            raise ValidationError("split.C is not Hermitian within tolerance")
        scale = max(np.linalg.norm(B), 1.0)
        if np.linalg.norm(A + C - B) > 1e-12 * scale:
            raise ValidationError("split.A + split.C does not reproduce the matrix")
        split = (A, C)
    return B, split


def _export_entry(z: complex):
    if z.imag == 0.0:
        return float(z.real)
    return [float(z.real), float(z.imag)]


def export_matrix_document(B, split=None) -> dict:
    """Document form of a matrix; parse_matrix_document inverts it exactly."""
    B = np.asarray(B, dtype=np.complex128)
    doc = {
        "n": int(B.shape[0]),
        "matrix": [[_export_entry(B[i, j]) for j in range(B.shape[1])] for i in range(B.shape[0])],
    }
    if split is not None:
        A, C = split
        A = np.asarray(A, dtype=np.complex128)
        C = np.asarray(C, dtype=np.complex128)
        doc["split"] = {
            "A": [[_export_entry(A[i, j]) for j in range(A.shape[1])] for i in range(A.shape[0])],
            "C": [[_export_entry(C[i, j]) for j in range(C.shape[1])] for i in range(C.shape[0])],
        }
    return doc


def curve_csv(curve) -> str:
    return csv_text("t,norm", zip(curve.grid.points, curve.norms))


def curve_json_obj(curve, waiting=None) -> dict:
    obj = {
        "spacing": curve.grid.spacing,
        "t_min": float(curve.grid.t_min),
        "t_max": float(curve.grid.t_max),
        "points": int(curve.grid.points.size),
        "system_fingerprint": curve.system_fingerprint,
        "t": [float(v) for v in curve.grid.points],
        "norm": [float(v) for v in curve.norms],
    }
    if waiting is not None:
        obj["t0"] = waiting.t0
        obj["t0_reached"] = waiting.reached
    return obj


def sweep_rows(sweep):
    for eps, c, c_fit, t0 in zip(sweep.eps_values, sweep.c_values, sweep.c_fit_values, sweep.t0_values):
        yield (eps, sweep.m_hc, sweep.a, c, c_fit, t0)


def sweep_csv(sweep) -> str:
    return csv_text("eps,m_hc,a,c_theory,c_fit,t0", sweep_rows(sweep))


def sweep_json_obj(sweep) -> dict:
    ratios = []
    for i in range(len(sweep.eps_values) - 1):
        t0_a, t0_b = sweep.t0_values[i], sweep.t0_values[i + 1]
        ratios.append(None if t0_a is None or t0_b is None else t0_a / t0_b)
    return {
        "m_hc": sweep.m_hc,
        "a": sweep.a,
        "c_tilde": sweep.c_tilde,
        "eps": list(sweep.eps_values),
        "c_theory": list(sweep.c_values),
        "c_fit": list(sweep.c_fit_values),
        "t0": list(sweep.t0_values),
        "t0_ratios": ratios,
    }

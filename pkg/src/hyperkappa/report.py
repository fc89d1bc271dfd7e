"""Curve documents in, reports out.

Complex numbers travel as ``[re, im]`` pairs and matrices as row-major
nested lists.  Floats are written with 17 significant digits by a small
hand-rolled emitter, since ``json`` offers no control over float format and
byte-identical output is part of the contract.
"""

from __future__ import annotations

import json
import math
import numbers
from fractions import Fraction
from pathlib import Path

import numpy as np

from .curve import Curve, curve_from_coefficients, curve_from_roots
from .errors import ValidationError
from .periods import PeriodSet


# -- reading ---------------------------------------------------------------

def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}", "input_file") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}", "input_format") from exc


def _scalar(entry, where):
    """[re, im] -> number; integer pairs with zero imaginary part stay exact."""
    if isinstance(entry, bool) or not isinstance(entry, (list, tuple)) or len(entry) != 2:
        raise ValidationError(f"{where}: expected an [re, im] pair, got {entry!r}", "input_format")
    re, im = entry
    if not all(isinstance(v, numbers.Real) and not isinstance(v, bool) for v in (re, im)):
        raise ValidationError(f"{where}: non-numeric entry {entry!r}", "input_format")
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ValidationError(f"{where}: non-finite entry {entry!r}", "input_format")
    if im == 0:
        return Fraction(re) if isinstance(re, int) else float(re)
    return complex(re, im)


def parse_curve_document(doc) -> tuple[Curve, str | None]:
    if not isinstance(doc, dict):
        raise ValidationError("curve document must be a JSON object", "input_format")
    has_c, has_r = "coefficients" in doc, "roots" in doc
    if has_c == has_r:
        raise ValidationError(
            "curve document needs exactly one of 'coefficients' or 'roots'", "input_format")
    key = "coefficients" if has_c else "roots"
    entries = doc[key]
    if not isinstance(entries, list):
        raise ValidationError(f"'{key}' must be a list", "input_format")
    values = [_scalar(e, f"{key}[{i}]") for i, e in enumerate(entries)]
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise ValidationError("'label' must be a string", "input_format")
    curve = curve_from_coefficients(values) if has_c else curve_from_roots(values)
    return curve, label


def load_curve(path) -> tuple[Curve, str | None]:
    return parse_curve_document(_read_json(path))


def _matrix(data, name):
    try:
        arr = np.array([[complex(re, im) for re, im in row] for row in data])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix '{name}' is malformed", "input_format") from exc
    return arr


def load_period_matrices(path, curve: Curve, base: PeriodSet) -> PeriodSet:
    """Period matrices from an earlier ``periods`` report, attached to ``curve``.

    The interval lifts used for Abel images come from ``base``.
    """
    doc = _read_json(path)
    try:
        res = doc["results"]
        mats = [_matrix(res[k], k) for k in
                ("two_omega", "two_omega_prime", "two_eta", "two_eta_prime")]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path} is not a periods report", "input_format") from exc
    g = curve.genus
    if any(m.shape != (g, g) for m in mats):
        raise ValidationError(f"period matrices in {path} are not {g}x{g}", "input_format")
    return PeriodSet.from_matrices(*mats, curve=curve,
                                   interval_periods=base.interval_periods, tol=base.tol)


# -- writing ---------------------------------------------------------------

def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == 0:
        return "0.0"
    text = format(x, ".17g")
    return text if any(ch in text for ch in ".en") else text + ".0"


def encode(obj):
    """Map results to JSON-ready Python objects (complex -> [re, im])."""
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (np.generic,)):
        return encode(obj.item())
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return [float(obj), 0.0]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return str(obj)


def _is_scalar(v):
    return not isinstance(v, (list, dict))


def _is_flat(value):
    """Scalars and [re, im] pairs stay on one line."""
    return all(_is_scalar(v) or (isinstance(v, list) and len(v) == 2
                                 and all(_is_scalar(w) for w in v))
               for v in value)


def dumps(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(k)}: {dumps(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, list):
        if _is_flat(obj):
            return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
        items = [f"{pad}  {dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj)


def curve_summary(curve: Curve, label=None) -> dict:
    return {
        "label": label,
        "genus": curve.genus,
        "monic": bool(curve.monic),
        "exact": curve.exact,
        "coefficients": [complex(c) for c in curve.coefficients],
        "branch_points": [complex(e) for e in curve.branch_points],
    }

"""JSON/CSV formats for maps, cocycles and results.

Map files::

    {"label": str, "lambda": float, "branches": [{"domain": [l, r], "coeffs": [c0, ...]}]}
    {"type": "beta", "beta": b, "alpha": a}
    {"type": "counterexample", "c": c}

Numbers may be given as strings such as ``"1/8"``; they are then kept exact.

Cocycle files::

    {"type": "trig", "cos": [...], "sin": [...]}
    {"type": "poly", "coeffs": [...]}
    {"type": "coboundary", "chi0": <cocycle>}

Floats are written with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cohomology import Cocycle, make_coboundary
from .counterexample import counterexample_map
from .functions import Polynomial, SmoothFunction, TrigPolynomial
from .interval_maps import Branch, MapDescription, make_beta_map


class MalformedInput(ValueError):
    """A description file is unreadable or does not follow the schema."""


def _number(v, exact: bool = False):
    if isinstance(v, bool) or v is None:
        raise MalformedInput(f"expected a number, got {v!r}")
    if isinstance(v, str):
        try:
            q = Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedInput(f"bad number {v!r}") from exc
        return q if exact else float(q)
    if isinstance(v, (int, float)):
        if not math.isfinite(v):
            raise MalformedInput(f"non-finite number {v!r}")
        return v
    raise MalformedInput(f"expected a number, got {v!r}")


def _numbers(seq, exact=False) -> list:
    if not isinstance(seq, list) or not seq:
        raise MalformedInput(f"expected a non-empty list of numbers, got {seq!r}")
    return [_number(v, exact) for v in seq]


def map_from_dict(d: dict) -> MapDescription:
    if not isinstance(d, dict):
        raise MalformedInput("map description must be a JSON object")
    try:
        kind = d.get("type")
        if kind == "beta":
            beta = _number(d["beta"], exact=True)
            alpha = _number(d.get("alpha", 0), exact=True)
            if not (isinstance(beta, Fraction) and isinstance(alpha, Fraction)):
                beta, alpha = float(beta), float(alpha)
            return make_beta_map(beta, alpha, label=d.get("label", ""))
        if kind == "counterexample":
            c = _number(d.get("c", "1/8"), exact=True)
            return counterexample_map(Fraction(c))
        if kind is not None:
            raise MalformedInput(f"unknown map type {kind!r}")
        branches = []
        for b in d["branches"]:
            dom = _numbers(b["domain"], exact=True)
            if len(dom) != 2:
                raise MalformedInput("branch domain must be [l, r]")
            coeffs = _numbers(b["coeffs"], exact=True)
            if len(coeffs) > 6:
                raise MalformedInput("branch polynomials are limited to degree 5")
            branches.append(Branch(tuple(dom), tuple(coeffs)))
        lam = d.get("lambda")
        return MapDescription(
            tuple(branches), lam=None if lam is None else float(_number(lam)), label=d.get("label", "")
        )
    except MalformedInput:
        raise
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"malformed map description: {exc}") from exc
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc


def map_to_dict(tmap: MapDescription) -> dict:
    return {
        "label": tmap.label,
        "lambda": float(tmap.lam),
        "branches": [
            {"domain": [float(b.left), float(b.right)], "coeffs": [float(c) for c in b.coeffs]}
            for b in tmap.branches
        ],
    }


def function_from_dict(d: dict, tmap: MapDescription = None) -> SmoothFunction:
    if not isinstance(d, dict):
        raise MalformedInput("cocycle description must be a JSON object")
    try:
        kind = d["type"]
        if kind == "trig":
            return TrigPolynomial(
                [float(v) for v in _numbers(d.get("cos", [0.0]))],
                [float(v) for v in _numbers(d.get("sin", [0.0]))],
            )
        if kind == "poly":
            return Polynomial([float(v) for v in _numbers(d["coeffs"])])
        if kind == "coboundary":
            if tmap is None:
                raise MalformedInput("a coboundary needs a map")
            return make_coboundary(tmap, function_from_dict(d["chi0"])).phi
        raise MalformedInput(f"unknown cocycle type {kind!r}")
    except MalformedInput:
        raise
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"malformed cocycle description: {exc}") from exc


def cocycle_from_dict(d: dict, tmap: MapDescription, smoothness_k: int = 5) -> Cocycle:
    return Cocycle(function_from_dict(d, tmap), smoothness_k)


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON ({exc})") from exc


def load_map(path) -> MapDescription:
    return map_from_dict(read_json(path))


def load_cocycle(path, tmap: MapDescription) -> Cocycle:
    return cocycle_from_dict(read_json(path), tmap)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float, Fraction)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits (non-finite floats become null)."""
    return _encode(_plain(obj), indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def write_csv(path, columns: dict) -> None:
    """Columns of equal length; header from the keys."""
    names = list(columns)
    data = [np.asarray(columns[k], dtype=float) for k in names]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*data):
            fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")

"""JSON readers and writers for functions, systems and polynomials."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .analytic import DenseFunction
from .errors import ValidationError
from .linsys import LinearSystem
from .poly import Polynomial


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def _require(data: Mapping, *keys):
    missing = [k for k in keys if k not in data]
    if missing:
        raise ValidationError(f"missing field(s) {missing}")
    return [data[k] for k in keys]


def polynomial_from_json(data, p: int | None = None, n: int | None = None) -> Polynomial:
    """Accepts a term list or ``{p, n, terms}``; terms are {exponents, coeff}."""
    if isinstance(data, Mapping):
        p = int(data.get("p", p))
        n = int(data.get("n", n))
        data = data.get("terms", [])
    if p is None or n is None:
        raise ValidationError("polynomial needs p and n")
    try:
        return Polynomial.from_json(data, p, n)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad polynomial term list: {exc}") from None


def polynomial_to_json(P: Polynomial) -> dict:
    return {"p": P.p, "n": P.n, "terms": P.to_json()}


def system_from_json(data) -> LinearSystem:
    return LinearSystem.from_json(data)


def function_from_json(data: Mapping, p: int | None = None, n: int | None = None) -> DenseFunction:
    """Explicit values or a generator spec.

    Generators: polynomial_phase {poly}, power_phase {degree, coeff},
    indicator {set}, random_unimodular {seed}, random_bounded {seed},
    constant {value}.  ``p`` and ``n`` come from the spec or the arguments.
    """
    if not isinstance(data, Mapping):
        raise ValidationError("function spec must be a JSON object")
    p = int(data.get("p", p)) if data.get("p", p) is not None else None
    n = int(data.get("n", n)) if data.get("n", n) is not None else None
    if p is None or n is None:
        raise ValidationError("function spec needs p and n")
    kind = data.get("type", "explicit" if "values" in data else None)
    if kind == "explicit":
        (vals,) = _require(data, "values")
        arr = np.asarray(vals, dtype=float)
        if arr.ndim == 2 and arr.shape[1] == 2:
            arr = arr[:, 0] + 1j * arr[:, 1]
        elif arr.ndim != 1:
            raise ValidationError("values must be [[re, im], ...] or a real list")
        return DenseFunction(p, n, arr)
    if kind == "polynomial_phase":
        (poly,) = _require(data, "poly")
        return DenseFunction.phase(polynomial_from_json(poly, p, n))
    if kind == "power_phase":
        e = int(data.get("degree", 2))
        c = int(data.get("coeff", 1))
        terms = tuple((tuple(e if j == i else 0 for j in range(n)), c) for i in range(n))
        return DenseFunction.phase(Polynomial(p, n, terms))
    if kind == "indicator":
        (pts,) = _require(data, "set")
        return DenseFunction.indicator(pts, p, n)
    if kind == "random_unimodular":
        return DenseFunction.random_unimodular(p, n, int(data.get("seed", 0)))
    if kind == "random_bounded":
        return DenseFunction.random_bounded(p, n, int(data.get("seed", 0)))
    if kind == "constant":
        v = data.get("value", 1)
        v = complex(*v) if isinstance(v, (list, tuple)) else complex(v)
        return DenseFunction.constant(v, p, n)
    raise ValidationError(f"unknown function type {kind!r}")


def function_to_json(f: DenseFunction) -> dict:
    return {"p": f.p, "n": f.n, "values": [[float(v.real), float(v.imag)] for v in f.values]}


def complex_to_json(z: complex) -> list[float] | float:
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]

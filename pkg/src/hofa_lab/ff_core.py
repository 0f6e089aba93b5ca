"""Scalars and vectors over F_p and the dense index bijection for F_p^n.

A vector ``v`` is stored at index ``sum(v[i] * p**i)``; coordinate 0 is the
least significant digit.  All dense tables in the package use this order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError


@lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise ValidationError(f"modulus must be prime, got {p!r}")
    return int(p)


@dataclass(frozen=True)
class FpScalar:
    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        if not 0 <= self.value < self.p:
            raise ValidationError(f"{self.value} is not reduced mod {self.p}")

    @classmethod
    def of(cls, value: int, p: int) -> "FpScalar":
        return cls(int(value) % p, p)

    def _coerce(self, other) -> int:
        if isinstance(other, FpScalar):
            if other.p != self.p:
                raise ValidationError(f"modulus mismatch: {self.p} vs {other.p}")
            return other.value
        return int(other)

    def __add__(self, other):
        return FpScalar.of(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FpScalar.of(self.value - self._coerce(other), self.p)

    def __mul__(self, other):
        return FpScalar.of(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FpScalar.of(-self.value, self.p)

    def inverse(self) -> "FpScalar":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse")
        return FpScalar(pow(self.value, -1, self.p), self.p)

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class FpVector:
    coords: tuple[int, ...]
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if any(not 0 <= c < self.p for c in self.coords):
            raise ValidationError(f"coordinates {self.coords} not reduced mod {self.p}")

    @classmethod
    def of(cls, coords, p: int) -> "FpVector":
        return cls(tuple(int(c) % p for c in coords), p)

    @classmethod
    def zero(cls, p: int, n: int) -> "FpVector":
        return cls((0,) * n, p)

    @property
    def n(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __add__(self, other: "FpVector") -> "FpVector":
        return vec_add(self, other)

    def __neg__(self) -> "FpVector":
        return FpVector.of([-c for c in self.coords], self.p)


def _check_compatible(u: FpVector, v: FpVector) -> None:
    if u.p != v.p:
        raise ValidationError(f"modulus mismatch: {u.p} vs {v.p}")
    if u.n != v.n:
        raise ValidationError(f"dimension mismatch: {u.n} vs {v.n}")


def vec_add(u: FpVector, v: FpVector) -> FpVector:
    _check_compatible(u, v)
    return FpVector.of([a + b for a, b in zip(u, v)], u.p)


def vec_scale(c, v: FpVector) -> FpVector:
    if isinstance(c, FpScalar):
        if c.p != v.p:
            raise ValidationError(f"modulus mismatch: {c.p} vs {v.p}")
        c = c.value
    return FpVector.of([c * a for a in v], v.p)


def vec_dot(u: FpVector, v: FpVector) -> FpScalar:
    _check_compatible(u, v)
    return FpScalar.of(sum(a * b for a, b in zip(u, v)), u.p)


def idx_encode(v: FpVector) -> int:
    idx = 0
    for c in reversed(v.coords):
        idx = idx * v.p + c
    return idx


def idx_decode(i: int, p: int, n: int) -> FpVector:
    check_prime(p)
    if n < 0:
        raise ValidationError(f"dimension must be nonnegative, got {n}")
    if not 0 <= i < p**n:
        raise ValidationError(f"index {i} out of range [0, {p}^{n})")
    coords = []
    for _ in range(n):
        i, r = divmod(i, p)
        coords.append(r)
    return FpVector(tuple(coords), p)


# ---------------------------------------------------------------------------
# vectorised tables (read-only numpy arrays, cached per (p, n))
# ---------------------------------------------------------------------------

def size(p: int, n: int) -> int:
    return p**n


@lru_cache(maxsize=64)
def place_values(p: int, n: int) -> np.ndarray:
    out = p ** np.arange(n, dtype=np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def points(p: int, n: int) -> np.ndarray:
    """All of F_p^n as an ``(p**n, n)`` integer array in index order."""
    check_prime(p)
    idx = np.arange(p**n, dtype=np.int64)
    out = (idx[:, None] // place_values(p, n)[None, :]) % p
    out.setflags(write=False)
    return out


def encode_many(coords: np.ndarray, p: int) -> np.ndarray:
    """Index of each row (last axis = coordinates) of an integer array."""
    coords = np.asarray(coords, dtype=np.int64)
    n = coords.shape[-1]
    return (coords % p) @ place_values(p, n)


@lru_cache(maxsize=16)
def addition_table(p: int, n: int) -> np.ndarray:
    """``T[x, y] = idx(x + y)`` for all index pairs."""
    pts = points(p, n)
    out = encode_many(pts[:, None, :] + pts[None, :, :], p)
    out.setflags(write=False)
    return out


def shift_indices(p: int, n: int, y: int) -> np.ndarray:
    """``out[x] = idx(x + y)`` for a single shift given by its index."""
    return addition_table(p, n)[:, y]


@lru_cache(maxsize=16)
def negation_indices(p: int, n: int) -> np.ndarray:
    out = encode_many(-points(p, n), p)
    out.setflags(write=False)
    return out

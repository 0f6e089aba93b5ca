"""Reduced multivariate polynomials over F_p.

Polynomials are functions F_p^n -> F_p, so every exponent is kept below p
(x^p = x as functions).  Terms are stored sorted in the package-wide monomial
order: total degree first, then lexicographically with x_1 most significant.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import ff_core
from .errors import BudgetError, ValidationError
from .ff_core import FpScalar, FpVector, check_prime

ENUM_BUDGET = 2**20

Exps = tuple[int, ...]


def reduce_exponent(e: int, p: int) -> int:
    if e < p:
        return e
    return (e - 1) % (p - 1) + 1


def monomial_key(exps: Exps):
    return (sum(exps), tuple(-e for e in exps))


@lru_cache(maxsize=128)
def monomials(p: int, n: int, d: int) -> tuple[Exps, ...]:
    """Exponent tuples with every entry < p and total degree <= d, in order."""
    if d < 0:
        return ()
    out = [e for e in itertools.product(range(min(p, d + 1)), repeat=n) if sum(e) <= d]
    return tuple(sorted(out, key=monomial_key))


@lru_cache(maxsize=64)
def _power_table(p: int) -> np.ndarray:
    x = np.arange(p, dtype=np.int64)
    tab = np.ones((p, p), dtype=np.int64)
    for e in range(1, p):
        tab[:, e] = (tab[:, e - 1] * x) % p
    return tab


@lru_cache(maxsize=64)
def monomial_tables(p: int, n: int, d: int) -> np.ndarray:
    """Values of each monomial of degree <= d on all of F_p^n, shape (M, p**n)."""
    pts = ff_core.points(p, n)
    pw = _power_table(p)
    mons = monomials(p, n, d)
    out = np.ones((len(mons), p**n), dtype=np.int64)
    for r, exps in enumerate(mons):
        for j, e in enumerate(exps):
            if e:
                out[r] = (out[r] * pw[pts[:, j], e]) % p
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Polynomial:
    p: int
    n: int
    terms: tuple[tuple[Exps, int], ...] = ()

    def __post_init__(self):
        check_prime(self.p)
        merged: dict[Exps, int] = {}
        for exps, c in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n:
                raise ValidationError(f"exponent tuple {exps} has wrong length for n={self.n}")
            if any(e < 0 for e in exps):
                raise ValidationError(f"negative exponent in {exps}")
            exps = tuple(reduce_exponent(e, self.p) for e in exps)
            merged[exps] = (merged.get(exps, 0) + int(c)) % self.p
        terms = tuple(sorted(((e, c) for e, c in merged.items() if c), key=lambda t: monomial_key(t[0])))
        object.__setattr__(self, "terms", terms)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_dict(cls, p: int, n: int, coeffs: Mapping[Exps, int]) -> "Polynomial":
        return cls(p, n, tuple(coeffs.items()))

    @classmethod
    def zero(cls, p: int, n: int) -> "Polynomial":
        return cls(p, n, ())

    @classmethod
    def constant(cls, c: int, p: int, n: int) -> "Polynomial":
        return cls(p, n, (((0,) * n, c),))

    @classmethod
    def variable(cls, i: int, p: int, n: int) -> "Polynomial":
        """The coordinate function x(i+1) (0-based ``i``)."""
        e = [0] * n
        e[i] = 1
        return cls(p, n, ((tuple(e), 1),))

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[int], p: int, n: int, d: int) -> "Polynomial":
        """Inverse of :meth:`coefficient_vector` over ``monomials(p, n, d)``."""
        mons = monomials(p, n, d)
        if len(coeffs) != len(mons):
            raise ValidationError(f"expected {len(mons)} coefficients, got {len(coeffs)}")
        return cls(p, n, tuple(zip(mons, (int(c) for c in coeffs))))

    # -- structure ----------------------------------------------------------

    @property
    def coeffs(self) -> dict[Exps, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        return max((sum(e) for e, _ in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e, _ in self.terms}) <= 1

    def homogeneous_part(self, l: int) -> "Polynomial":
        return Polynomial(self.p, self.n, tuple(t for t in self.terms if sum(t[0]) == l))

    def homogeneous_parts(self) -> dict[int, "Polynomial"]:
        return {l: self.homogeneous_part(l) for l in sorted({sum(e) for e, _ in self.terms})}

    def coefficient_vector(self, d: int | None = None) -> np.ndarray:
        d = max(self.degree(), 0) if d is None else d
        if self.degree() > d:
            raise ValidationError(f"degree {self.degree()} exceeds {d}")
        c = self.coeffs
        return np.array([c.get(m, 0) for m in monomials(self.p, self.n, d)], dtype=np.int64)

    def _check(self, other: "Polynomial") -> None:
        if (self.p, self.n) != (other.p, other.n):
            raise ValidationError(f"polynomial mismatch: (p,n)=({self.p},{self.n}) vs ({other.p},{other.n})")

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        return Polynomial(self.p, self.n, self.terms + other.terms)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.p, self.n, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c) -> "Polynomial":
        c = int(c)
        return Polynomial(self.p, self.n, tuple((e, c * v) for e, v in self.terms))

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        out = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                out.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
        return Polynomial(self.p, self.n, tuple(out))

    __rmul__ = __mul__

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x) -> FpScalar:
        return poly_eval(self, x)

    @cached_property
    def table(self) -> np.ndarray:
        """Values on all of F_p^n in index order (read-only int64 array)."""
        d = max(self.degree(), 0)
        mt = monomial_tables(self.p, self.n, d)
        out = (self.coefficient_vector(d) @ mt) % self.p
        out.setflags(write=False)
        return out

    def function_table(self) -> "FunctionTable":
        return FunctionTable(self.p, self.n, self.table)

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> list[dict]:
        return [{"exponents": list(e), "coeff": c} for e, c in self.terms]

    @classmethod
    def from_json(cls, data: Iterable[Mapping], p: int, n: int) -> "Polynomial":
        return cls(p, n, tuple((tuple(t["exponents"]), int(t["coeff"])) for t in data))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            mon = "*".join(f"x{j + 1}" + (f"^{k}" if k > 1 else "") for j, k in enumerate(e) if k)
            parts.append(mon if c == 1 and mon else (f"{c}*{mon}" if mon else str(c)))
        return " + ".join(parts)


def poly_eval(P: Polynomial, x) -> FpScalar:
    if isinstance(x, FpVector):
        if x.p != P.p:
            raise ValidationError(f"modulus mismatch: {x.p} vs {P.p}")
        coords = x.coords
    else:
        coords = tuple(int(c) % P.p for c in x)
    if len(coords) != P.n:
        raise ValidationError(f"dimension mismatch: point has {len(coords)} coordinates, P has n={P.n}")
    total = 0
    for exps, c in P.terms:
        term = c
        for xi, e in zip(coords, exps):
            term = term * pow(xi, e, P.p) % P.p
        total += term
    return FpScalar.of(total, P.p)


def poly_lincomb(coeffs: Sequence, polys: Sequence[Polynomial]) -> Polynomial:
    if len(coeffs) != len(polys):
        raise ValidationError(f"{len(coeffs)} coefficients for {len(polys)} polynomials")
    if not polys:
        raise ValidationError("empty linear combination has no ambient (p, n)")
    p, n = polys[0].p, polys[0].n
    terms = []
    for c, P in zip(coeffs, polys):
        if (P.p, P.n) != (p, n):
            raise ValidationError("polynomials in a linear combination must share (p, n)")
        c = int(c)
        terms.extend((e, c * v) for e, v in P.terms)
    return Polynomial(p, n, tuple(terms))


def additive_derivative(P: Polynomial, y) -> Polynomial:
    """Delta_y P (x) = P(x + y) - P(x), expanded and reduced."""
    if isinstance(y, FpVector):
        if y.p != P.p:
            raise ValidationError(f"modulus mismatch: {y.p} vs {P.p}")
        y = y.coords
    y = tuple(int(c) % P.p for c in y)
    if len(y) != P.n:
        raise ValidationError(f"dimension mismatch: direction has {len(y)} coordinates, P has n={P.n}")
    p = P.p
    out = []
    for exps, c in P.terms:
        # prod_j (x_j + y_j)^{e_j}; e_j < p so no reduction is triggered.
        factors = [[(t, math.comb(e, t) * pow(yj, e - t, p)) for t in range(e + 1)] for e, yj in zip(exps, y)]
        for combo in itertools.product(*factors):
            coef = c
            for _, w in combo:
                coef = coef * w % p
            if coef:
                out.append((tuple(t for t, _ in combo), coef))
    return Polynomial(p, P.n, tuple(out)) - P


def degree(P: Polynomial) -> int:
    return P.degree()


def homogeneous_part(P: Polynomial, l: int) -> Polynomial:
    return P.homogeneous_part(l)


def count_polynomials(p: int, n: int, d: int) -> int:
    return p ** len(monomials(p, n, d))


def _check_budget(p: int, n: int, d: int, budget: int) -> int:
    if d < 0:
        raise ValidationError(f"degree bound must be >= 0, got {d}")
    count = count_polynomials(p, n, d)
    if count > budget:
        raise BudgetError(f"enumerate Poly_{d}(F_{p}^{n})", count, budget)
    return count


def enumerate_polynomials(p: int, n: int, d: int, budget: int = ENUM_BUDGET) -> Iterator[Polynomial]:
    """Every reduced polynomial of degree <= d, lexicographic in coefficients."""
    check_prime(p)
    _check_budget(p, n, d, budget)
    mons = monomials(p, n, d)
    for coeffs in itertools.product(range(p), repeat=len(mons)):
        yield Polynomial(p, n, tuple(zip(mons, coeffs)))


def coefficient_matrix(p: int, n: int, d: int, budget: int = ENUM_BUDGET) -> np.ndarray:
    """Coefficient vectors of :func:`enumerate_polynomials`, same order, as rows."""
    count = _check_budget(p, n, d, budget)
    M = len(monomials(p, n, d))
    t = np.arange(count, dtype=np.int64)
    shifts = p ** np.arange(M - 1, -1, -1, dtype=np.int64)
    return (t[:, None] // shifts[None, :]) % p


def enumerate_tables(p: int, n: int, d: int, budget: int = ENUM_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """``(coeffs, tables)`` with ``tables[t]`` the values of the t-th polynomial."""
    C = coefficient_matrix(p, n, d, budget)
    return C, (C @ monomial_tables(p, n, d)) % p


@dataclass(frozen=True)
class FunctionTable:
    """An arbitrary map F_p^n -> F_p stored in index order."""

    p: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        check_prime(self.p)
        v = np.asarray(self.values, dtype=np.int64) % self.p
        if v.shape != (self.p**self.n,):
            raise ValidationError(f"table must have length {self.p ** self.n}, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def table_of(P: Polynomial) -> FunctionTable:
    return P.function_table()


def table_degree_le(f: FunctionTable, d: int, budget: int = 2**26) -> bool:
    """True iff every (d+1)-fold additive derivative of ``f`` vanishes.

    Directions are enumerated exhaustively (the zero direction is skipped,
    its derivative is trivially zero); the search stops at the first
    non-vanishing derivative.
    """
    if d < 0:
        raise ValidationError(f"degree bound must be >= 0, got {d}")
    p, N = f.p, f.p**f.n
    if N == 1:
        return True
    A = ff_core.addition_table(p, f.n)
    dirs = np.arange(1, N)
    need = (N - 1) ** d * N
    if need > budget:
        raise BudgetError("table_degree_le", need * (N - 1), budget)
    g0 = f.values
    for y1 in dirs:
        level = ((g0[A[:, y1]] - g0) % p)[None, :]
        for _ in range(d):
            # level[r, x] -> level[r, y, x] = level[r, x + y] - level[r, x]
            level = (level[:, A[:, dirs].T] - level[:, None, :]) % p
            level = level.reshape(-1, N)
            if not level.any():
                break
        if level.any():
            return False
    return True

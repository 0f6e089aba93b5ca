"""Polarization and the exact zero-test for P_Lambda.

For polynomials P_1..P_c and a system L_1..L_m, the combination
``P_Lambda(x) = sum_{i,j} Lambda[i, j] * P_i(L_j(x))`` expands over the
multiset basis ``B_i(x_u)``.  Its coefficients
``b_i^l(u) = ell_l(u) * sum_j Lambda[i, j] * c_l(u, L_j)`` depend only on
the degrees, the forms and Lambda.

Multisets ``u`` are non-decreasing tuples of 0-based variable indices.
"""
from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import ff_core
from .errors import UnsupportedError, ValidationError
from .linsys import LinearForm, LinearSystem, canonicalize_homogeneous, gf_rank, is_homogeneous_system
from .poly import Polynomial, monomials

Multiset = tuple[int, ...]


@lru_cache(maxsize=256)
def multisets(k: int, d: int) -> tuple[Multiset, ...]:
    """U^d: sorted d-tuples over range(k), in lexicographic order."""
    return tuple(itertools.combinations_with_replacement(range(k), d))


def multiset_count(u: Sequence[int], p: int) -> int:
    """Number of distinct orderings of u, reduced mod p (requires len(u) < p)."""
    d = len(u)
    if d >= p:
        raise ValidationError(f"multiset of size {d} needs d < p = {p}")
    if list(u) != sorted(u):
        raise ValidationError(f"multiset index {tuple(u)} is not sorted")
    count = math.factorial(d)
    for mult in Counter(u).values():
        count //= math.factorial(mult)
    return count % p


def form_monomial(u: Sequence[int], L: Sequence[int], p: int) -> int:
    """c_d(u, L) = prod_j L[u_j] mod p."""
    v = 1
    for j in u:
        v = v * int(L[j]) % p
    return v


# ---------------------------------------------------------------------------
# symmetric multilinear forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymMultilinearForm:
    """Symmetric d-linear form on F_p^n.

    ``coeffs[t]`` for a sorted coordinate tuple t is the common value of the
    coefficient tensor at every rearrangement of t, so
    ``B(x_1..x_d) = sum_{j in [n]^d} coeffs[sorted(j)] * prod_s x_s(j_s)``.
    """

    p: int
    n: int
    d: int
    coeffs: tuple[tuple[Multiset, int], ...]

    @property
    def coeff_map(self) -> dict[Multiset, int]:
        return dict(self.coeffs)

    def __call__(self, *xs) -> int:
        if len(xs) != self.d:
            raise ValidationError(f"{self.d}-linear form called with {len(xs)} arguments")
        xs = [tuple(int(c) for c in x) for x in xs]
        cm = self.coeff_map
        total = 0
        for j in itertools.product(range(self.n), repeat=self.d):
            c = cm.get(tuple(sorted(j)), 0)
            if c:
                term = c
                for s, js in enumerate(j):
                    term = term * xs[s][js] % self.p
                total += term
        return total % self.p

    def evaluate_many(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        """Vectorised evaluation; ``xs[s]`` has shape (..., n)."""
        out = np.zeros(np.asarray(xs[0]).shape[:-1], dtype=np.int64)
        cm = self.coeff_map
        for j in itertools.product(range(self.n), repeat=self.d):
            c = cm.get(tuple(sorted(j)), 0)
            if c:
                term = np.full(out.shape, c, dtype=np.int64)
                for s, js in enumerate(j):
                    term = term * (np.asarray(xs[s])[..., js] % self.p) % self.p
                out = (out + term) % self.p
        return out


def polarize(P: Polynomial) -> SymMultilinearForm:
    """Symmetric multilinear B with B(x, ..., x) = P(x).

    Coefficients come from inclusion-exclusion,
    ``B(e_{j_1}, .., e_{j_d}) = (d!)^{-1} sum_S (-1)^{d-|S|} P(sum_{s in S} e_{j_s})``.
    """
    if P.is_zero():
        raise ValidationError("cannot polarize the zero polynomial (degree undefined)")
    if not P.is_homogeneous():
        raise ValidationError("polarize needs a homogeneous polynomial")
    p, n, d = P.p, P.n, P.degree()
    if d < 1 or d >= p:
        raise ValidationError(f"polarize needs 1 <= deg < p, got deg={d}, p={p}")
    inv_fact = pow(math.factorial(d), -1, p)
    coeffs = []
    for t in itertools.combinations_with_replacement(range(n), d):
        total = 0
        for r in range(d + 1):
            for S in itertools.combinations(range(d), r):
                point = [0] * n
                for s in S:
                    point[t[s]] += 1
                total += (-1) ** (d - r) * P(point).value
        c = total * inv_fact % p
        if c:
            coeffs.append((t, c))
    return SymMultilinearForm(p, n, d, tuple(coeffs))


def polarize_by_monomials(P: Polynomial) -> SymMultilinearForm:
    """Cross-check for :func:`polarize`: spread each monomial coefficient
    evenly over the distinct rearrangements of its index multiset."""
    if not P.is_homogeneous() or P.is_zero():
        raise ValidationError("polarize needs a nonzero homogeneous polynomial")
    p, d = P.p, P.degree()
    if d >= p:
        raise ValidationError(f"polarize needs deg < p, got deg={d}, p={p}")
    coeffs = []
    for exps, c in P.terms:
        t = tuple(j for j, e in enumerate(exps) for _ in range(e))
        coeffs.append((t, c * pow(multiset_count(t, p), -1, p) % p))
    return SymMultilinearForm(p, P.n, d, tuple(sorted(coeffs)))


# ---------------------------------------------------------------------------
# composition with linear forms and b-coefficients
# ---------------------------------------------------------------------------

def expand_composition(d: int, L: LinearForm | Sequence[int], p: int | None = None) -> dict[Multiset, int]:
    """Coefficient of B(x_u) in P(L(x)) for a degree-d homogeneous P."""
    if isinstance(L, LinearForm):
        p, coeffs = L.p, L.coeffs
    else:
        coeffs = tuple(L)
        if p is None:
            raise ValidationError("p is required when L is a plain sequence")
    if d < 1 or d >= p:
        raise ValidationError(f"expansion needs 1 <= d < p, got d={d}, p={p}")
    return {u: multiset_count(u, p) * form_monomial(u, coeffs, p) % p for u in multisets(len(coeffs), d)}


def expand_polynomial_composition(P: Polynomial, L: LinearForm) -> dict[Multiset, int]:
    if not P.is_homogeneous() or P.is_zero():
        raise ValidationError("expansion needs a nonzero homogeneous polynomial")
    return expand_composition(P.degree(), L)


def _as_lambda(Lam, c: int, m: int) -> np.ndarray:
    A = np.array(Lam, dtype=np.int64).reshape(c, m) if c else np.zeros((0, m), dtype=np.int64)
    if A.shape != (c, m):
        raise ValidationError(f"Lambda must be {c} x {m}, got {A.shape}")
    return A


@dataclass
class BCoefficients:
    """``values[(i, l, u)] = b_i^l(u)`` for every polynomial i, layer 1..d_i."""

    p: int
    degrees: tuple[int, ...]
    values: dict[tuple[int, int, Multiset], int]

    def layer(self, i: int, l: int) -> dict[Multiset, int]:
        return {u: v for (ii, ll, u), v in self.values.items() if ii == i and ll == l}

    def top_layer_zero(self) -> bool:
        return all(v == 0 for (i, l, _), v in self.values.items() if l == self.degrees[i])

    def all_zero(self) -> bool:
        return not any(self.values.values())

    def to_json(self) -> list[dict]:
        return [{"poly": i, "layer": l, "u": list(u), "b": v} for (i, l, u), v in sorted(self.values.items())]


def b_coefficients(Lam, S: LinearSystem, degrees: Sequence[int]) -> BCoefficients:
    """All layers b_i^l(u), l = 1..d_i; ``Lam[i][j]`` multiplies P_i(L_j)."""
    p = S.p
    degrees = tuple(int(d) for d in degrees)
    for d in degrees:
        if d >= p:
            raise ValidationError(f"degree {d} >= p = {p}")
        if d < 0:
            raise ValidationError(f"negative degree {d}")
    A = _as_lambda(Lam, len(degrees), S.m)
    M = S.matrix
    values = {}
    for i, di in enumerate(degrees):
        for l in range(1, di + 1):
            for u in multisets(S.k, l):
                cs = np.prod(M[:, list(u)], axis=1) % p if l else np.ones(S.m, dtype=np.int64)
                s = int(A[i] @ cs) % p
                values[(i, l, u)] = multiset_count(u, p) * s % p
    return BCoefficients(p, degrees, values)


def top_layer_matrix(S: LinearSystem, d: int) -> np.ndarray:
    """Rows u in U^d, columns j: ell_d(u) c_d(u, L_j).  Lambda rows in its
    right kernel are exactly those with vanishing top-layer coefficients."""
    p = S.p
    M = S.matrix
    return np.array(
        [[multiset_count(u, p) * int(np.prod(M[j, list(u)]) % p) % p for j in range(S.m)] for u in multisets(S.k, d)],
        dtype=np.int64,
    ).reshape(-1, S.m)


# ---------------------------------------------------------------------------
# zero tests
# ---------------------------------------------------------------------------

def collection_independent(polys: Sequence[Polynomial]) -> bool:
    if not polys:
        return True
    d = max(max(P.degree(), 0) for P in polys)
    return gf_rank([P.coefficient_vector(d) for P in polys], polys[0].p) == len(polys)


def p_lambda_is_zero(Lam, S: LinearSystem, degrees: Sequence[int], homogeneous_polys: bool = True) -> bool:
    """Coefficient zero-test for P_Lambda.

    Homogeneous, linearly independent polynomials: P_Lambda == 0 iff every
    top-layer b vanishes.  Non-homogeneous polynomials (independent top
    parts) are only supported over a homogeneous system; the system is first
    brought to canonical form and the layer cascade is checked.
    """
    if homogeneous_polys:
        return b_coefficients(Lam, S, degrees).top_layer_zero()
    if is_homogeneous_system(S) is None:
        raise UnsupportedError("non-homogeneous polynomials need a homogeneous system of linear forms")
    canon = canonicalize_homogeneous(S)
    b = b_coefficients(Lam, canon, degrees)
    top_zero = b.top_layer_zero()
    if top_zero:
        # every lower layer is forced to vanish on a canonical homogeneous system
        assert b.all_zero(), "layer cascade violated on a canonical homogeneous system"
    return top_zero


def form_value_indices(S: LinearSystem, n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """``out[j, t] = idx(L_j(x))`` for x in (F_p^n)^k with x-index t in [start, stop).

    The index of x = (x_1..x_k) is ``sum_j idx(x_j) * (p**n)**j``.
    """
    p, k = S.p, S.k
    N = p**n
    stop = N**k if stop is None else stop
    t = np.arange(start, stop, dtype=np.int64)
    pts = ff_core.points(p, n)
    M = S.matrix
    acc = np.zeros((S.m, t.size, n), dtype=np.int64)
    for v in range(k):
        xv = pts[(t // N**v) % N]  # (T, n)
        acc += M[:, v][:, None, None] * xv[None, :, :]
    return ff_core.encode_many(acc % p, p)


def p_lambda_table(Lam, S: LinearSystem, polys: Sequence[Polynomial], n: int) -> np.ndarray:
    """Values of P_Lambda on all of (F_p^n)^k."""
    p = S.p
    if any((P.p, P.n) != (p, n) for P in polys):
        raise ValidationError("polynomials must live on F_p^n with the system's p")
    A = _as_lambda(Lam, len(polys), S.m)
    idx = form_value_indices(S, n)
    out = np.zeros(idx.shape[1], dtype=np.int64)
    for i, P in enumerate(polys):
        tab = P.table
        for j in range(S.m):
            if A[i, j]:
                out = (out + A[i, j] * tab[idx[j]]) % p
    return out


def p_lambda_is_zero_bruteforce(Lam, S: LinearSystem, polys: Sequence[Polynomial], n: int) -> bool:
    return not p_lambda_table(Lam, S, polys, n).any()


def p_lambda_is_zero_checked(Lam, S: LinearSystem, polys: Sequence[Polynomial], n: int) -> bool:
    """Coefficient test when its hypotheses hold, brute force otherwise."""
    homogeneous = all(P.is_homogeneous() for P in polys)
    tops = polys if homogeneous else [P.homogeneous_part(P.degree()) for P in polys]
    if not collection_independent(tops) or any(P.is_zero() for P in polys):
        warnings.warn("polynomial collection is linearly dependent; falling back to brute force")
        return p_lambda_is_zero_bruteforce(Lam, S, polys, n)
    degrees = [P.degree() for P in polys]
    if not homogeneous and is_homogeneous_system(S) is None:
        raise UnsupportedError("non-homogeneous polynomials need a homogeneous system of linear forms")
    return p_lambda_is_zero(Lam, S, degrees, homogeneous_polys=homogeneous)


# ---------------------------------------------------------------------------
# collapse assignment
# ---------------------------------------------------------------------------

def collapse_assignment(coeffs: Mapping[Multiset, int], k: int, p: int) -> tuple[tuple[int, ...], int] | None:
    """First a in F_p^k (index order) with g(a) = sum_u c_u a^u != 0, and g(a).

    Returns None only when every coefficient is zero.
    """
    coeffs = {tuple(u): int(c) % p for u, c in coeffs.items()}
    degs = {len(u) for u in coeffs}
    if len(degs) > 1:
        raise ValidationError("all multisets of a collapse query must have the same size")
    if len(degs) == 1 and next(iter(degs)) >= p:
        raise ValidationError("multiset size must be < p")
    if not any(coeffs.values()):
        return None
    for t in range(p**k):
        a = ff_core.idx_decode(t, p, k).coords
        g = sum(c * form_monomial(u, a, p) for u, c in coeffs.items()) % p
        if g:
            return a, g
    raise AssertionError("nonzero coefficient vector with g identically zero")


def collapse_holds(coeffs: Mapping[Multiset, int], B: SymMultilinearForm, a: Sequence[int], alpha: int) -> bool:
    """Check Q(a_1 w, .., a_k w) = alpha * B(w, .., w) for every w in F_p^n."""
    p, n = B.p, B.n
    W = ff_core.points(p, n)
    lhs = np.zeros(W.shape[0], dtype=np.int64)
    for u, c in coeffs.items():
        args = [(a[j] * W) % p for j in u]
        lhs = (lhs + int(c) * B.evaluate_many(args)) % p
    rhs = alpha * B.evaluate_many([W] * B.d) % p
    return bool(np.array_equal(lhs, rhs))

"""Linear forms, systems of linear forms, and their complexity.

Forms, variables and system members are indexed from 0 in the Python API.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError, NoQualifyingDegreeError, ScalarMultipleError, ValidationError
from .ff_core import FpVector, check_prime

TENSOR_BUDGET = 2**22
CS_EXHAUSTIVE_MAX_M = 8
ISO_MAX_M = 8


# ---------------------------------------------------------------------------
# linear algebra over F_p
# ---------------------------------------------------------------------------

def _as_matrix(vectors, p: int) -> np.ndarray:
    A = np.array([list(v) for v in vectors], dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(len(A), 0)
    return A % p


def rref(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p and the pivot columns."""
    A = np.array(A, dtype=np.int64) % p
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        others = np.nonzero(A[:, c])[0]
        for i in others:
            if i != r:
                A[i] = (A[i] - A[i, c] * A[r]) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def gf_rank(vectors, p: int) -> int:
    vectors = list(vectors)
    if not vectors:
        return 0
    lengths = {len(v) for v in vectors}
    if len(lengths) != 1:
        raise ValidationError(f"vectors have unequal lengths {sorted(lengths)}")
    return len(rref(_as_matrix(vectors, p), p)[1])


def solve(A, b, p: int) -> np.ndarray | None:
    """Some x with A x = b over F_p, or None."""
    A = np.array(A, dtype=np.int64) % p
    b = np.array(b, dtype=np.int64).reshape(-1) % p
    if A.shape[0] != b.shape[0]:
        raise ValidationError("row count mismatch in solve")
    R, piv = rref(np.hstack([A, b[:, None]]), p)
    cols = A.shape[1]
    if cols in piv:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for row, c in zip(R, piv):
        x[c] = row[-1]
    return x


def in_span(v, basis, p: int) -> tuple[int, ...] | None:
    """Coefficients c with sum c_i basis_i = v, or None if v is not in the span."""
    basis = list(basis)
    v = list(v)
    if not basis:
        return () if not any(int(c) % p for c in v) else None
    A = _as_matrix(basis, p).T
    if A.shape[0] != len(v):
        raise ValidationError("vector length differs from basis vector length")
    x = solve(A, v, p)
    return None if x is None else tuple(int(c) for c in x)


def nullspace(A, p: int) -> np.ndarray:
    """Basis (rows) of {x : A x = 0} over F_p, in reduced form."""
    A = np.array(A, dtype=np.int64) % p
    cols = A.shape[1]
    R, piv = rref(A, p) if A.shape[0] else (np.zeros((0, cols), dtype=np.int64), [])
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        x = np.zeros(cols, dtype=np.int64)
        x[f] = 1
        for row, c in zip(R, piv):
            x[c] = (-row[f]) % p
        basis.append(x)
    return np.array(basis, dtype=np.int64).reshape(len(basis), cols)


def span_elements(basis: np.ndarray, p: int) -> np.ndarray:
    """All p**r elements of the span of r independent rows."""
    basis = np.asarray(basis, dtype=np.int64)
    r, m = basis.shape
    if r == 0:
        return np.zeros((1, m), dtype=np.int64)
    coeffs = np.array(list(itertools.product(range(p), repeat=r)), dtype=np.int64)
    return (coeffs @ basis) % p


# ---------------------------------------------------------------------------
# forms and systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearForm:
    coeffs: tuple[int, ...]
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "coeffs", tuple(int(c) % self.p for c in self.coeffs))

    @property
    def k(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, j):
        return self.coeffs[j]

    def __call__(self, xs: Sequence[FpVector]) -> FpVector:
        if len(xs) != self.k:
            raise ValidationError(f"form in {self.k} variables applied to {len(xs)} arguments")
        n = xs[0].n
        out = [0] * n
        for c, x in zip(self.coeffs, xs):
            for i in range(n):
                out[i] += c * x[i]
        return FpVector.of(out, self.p)


@dataclass(frozen=True)
class LinearSystem:
    forms: tuple[LinearForm, ...]

    def __post_init__(self):
        forms = tuple(self.forms)
        if not forms:
            raise ValidationError("a system needs at least one form")
        ps = {L.p for L in forms}
        ks = {L.k for L in forms}
        if len(ps) != 1 or len(ks) != 1:
            raise ValidationError("all forms of a system must share p and k")
        if len(set(forms)) != len(forms):
            raise ValidationError("forms of a system must be pairwise distinct")
        object.__setattr__(self, "forms", forms)

    @classmethod
    def from_lists(cls, forms: Iterable[Sequence[int]], p: int) -> "LinearSystem":
        return cls(tuple(LinearForm(tuple(f), p) for f in forms))

    @property
    def p(self) -> int:
        return self.forms[0].p

    @property
    def k(self) -> int:
        return self.forms[0].k

    @property
    def m(self) -> int:
        return len(self.forms)

    @property
    def matrix(self) -> np.ndarray:
        """m x k coefficient matrix; row i is form i."""
        return np.array([L.coeffs for L in self.forms], dtype=np.int64).reshape(self.m, self.k)

    def subsystem(self, idx: Iterable[int]) -> "LinearSystem":
        return LinearSystem(tuple(self.forms[i] for i in idx))

    def relation_space(self) -> np.ndarray:
        """Basis of {c in F_p^m : sum c_i L_i = 0}."""
        return nullspace(self.matrix.T, self.p)

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "forms": [list(L.coeffs) for L in self.forms]}

    @classmethod
    def from_json(cls, data: dict) -> "LinearSystem":
        try:
            p, k, forms = int(data["p"]), int(data["k"]), data["forms"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"system JSON needs p, k, forms: {exc}") from None
        if any(len(f) != k for f in forms):
            raise ValidationError(f"every form must have k={k} coefficients")
        return cls.from_lists(forms, p)


def arithmetic_progression(length: int, p: int) -> LinearSystem:
    """Forms x + j*y for j = 0..length-1."""
    return LinearSystem.from_lists([(1, j) for j in range(length)], p)


def scalar_multiple_pair(S: LinearSystem) -> tuple[int, int | None] | None:
    """First zero form ``(i, None)`` or proportional pair ``(i, j)``, else None."""
    for i, L in enumerate(S.forms):
        if L.is_zero():
            return (i, None)
    for i, j in itertools.combinations(range(S.m), 2):
        if gf_rank([S.forms[i].coeffs, S.forms[j].coeffs], S.p) < 2:
            return (i, j)
    return None


# ---------------------------------------------------------------------------
# tensor powers and true complexity
# ---------------------------------------------------------------------------

def tensor_power(L: LinearForm, d: int, budget: int = TENSOR_BUDGET) -> np.ndarray:
    """Full k**d tensor power; multi-index (i_1..i_d) sits at sum i_j k**(j-1)."""
    if d < 1:
        raise ValidationError(f"tensor power needs d >= 1, got {d}")
    if L.k**d > budget:
        raise BudgetError("tensor_power", L.k**d, budget)
    lam = np.array(L.coeffs, dtype=np.int64)
    out = lam.copy()
    for _ in range(d - 1):
        # new index = old + k**(j-1) * i_j: the newest factor is most significant
        out = (lam[:, None] * out[None, :]).reshape(-1) % L.p
    return out


def sym_tensor_power(L: LinearForm, d: int) -> np.ndarray:
    """Tensor power restricted to sorted multi-indices (same rank behaviour)."""
    lam = L.coeffs
    vals = []
    for u in itertools.combinations_with_replacement(range(L.k), d):
        v = 1
        for j in u:
            v = v * lam[j] % L.p
        vals.append(v)
    return np.array(vals, dtype=np.int64)


def tensor_rank(S: LinearSystem, t: int) -> int:
    return gf_rank([sym_tensor_power(L, t) for L in S.forms], S.p)


def power_in_span(S: LinearSystem, i: int, t: int) -> bool:
    """Whether L_i^t lies in the span of the other forms' t-th powers."""
    others = [sym_tensor_power(L, t) for j, L in enumerate(S.forms) if j != i]
    return in_span(sym_tensor_power(S.forms[i], t), others, S.p) is not None


def true_complexity(S: LinearSystem, d_max: int | None = None, trace: list | None = None) -> int:
    """Smallest d >= 0 such that the (d+1)-st tensor powers are independent."""
    pair = scalar_multiple_pair(S)
    if d_max is None:
        d_max = max(S.m, S.p)
    if pair is not None:
        raise NoQualifyingDegreeError(d_max, f"scalar-multiple forms {pair}: no tensor power separates them")
    for d in range(d_max + 1):
        r = tensor_rank(S, d + 1)
        if trace is not None:
            trace.append({"d": d, "rank": r})
        if r == S.m:
            return d
    raise NoQualifyingDegreeError(d_max, "tensor powers stay dependent")


# ---------------------------------------------------------------------------
# Cauchy-Schwarz complexity
# ---------------------------------------------------------------------------

def _spans(vectors: list, target, p: int) -> bool:
    return bool(vectors) and in_span(target, vectors, p) is not None


def _greedy_partition(target, items: list[int], vecs, p: int) -> list[list[int]]:
    parts: list[list[int]] = []
    for j in items:
        for part in parts:
            if not _spans([vecs[t] for t in part + [j]], target, p):
                part.append(j)
                break
        else:
            parts.append([j])
    return parts


def _partition_into(target, items: list[int], vecs, p: int, t: int) -> list[list[int]] | None:
    """Backtracking search for a partition into at most t non-spanning parts."""
    parts: list[list[int]] = []

    def place(pos: int) -> bool:
        if pos == len(items):
            return True
        j = items[pos]
        for part in parts:
            if not _spans([vecs[x] for x in part + [j]], target, p):
                part.append(j)
                if place(pos + 1):
                    return True
                part.pop()
        if len(parts) < t:
            parts.append([j])
            if place(pos + 1):
                return True
            parts.pop()
        return False

    return [list(q) for q in parts] if place(0) else None


@dataclass
class CSResult:
    s: int
    witnesses: list[list[list[int]]]
    exact: bool = True


def cs_complexity(S: LinearSystem, exhaustive_max_m: int = CS_EXHAUSTIVE_MAX_M) -> CSResult:
    """Minimal s with, for every i, a partition of the others into s+1 parts
    none of whose spans contains L_i.  Empty parts are allowed, so s is
    ``max_i(min number of parts for i) - 1`` with s >= 0.
    """
    pair = scalar_multiple_pair(S)
    if pair is not None:
        raise ScalarMultipleError(*pair)
    vecs = [L.coeffs for L in S.forms]
    exact = S.m <= exhaustive_max_m
    witnesses = []
    need = 1
    for i in range(S.m):
        items = [j for j in range(S.m) if j != i]
        best = _greedy_partition(vecs[i], items, vecs, S.p)
        if exact:
            for t in range(1, len(best)):
                found = _partition_into(vecs[i], items, vecs, S.p, t)
                if found is not None:
                    best = found
                    break
        witnesses.append(best)
        need = max(need, len(best))
    return CSResult(s=need - 1, witnesses=witnesses, exact=exact)


# ---------------------------------------------------------------------------
# homogeneity and isomorphism
# ---------------------------------------------------------------------------

def is_homogeneous_system(S: LinearSystem) -> FpVector | None:
    """A vector v with L_i(v) = 1 for every form, or None."""
    x = solve(S.matrix, np.ones(S.m, dtype=np.int64), S.p)
    return None if x is None else FpVector(tuple(int(c) for c in x), S.p)


def homogenizing_substitution(S: LinearSystem) -> np.ndarray:
    """Invertible k x k matrix A whose first column is a homogeneity witness."""
    v = is_homogeneous_system(S)
    if v is None:
        raise ValidationError("system is not homogeneous")
    cols = [np.array(v.coords, dtype=np.int64)]
    for j in range(S.k):
        e = np.zeros(S.k, dtype=np.int64)
        e[j] = 1
        if gf_rank(cols + [e], S.p) > len(cols):
            cols.append(e)
    return np.array(cols, dtype=np.int64).T


def canonicalize_homogeneous(S: LinearSystem) -> LinearSystem:
    """Substitute variables so that variable 0 has coefficient 1 in every form."""
    A = homogenizing_substitution(S)
    return LinearSystem.from_lists((S.matrix @ A) % S.p, S.p)


def _relation_key(R: np.ndarray, p: int, perm: Sequence[int]) -> tuple:
    if R.shape[0] == 0:
        return ()
    return tuple(map(tuple, rref(R[:, list(perm)], p)[0].tolist()))


def systems_isomorphic(S1: LinearSystem, S2: LinearSystem, max_m: int = ISO_MAX_M) -> tuple[int, ...] | None:
    """A bijection ``pi`` (form i of S1 -> form pi[i] of S2) preserving all
    linear relations, or None.  Brute force over permutations."""
    if S1.m != S2.m:
        raise ValidationError(f"systems have different sizes {S1.m} and {S2.m}")
    if S1.p != S2.p:
        return None
    if S1.m > max_m:
        raise BudgetError("systems_isomorphic permutations", int(np.prod(range(1, S1.m + 1))), int(np.prod(range(1, max_m + 1))))
    R1 = S1.relation_space()
    R2 = S2.relation_space()
    if R1.shape[0] != R2.shape[0]:
        return None
    target = _relation_key(R2, S2.p, range(S2.m))
    for perm in itertools.permutations(range(S1.m)):
        # relation c of S1 becomes c' with c'[perm[i]] = c[i]
        inv = [0] * S1.m
        for i, j in enumerate(perm):
            inv[j] = i
        if _relation_key(R1, S1.p, inv) == target:
            return tuple(perm)
    return None


def isomorphism_key(S: LinearSystem) -> tuple:
    """Invariant that is equal exactly for isomorphic systems."""
    R = S.relation_space()
    return (S.p, S.m, min(_relation_key(R, S.p, perm) for perm in itertools.permutations(range(S.m))))


# ---------------------------------------------------------------------------
# reports and corpora
# ---------------------------------------------------------------------------

@dataclass
class ComplexityReport:
    cs_complexity: int
    true_complexity: int
    witness_partitions: list[list[list[int]]]
    tensor_rank_trace: list[dict]
    cs_exact: bool = True
    flags: list[str] = field(default_factory=list)

    @property
    def true_complexity_positive(self) -> int:
        """The same value under the 'minimal d >= 1' convention."""
        return max(self.true_complexity, 1)

    def to_json(self) -> dict:
        return {
            "cs_complexity": self.cs_complexity,
            "cs_exact": self.cs_exact,
            "true_complexity": self.true_complexity,
            "true_complexity_d_ge_1": self.true_complexity_positive,
            "witness_partitions": self.witness_partitions,
            "tensor_rank_trace": self.tensor_rank_trace,
            "flags": self.flags,
        }


def complexity_report(S: LinearSystem) -> ComplexityReport:
    cs = cs_complexity(S)
    trace: list[dict] = []
    d = true_complexity(S, trace=trace)
    flags = []
    if d == 0:
        flags.append("true-complexity-zero")
    if cs.s > S.p:
        flags.append("cs-complexity-exceeds-p")
        warnings.warn(f"Cauchy-Schwarz complexity {cs.s} > p = {S.p}; tensor criterion may not describe true complexity")
    if not cs.exact:
        flags.append("cs-upper-bound-only")
    assert d <= cs.s or not cs.exact or cs.s > S.p, f"true complexity {d} exceeds CS complexity {cs.s}"
    return ComplexityReport(cs.s, d, cs.witnesses, trace, cs.exact, flags)


def all_systems(p: int, k: int, m_max: int, m_min: int = 1) -> Iterable[LinearSystem]:
    """Every set of distinct forms (as a sorted tuple) with m_min <= m <= m_max."""
    vecs = list(itertools.product(range(p), repeat=k))
    for m in range(m_min, m_max + 1):
        for combo in itertools.combinations(vecs, m):
            yield LinearSystem.from_lists(combo, p)


def systems_up_to_isomorphism(p: int, k: int, m_max: int, pairwise_independent: bool = False) -> list[LinearSystem]:
    seen: dict[tuple, LinearSystem] = {}
    for S in all_systems(p, k, m_max):
        if pairwise_independent and scalar_multiple_pair(S) is not None:
            continue
        key = isomorphism_key(S)
        seen.setdefault(key, S)
    return list(seen.values())

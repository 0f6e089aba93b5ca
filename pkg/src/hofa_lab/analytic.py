"""Complex-valued functions on F_p^n: Fourier analysis, Gowers norms and
linear-form averages."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import ff_core
from .errors import BudgetError, ValidationError
from .ff_core import FpVector, check_prime
from .linsys import LinearSystem, nullspace
from .multilinear import form_value_indices
from .poly import Polynomial
from .reduce import tree_mean, tree_sum

DIRECT_BUDGET = 2**28
CHUNK_POINTS = 2**18
BOUND_TOL = 1e-9


@lru_cache(maxsize=64)
def roots_of_unity(p: int) -> np.ndarray:
    """``e_p(a)`` for a = 0..p-1."""
    out = np.exp(2j * np.pi * np.arange(p) / p)
    out.setflags(write=False)
    return out


def e_p(values, p: int) -> np.ndarray:
    return roots_of_unity(p)[np.asarray(values, dtype=np.int64) % p]


@dataclass(frozen=True, eq=False)
class DenseFunction:
    p: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        check_prime(self.p)
        v = np.array(self.values, dtype=np.complex128).reshape(-1)
        if v.shape != (self.p**self.n,):
            raise ValidationError(f"expected {self.p ** self.n} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.size else 0.0

    @property
    def bounded(self) -> bool:
        """Whether the values lie in the closed unit disk."""
        return self.sup_norm <= 1 + BOUND_TOL

    def _check(self, other: "DenseFunction") -> None:
        if (self.p, self.n) != (other.p, other.n):
            raise ValidationError(f"function mismatch: ({self.p},{self.n}) vs ({other.p},{other.n})")

    def _wrap(self, values) -> "DenseFunction":
        return DenseFunction(self.p, self.n, values)

    def __add__(self, other):
        if isinstance(other, DenseFunction):
            self._check(other)
            return self._wrap(self.values + other.values)
        return self._wrap(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DenseFunction):
            self._check(other)
            return self._wrap(self.values - other.values)
        return self._wrap(self.values - other)

    def __mul__(self, other):
        if isinstance(other, DenseFunction):
            self._check(other)
            return self._wrap(self.values * other.values)
        return self._wrap(self.values * other)

    __rmul__ = __mul__

    def conj(self) -> "DenseFunction":
        return self._wrap(np.conj(self.values))

    def mean(self) -> complex:
        return complex(tree_mean(self.values))

    def l2_squared(self) -> float:
        """E |f|^2."""
        return float(tree_mean(np.abs(self.values) ** 2))

    def allclose(self, other: "DenseFunction", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.values, other.values, rtol=0, atol=atol))

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, c, p: int, n: int) -> "DenseFunction":
        return cls(p, n, np.full(p**n, c, dtype=np.complex128))

    @classmethod
    def phase(cls, P: Polynomial) -> "DenseFunction":
        """e_p(P(x))."""
        return cls(P.p, P.n, e_p(P.table, P.p))

    @classmethod
    def indicator(cls, indices, p: int, n: int) -> "DenseFunction":
        v = np.zeros(p**n, dtype=np.complex128)
        idx = np.asarray(list(indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= p**n):
            raise ValidationError("indicator index out of range")
        v[idx] = 1
        return cls(p, n, v)

    @classmethod
    def character(cls, alpha: int, p: int, n: int) -> "DenseFunction":
        a = ff_core.points(p, n)[alpha]
        return cls(p, n, e_p(ff_core.points(p, n) @ a, p))

    @classmethod
    def random_unimodular(cls, p: int, n: int, seed: int) -> "DenseFunction":
        rng = np.random.default_rng(seed)
        return cls(p, n, np.exp(2j * np.pi * rng.random(p**n)))

    @classmethod
    def random_bounded(cls, p: int, n: int, seed: int) -> "DenseFunction":
        """Values uniform in the unit disk."""
        rng = np.random.default_rng(seed)
        r = np.sqrt(rng.random(p**n))
        return cls(p, n, r * np.exp(2j * np.pi * rng.random(p**n)))


def _warn_unbounded(*fs: DenseFunction) -> None:
    if any(not f.bounded for f in fs):
        warnings.warn("function exceeds the unit disk; bound assumes values in D")


# ---------------------------------------------------------------------------
# basic functionals
# ---------------------------------------------------------------------------

def bias(f: DenseFunction) -> float:
    return abs(f.mean())


def inner_product(f: DenseFunction, g: DenseFunction) -> complex:
    f._check(g)
    return complex(tree_mean(f.values * np.conj(g.values)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    p: int
    n: int
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.complex128).reshape(-1)
        if c.shape != (self.p**self.n,):
            raise ValidationError(f"expected {self.p ** self.n} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __getitem__(self, alpha: int) -> complex:
        return complex(self.coefficients[alpha])

    def parseval_mass(self) -> float:
        return float(tree_sum(np.abs(self.coefficients) ** 2))


def _axes_shape(p: int, n: int) -> tuple[int, ...]:
    # C-order reshape puts coordinate 0 (least significant) on the last axis
    return (p,) * n if n else (1,)


def fourier(f: DenseFunction, method: str = "fast") -> Spectrum:
    """Coefficients f^(alpha) = <f, chi_alpha>, chi_alpha(x) = e_p(alpha . x)."""
    p, n = f.p, f.n
    if method == "fast":
        arr = np.fft.fftn(f.values.reshape(_axes_shape(p, n))).reshape(-1) / p**n
    elif method == "direct":
        pts = ff_core.points(p, n)
        chars = e_p(pts @ pts.T, p)  # chars[alpha, x]
        arr = (np.conj(chars) @ f.values) / p**n
    else:
        raise ValidationError(f"unknown Fourier method {method!r}")
    return Spectrum(p, n, arr)


def inverse_fourier(s: Spectrum, method: str = "fast") -> DenseFunction:
    p, n = s.p, s.n
    if method == "fast":
        arr = np.fft.ifftn(s.coefficients.reshape(_axes_shape(p, n))).reshape(-1) * p**n
    elif method == "direct":
        pts = ff_core.points(p, n)
        arr = e_p(pts @ pts.T, p).T @ s.coefficients
    else:
        raise ValidationError(f"unknown Fourier method {method!r}")
    return DenseFunction(p, n, arr)


def _dir_index(y, p: int, n: int) -> int:
    if isinstance(y, FpVector):
        if (y.p, y.n) != (p, n):
            raise ValidationError("direction does not match the function's domain")
        return ff_core.idx_encode(y)
    y = int(y)
    if not 0 <= y < p**n:
        raise ValidationError(f"direction index {y} out of range")
    return y


def mult_derivative(f: DenseFunction, y) -> DenseFunction:
    """x -> f(x + y) * conj(f(x)); ``y`` is an FpVector or an index."""
    yi = _dir_index(y, f.p, f.n)
    v = f.values
    return f._wrap(v[ff_core.shift_indices(f.p, f.n, yi)] * np.conj(v))


def _all_derivatives(rows: np.ndarray, A: np.ndarray) -> np.ndarray:
    """rows (R, N) -> (R*N, N) with row (r, y) = Delta~_y rows[r]."""
    R, N = rows.shape
    shifted = rows[:, A.T]  # (R, y, x) = rows[r, x + y]
    return (shifted * np.conj(rows)[:, None, :]).reshape(R * N, N)


# ---------------------------------------------------------------------------
# Gowers norms
# ---------------------------------------------------------------------------

def gowers_power(f: DenseFunction, k: int, method: str = "fourier", budget: int = DIRECT_BUDGET) -> float:
    """||f||_{U^k}^{2^k} (real part; the imaginary part is rounding noise)."""
    if k < 1:
        raise ValidationError(f"Gowers norm needs k >= 1, got {k}")
    p, n, N = f.p, f.n, f.size
    if k == 1:
        return abs(f.mean()) ** 2
    if method == "direct":
        return float(np.real(_gowers_direct(f, k, budget)))
    A = ff_core.addition_table(p, n)
    if method == "recursive":
        depth = k - 1
    elif method == "fourier":
        depth = k - 2
    else:
        raise ValidationError(f"unknown Gowers method {method!r}")
    if N ** (depth + 1) > budget:
        raise BudgetError(f"U^{k} ({method})", N ** (depth + 1), budget)
    rows = f.values[None, :]
    for _ in range(depth):
        rows = _all_derivatives(rows, A)
    if method == "recursive":
        # ||g||_{U^1}^2 = |E g|^2 for every (k-1)-fold derivative g
        per = np.abs(rows.mean(axis=1)) ** 2
    else:
        ft = np.fft.fftn(rows.reshape((rows.shape[0],) + _axes_shape(p, n)), axes=tuple(range(1, max(n, 1) + 1)))
        per = (np.abs(ft.reshape(rows.shape[0], -1) / N) ** 4).sum(axis=1)
    return float(tree_mean(per))


def _cube_average(vals: list[np.ndarray], p: int, n: int, k: int) -> complex:
    """E_{x, y_1..y_k} prod_mask vals[mask](x + sum_{i in mask} y_i).

    ``vals`` is indexed by bitmask over range(k) and already conjugated as
    needed.  Direction tuples are processed in fixed-size vectorised chunks.
    """
    N = p**n
    A = ff_core.addition_table(p, n)
    total = N**k
    batch = max(1, CHUNK_POINTS // (N * 2**k))
    sums = []
    x = np.arange(N, dtype=np.int64)[None, :]
    for start in range(0, total, batch):
        t = np.arange(start, min(total, start + batch), dtype=np.int64)
        ys = [((t // N**i) % N)[:, None] for i in range(k)]
        pos = [np.broadcast_to(x, (t.size, N))]
        acc = vals[0][pos[0]].copy()
        for mask in range(1, 2**k):
            hi = mask.bit_length() - 1
            pos.append(A[pos[mask & ~(1 << hi)], ys[hi]])
            acc *= vals[mask][pos[mask]]
        sums.append(tree_sum(acc.reshape(-1)))
    return complex(tree_sum(np.array(sums)) / (total * N))


def _gowers_direct(f: DenseFunction, k: int, budget: int) -> complex:
    """Literal cube average E_{x,y} prod_S C^{k-|S|} f(x + sum_{i in S} y_i)."""
    p, n, N = f.p, f.n, f.size
    if N ** (k + 1) > budget:
        raise BudgetError(f"U^{k} (direct)", N ** (k + 1), budget)
    v, vc = f.values, np.conj(f.values)
    vals = [vc if (k - bin(mask).count("1")) % 2 else v for mask in range(2**k)]
    return _cube_average(vals, p, n, k)


def gowers_norm(f: DenseFunction, k: int, method: str = "fourier", budget: int = DIRECT_BUDGET) -> float:
    """||f||_{U^k}; methods 'fourier' (default), 'recursive', 'direct'."""
    val = gowers_power(f, k, method, budget)
    return max(val, 0.0) ** (1.0 / 2**k)


def gowers_inner_product(family: Mapping, k: int | None = None, budget: int = DIRECT_BUDGET) -> complex:
    """E prod_S C^{k-|S|} f_S(X + sum_{i in S} Y_i) for a family indexed by
    subsets of range(k) (any iterable of ints as key)."""
    fam = {frozenset(S): f for S, f in family.items()}
    if k is None:
        k = max((max(S) + 1 for S in fam if S), default=0)
    subsets = [frozenset(S) for r in range(k + 1) for S in itertools.combinations(range(k), r)]
    missing = [sorted(S) for S in subsets if S not in fam]
    if missing:
        raise ValidationError(f"family is missing subsets {missing}")
    f0 = fam[frozenset()]
    for f in fam.values():
        f0._check(f)
    p, n, N = f0.p, f0.n, f0.size
    if N ** (k + 1) > budget:
        raise BudgetError("gowers_inner_product", N ** (k + 1), budget)
    vals = []
    for mask in range(2**k):
        S = frozenset(i for i in range(k) if mask >> i & 1)
        vals.append(np.conj(fam[S].values) if (k - len(S)) % 2 else fam[S].values)
    return _cube_average(vals, p, n, k)


# ---------------------------------------------------------------------------
# linear-form averages
# ---------------------------------------------------------------------------

def _as_function_list(S: LinearSystem, fs) -> list[DenseFunction]:
    if isinstance(fs, DenseFunction):
        fs = [fs] * S.m
    fs = list(fs)
    if len(fs) != S.m:
        raise ValidationError(f"system has {S.m} forms but {len(fs)} functions were given")
    for f in fs:
        if f.p != S.p:
            raise ValidationError(f"function over F_{f.p} used with a system over F_{S.p}")
        fs[0]._check(f)
    return fs


def t_average_naive(S: LinearSystem, fs, budget: int = DIRECT_BUDGET) -> complex:
    """E_{X in (F_p^n)^k} prod_i f_i(L_i(X)) by enumeration."""
    fs = _as_function_list(S, fs)
    n, N = fs[0].n, fs[0].size
    total = N**S.k
    if total > budget:
        raise BudgetError("t_average_naive", total, budget)
    chunk_means = []
    for start in range(0, total, CHUNK_POINTS):
        stop = min(total, start + CHUNK_POINTS)
        idx = form_value_indices(S, n, start, stop)
        prod = np.ones(stop - start, dtype=np.complex128)
        for j, f in enumerate(fs):
            prod *= f.values[idx[j]]
        chunk_means.append(tree_sum(prod))
    return complex(tree_sum(np.array(chunk_means)) / total)


def fourier_kernel(S: LinearSystem) -> np.ndarray:
    """All beta in F_p^m with sum_i beta_i L_i = 0 (rows)."""
    from .linsys import span_elements

    return span_elements(nullspace(S.matrix.T, S.p), S.p)


def t_average_fourier(S: LinearSystem, fs, budget: int = DIRECT_BUDGET) -> complex:
    """Sum of prod_i f_i^(alpha_i) over alpha with sum_i alpha_i (x) L_i = 0.

    Coordinatewise the constraint says (alpha_1(c), .., alpha_m(c)) lies in
    the relation space of the system, so the sum has |K|^n terms.
    """
    fs = _as_function_list(S, fs)
    p, n = S.p, fs[0].n
    K = fourier_kernel(S)  # (|K|, m)
    terms = K.shape[0] ** n
    if terms > budget:
        raise BudgetError("t_average_fourier", terms, budget)
    specs = [fourier(f).coefficients for f in fs]
    # alpha_i index = sum_c K[choice_c, i] * p**c
    alpha = np.zeros((1, S.m), dtype=np.int64)
    for c in range(n):
        alpha = (alpha[:, None, :] + K[None, :, :] * p**c).reshape(-1, S.m)
    prod = np.ones(alpha.shape[0], dtype=np.complex128)
    for i in range(S.m):
        prod *= specs[i][alpha[:, i]]
    return complex(tree_sum(prod))


def t_average(S: LinearSystem, fs, method: str = "auto", budget: int = DIRECT_BUDGET) -> complex:
    """Linear-form average; 'auto' enumerates when affordable, else uses Fourier."""
    if method == "naive":
        return t_average_naive(S, fs, budget)
    if method == "fourier":
        return t_average_fourier(S, fs, budget)
    if method != "auto":
        raise ValidationError(f"unknown average method {method!r}")
    fl = _as_function_list(S, fs)
    if fl[0].size ** S.k <= min(budget, 2**20):
        return t_average_naive(S, fl, budget)
    return t_average_fourier(S, fl, budget)

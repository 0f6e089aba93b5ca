"""Polynomial factors, rank certification and energy-increment decompositions."""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import ff_core
from .analytic import CHUNK_POINTS, DenseFunction, e_p, gowers_norm, inner_product
from .errors import BudgetError, ValidationError
from .linsys import in_span
from .poly import ENUM_BUDGET, Polynomial, coefficient_matrix, enumerate_tables, monomial_tables, monomials
from .reduce import tree_mean

RANK_BUDGET = 2**22
MEASURABLE_TOL = 1e-9


# ---------------------------------------------------------------------------
# factors
# ---------------------------------------------------------------------------

def _clean(polys: Sequence[Polynomial]) -> tuple[Polynomial, ...]:
    """Drop constants and exact duplicates, keeping first occurrences."""
    out: list[Polynomial] = []
    for P in polys:
        if P.degree() >= 1 and P not in out:
            out.append(P)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class PolynomialFactor:
    p: int
    n: int
    polys: tuple[Polynomial, ...] = ()
    rank_certificate: "RankCertificate | None" = None

    def __post_init__(self):
        ff_core.check_prime(self.p)
        polys = tuple(self.polys)
        for P in polys:
            if (P.p, P.n) != (self.p, self.n):
                raise ValidationError("factor polynomial has the wrong field or dimension")
        object.__setattr__(self, "polys", polys)

    @classmethod
    def trivial(cls, p: int, n: int) -> "PolynomialFactor":
        return cls(p, n, ())

    @property
    def complexity(self) -> int:
        return len(self.polys)

    @property
    def degree(self) -> int:
        return max((P.degree() for P in self.polys), default=0)

    def with_polys(self, polys: Sequence[Polynomial], cert=None) -> "PolynomialFactor":
        return PolynomialFactor(self.p, self.n, tuple(polys), cert)

    def value_tuples(self) -> np.ndarray:
        """(N, C) array of (P_1(x), .., P_C(x))."""
        N = self.p**self.n
        if not self.polys:
            return np.zeros((N, 0), dtype=np.int64)
        return np.stack([P.table for P in self.polys], axis=1)

    @property
    def labels(self) -> np.ndarray:
        """Compact atom id of every point (ids follow sorted value tuples)."""
        cached = self.__dict__.get("_labels")
        if cached is None:
            vt = self.value_tuples()
            if vt.shape[1] == 0:
                cached = np.zeros(vt.shape[0], dtype=np.int64)
            else:
                _, cached = np.unique(vt, axis=0, return_inverse=True)
                cached = cached.reshape(-1).astype(np.int64)
            cached.setflags(write=False)
            self.__dict__["_labels"] = cached
        return cached

    def atoms(self) -> dict[tuple[int, ...], list[int]]:
        """Nonempty atoms: value tuple -> point indices."""
        out: dict[tuple[int, ...], list[int]] = {}
        for x, row in enumerate(self.value_tuples()):
            out.setdefault(tuple(int(v) for v in row), []).append(x)
        return out

    @property
    def num_atoms(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def refines(self, other: "PolynomialFactor") -> bool:
        """Every atom of ``self`` lies inside an atom of ``other``."""
        a, b = self.labels, other.labels
        first = np.full(self.num_atoms, -1, dtype=np.int64)
        first[a] = b
        return bool(np.all(first[a] == b))

    def is_measurable(self, g: DenseFunction, tol: float = MEASURABLE_TOL) -> bool:
        return bool(np.max(np.abs(g.values - conditional_expectation(g, self).values), initial=0.0) <= tol)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "polys": [P.to_json() for P in self.polys],
            "rank_certificate": None if self.rank_certificate is None else self.rank_certificate.to_json(),
        }


def conditional_expectation(f: DenseFunction, B: PolynomialFactor) -> DenseFunction:
    """Atom-wise average of f."""
    if (f.p, f.n) != (B.p, B.n):
        raise ValidationError("function and factor live on different spaces")
    lab = B.labels
    K = B.num_atoms
    counts = np.bincount(lab, minlength=K)
    re_ = np.bincount(lab, weights=f.values.real, minlength=K)
    im_ = np.bincount(lab, weights=f.values.imag, minlength=K)
    means = (re_ + 1j * im_) / counts
    return DenseFunction(f.p, f.n, means[lab])


def project_check(f: DenseFunction, g: DenseFunction, B: PolynomialFactor) -> tuple[complex, complex]:
    """(<f, g>, <E(f|B), g>) for a B-measurable g."""
    if not B.is_measurable(g):
        raise ValidationError("g is not measurable with respect to the factor")
    return inner_product(f, g), inner_product(conditional_expectation(f, B), g)


def l2_distance_sq(f: DenseFunction, g: DenseFunction) -> float:
    return float(tree_mean(np.abs(f.values - g.values) ** 2))


# ---------------------------------------------------------------------------
# rank
# ---------------------------------------------------------------------------

@dataclass
class RankCertificate:
    """Outcome of a rank query ``rank > r``.

    ``holds`` is True (certified), False (a low-rank witness was found) or
    None (undetermined; only bias data was gathered).
    """

    kind: str  # exhaustive | bias-bound | none
    r: int
    holds: bool | None
    alpha: tuple[int, ...] | None = None
    witness_polys: tuple[Polynomial, ...] = ()
    gamma: np.ndarray | None = None
    max_bias: float | None = None
    biases: dict = field(default_factory=dict)
    configured_bound: int | None = None

    def verify(self, polys: Sequence[Polynomial]) -> bool:
        """Re-check a low-rank witness pointwise."""
        if self.holds is not False or self.alpha is None:
            return True
        P = _combination_table(polys, self.alpha)
        if not self.witness_polys:
            return bool(np.all(P == (self.gamma[0] if self.gamma is not None else P[0])))
        p = polys[0].p
        lab = np.zeros_like(P)
        for i, Q in enumerate(self.witness_polys):
            lab = lab + Q.table * p**i
        return bool(np.all(self.gamma[lab] == P))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "r": self.r, "holds": self.holds}
        if self.alpha is not None:
            out["alpha"] = list(self.alpha)
            out["witness"] = [Q.to_json() for Q in self.witness_polys]
            if self.gamma is not None:
                out["gamma"] = [int(v) for v in self.gamma]
        if self.max_bias is not None:
            out["max_bias"] = self.max_bias
        if self.configured_bound is not None:
            out["configured_bound"] = self.configured_bound
        return out


def _combination_table(polys: Sequence[Polynomial], alpha: Sequence[int]) -> np.ndarray:
    p = polys[0].p
    acc = np.zeros(p ** polys[0].n, dtype=np.int64)
    for a, P in zip(alpha, polys):
        if a:
            acc = acc + a * P.table
    return acc % p


def normalized_nonzero(p: int, t: int):
    """Nonzero vectors of F_p^t whose first nonzero entry is 1."""
    for alpha in itertools.product(range(p), repeat=t):
        nz = [a for a in alpha if a]
        if nz and nz[0] == 1:
            yield alpha


@lru_cache(maxsize=32)
def _lower_tables(p: int, n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients and tables of polynomials of degree <= d with zero constant term.

    Dropping constants loses nothing: shifting Q does not change its fibres.
    """
    if d < 1:
        return np.zeros((1, 1), dtype=np.int64), np.zeros((1, p**n), dtype=np.int64)
    C = coefficient_matrix(p, n, d)
    C = C[C[:, 0] == 0]
    T = (C @ monomial_tables(p, n, d)) % p
    # a zero-constant table is zero exactly when the polynomial is
    T.setflags(write=False)
    C.setflags(write=False)
    return C, T


def _exhaustive_cost(polys: Sequence[Polynomial], r: int) -> int:
    p, n = polys[0].p, polys[0].n
    d = max(P.degree() for P in polys)
    T = p ** (len(monomials(p, n, d - 1)) - 1) if d >= 2 else 1
    n_alpha = (p ** len(polys) - 1) // (p - 1)
    return n_alpha * math.comb(T + r - 1, r) * p**n


def _find_representation(P: np.ndarray, tables: np.ndarray, r: int, p: int):
    """First r-multiset of rows of ``tables`` whose joint fibres determine P."""
    N = P.size
    if r == 0 or tables.shape[0] == 0:
        return ((), np.array([P[0]])) if np.all(P == P[0]) else None
    place = p ** np.arange(r, dtype=np.int64)
    combos = itertools.combinations_with_replacement(range(tables.shape[0]), r)
    batch = max(1, CHUNK_POINTS // max(N, 1))
    while True:
        chunk = list(itertools.islice(combos, batch))
        if not chunk:
            return None
        idx = np.array(chunk, dtype=np.int64)  # (B, r)
        lab = np.einsum("brx,r->bx", tables[idx], place)
        store = np.zeros((len(chunk), p**r), dtype=np.int64)
        rows = np.repeat(np.arange(len(chunk)), N).reshape(len(chunk), N)
        store[rows, lab] = P[None, :]
        ok = np.all(store[rows, lab] == P[None, :], axis=1)
        if ok.any():
            b = int(np.argmax(ok))
            gamma = np.zeros(p**r, dtype=np.int64)
            gamma[lab[b]] = P
            return tuple(int(i) for i in idx[b]), gamma


def rank_gt(
    polys: Sequence[Polynomial],
    r: int,
    budget: int = RANK_BUDGET,
    allow_fallback: bool = True,
    bias_bound: Callable[[float], int] | None = None,
) -> RankCertificate:
    """Decide whether rank(polys) > r.

    Exhaustive when affordable: every nonzero combination (up to scaling) is
    tested against every r-multiset of lower-degree polynomials.  Otherwise
    the biases of all combinations are recorded and the answer is left open.
    """
    polys = list(polys)
    if not polys:
        return RankCertificate("exhaustive", r, True)
    if r < 0:
        raise ValidationError(f"rank threshold must be >= 0, got {r}")
    p, n = polys[0].p, polys[0].n
    cost = _exhaustive_cost(polys, r)
    if cost > budget:
        if not allow_fallback:
            raise BudgetError("exhaustive rank search", cost, budget)
        return _bias_certificate(polys, r, bias_bound)
    degs = [P.degree() for P in polys]
    for alpha in normalized_nonzero(p, len(polys)):
        d = max(dg for a, dg in zip(alpha, degs) if a)
        P = _combination_table(polys, alpha)
        coeffs, tables = _lower_tables(p, n, d - 1)
        found = _find_representation(P, tables if d >= 2 else tables[:0], r, p)
        if found is not None:
            idx, gamma = found
            wit = tuple(Polynomial.from_coefficients(coeffs[i], p, n, d - 1) for i in idx)
            return RankCertificate("exhaustive", r, False, alpha, wit, gamma)
    return RankCertificate("exhaustive", r, True)


def _bias_certificate(polys, r, bias_bound) -> RankCertificate:
    p = polys[0].p
    biases = {}
    for alpha in normalized_nonzero(p, len(polys)):
        biases[alpha] = float(abs(tree_mean(e_p(_combination_table(polys, alpha), p))))
    eps = max(biases.values())
    return RankCertificate(
        "bias-bound", r, None, max_bias=eps, biases=biases,
        configured_bound=None if bias_bound is None else int(bias_bound(eps)),
    )


def polynomial_rank(polys: Sequence[Polynomial], r_max: int = 2, budget: int = RANK_BUDGET) -> int | None:
    """Exact rank when it is at most r_max; None means rank > r_max."""
    for r in range(r_max + 1):
        if not rank_gt(polys, r, budget, allow_fallback=False).holds:
            return r
    return None


# ---------------------------------------------------------------------------
# growth functions and refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthFunction:
    """r(C) given as an affine formula ``C+k``, a constant, or a sequence."""

    offset: int = 0
    slope: int = 1
    sequence: tuple[int, ...] | None = None

    @classmethod
    def parse(cls, spec) -> "GrowthFunction":
        if isinstance(spec, GrowthFunction):
            return spec
        if isinstance(spec, int):
            return cls(offset=spec, slope=0)
        if isinstance(spec, (list, tuple)):
            if not spec or any(int(v) < 0 for v in spec):
                raise ValidationError("growth sequence must be a nonempty list of nonnegative ints")
            return cls(sequence=tuple(int(v) for v in spec))
        s = str(spec).replace(" ", "")
        m = re.fullmatch(r"(?:r\(C\)=)?C(?:\+(\d+))?", s)
        if m:
            return cls(offset=int(m.group(1) or 0), slope=1)
        m = re.fullmatch(r"(?:r\(C\)=)?(\d+)", s)
        if m:
            return cls(offset=int(m.group(1)), slope=0)
        raise ValidationError(f"cannot parse growth function {spec!r}; expected 'r(C)=C+<int>'")

    def __call__(self, C: int) -> int:
        if self.sequence is not None:
            return self.sequence[min(C, len(self.sequence) - 1)]
        return self.slope * C + self.offset

    def describe(self) -> str:
        if self.sequence is not None:
            return f"sequence {list(self.sequence)}"
        return f"r(C)={self.slope}*C+{self.offset}"


def _homogenized(polys: Sequence[Polynomial]) -> list[Polynomial]:
    """Nonconstant homogeneous parts, skipping those already spanned."""
    out: list[Polynomial] = []
    for P in polys:
        for l, H in P.homogeneous_parts().items():
            if l >= 1 and not _in_poly_span(H, out):
                out.append(H)
    return out


def _in_poly_span(H: Polynomial, basis: Sequence[Polynomial]) -> bool:
    same = [Q for Q in basis if Q.degree() == H.degree() and Q.is_homogeneous()]
    if not same:
        return False
    d = H.degree()
    return in_span(H.coefficient_vector(d), [Q.coefficient_vector(d) for Q in same], H.p) is not None


def refine_to_high_rank(
    B: PolynomialFactor,
    growth,
    budget: int = RANK_BUDGET,
    homogeneous: bool = False,
    max_rounds: int = 1000,
) -> PolynomialFactor:
    """Replace generators by lower-degree witnesses until rank > r(C)."""
    r_of = GrowthFunction.parse(growth)
    polys = list(_clean(B.polys))
    if homogeneous:
        polys = _homogenized(polys)
    current = B.with_polys(polys)
    for _ in range(max_rounds):
        cert = rank_gt(polys, r_of(len(polys)), budget, allow_fallback=False)
        if cert.holds:
            out = B.with_polys(polys, cert)
            assert out.refines(B)
            return out
        a = cert.alpha
        degs = [P.degree() if ai else -1 for ai, P in zip(a, polys)]
        j = degs.index(max(degs))
        new = polys[:j] + polys[j + 1:]
        extra = [Q for Q in cert.witness_polys if Q.degree() >= 1]
        if homogeneous:
            polys = _homogenized(new + extra)
        else:
            polys = list(_clean(new + extra))
        nxt = B.with_polys(polys)
        assert nxt.refines(current)
        current = nxt
    raise BudgetError("refine_to_high_rank rounds", max_rounds + 1, max_rounds)


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

@dataclass
class DecomposeConfig:
    d: int
    epsilon: float
    delta: float | None = None
    max_steps: int | None = None
    growth: object = None
    budget: int = ENUM_BUDGET
    rank_budget: int = RANK_BUDGET

    def __post_init__(self):
        if self.d < 0:
            raise ValidationError(f"degree must be >= 0, got {self.d}")
        if self.delta is None:
            self.delta = self.epsilon / 2
        if not 0 < self.delta <= self.epsilon <= 1:
            raise ValidationError(f"need 0 < delta <= epsilon <= 1, got delta={self.delta}, epsilon={self.epsilon}")
        if self.max_steps is None:
            self.max_steps = math.ceil(1 / self.delta**2) + 1
        if self.max_steps < 1:
            raise ValidationError("max_steps must be >= 1")
        if self.growth is not None:
            self.growth = GrowthFunction.parse(self.growth)


@dataclass
class DecompositionResult:
    factor: PolynomialFactor
    f1: DenseFunction
    f2: DenseFunction
    energy_trace: list[float]
    norm_trace: list[float]
    correlations: list[float]
    found: list[Polynomial]
    status: str  # converged | max-steps | correlation-below-threshold

    @property
    def steps(self) -> int:
        return len(self.energy_trace)

    @property
    def residual_norm(self) -> float:
        return self.norm_trace[-1]

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_json(self) -> dict:
        cert = self.factor.rank_certificate
        return {
            "factor": [P.to_json() for P in self.factor.polys],
            "energy_trace": self.energy_trace,
            "norm_trace": self.norm_trace,
            "correlations": self.correlations,
            "residual_norm": self.residual_norm,
            "steps": self.steps,
            "status": self.status,
            "rank_certificate": None if cert is None else cert.to_json(),
        }


def _phase_bank(p: int, n: int, d: int, budget: int):
    coeffs, tables = enumerate_tables(p, n, d, budget)
    nonconst = np.any(coeffs[:, 1:] != 0, axis=1)
    coeffs, tables = coeffs[nonconst], tables[nonconst]
    return coeffs, np.conj(e_p(tables, p))


def _best_correlation(g: np.ndarray, phases_conj: np.ndarray) -> tuple[int, float]:
    corr = np.abs(phases_conj @ g) / g.size
    t = int(np.argmax(corr))
    return t, float(corr[t])


def decompose(f: DenseFunction, cfg: DecomposeConfig) -> DecompositionResult:
    """Split f = E(f|B) + f2 with ||f2||_{U^{d+1}} <= epsilon.

    Each step adds the degree-<=d polynomial whose phase correlates best with
    the current residual; an exhaustive search over all such polynomials.
    """
    p, n = f.p, f.n
    if cfg.d >= p:
        raise ValidationError(f"decompose needs d < p (d={cfg.d}, p={p})")
    coeffs, bank = _phase_bank(p, n, cfg.d, cfg.budget)
    B = PolynomialFactor.trivial(p, n)
    energies, norms, corrs, found = [], [], [], []
    while True:
        f1 = conditional_expectation(f, B)
        g = f - f1
        energies.append(g.l2_squared())
        norms.append(gowers_norm(g, cfg.d + 1))
        if norms[-1] <= cfg.epsilon:
            status = "converged"
            break
        if len(energies) >= cfg.max_steps:
            status = "max-steps"
            break
        t, c = _best_correlation(g.values, bank)
        if c < cfg.delta:
            status = "correlation-below-threshold"
            break
        P = Polynomial.from_coefficients(coeffs[t], p, n, cfg.d)
        corrs.append(c)
        found.append(P)
        nxt = B.with_polys(_clean(B.polys + (P,)))
        if cfg.growth is not None:
            nxt = refine_to_high_rank(nxt, cfg.growth, cfg.rank_budget)
        assert nxt.refines(B)
        B = nxt
    return DecompositionResult(B, f1, g, energies, norms, corrs, found, status)


@dataclass
class MultiDecompositionResult:
    factor: PolynomialFactor
    h: list[DenseFunction]
    h_prime: list[DenseFunction]
    norms: list[float]
    steps: int
    status: str

    def to_json(self) -> dict:
        return {
            "factor": [P.to_json() for P in self.factor.polys],
            "residual_norms": self.norms,
            "steps": self.steps,
            "status": self.status,
        }


def decompose_multi(fs: Sequence[DenseFunction], cfg: DecomposeConfig) -> MultiDecompositionResult:
    """One shared factor of homogeneous polynomials for several functions."""
    fs = list(fs)
    if not fs:
        raise ValidationError("need at least one function")
    p, n = fs[0].p, fs[0].n
    for f in fs:
        fs[0]._check(f)
    if cfg.d >= p:
        raise ValidationError(f"decompose needs d < p (d={cfg.d}, p={p})")
    coeffs, bank = _phase_bank(p, n, cfg.d, cfg.budget)
    B = PolynomialFactor.trivial(p, n)
    steps = 0
    while True:
        steps += 1
        hs = [conditional_expectation(f, B) for f in fs]
        gs = [f - h for f, h in zip(fs, hs)]
        norms = [gowers_norm(g, cfg.d + 1) for g in gs]
        if max(norms) <= cfg.epsilon:
            status = "converged"
            break
        if steps >= cfg.max_steps:
            status = "max-steps"
            break
        best = max(
            ((_best_correlation(g.values, bank), i) for i, g in enumerate(gs) if norms[i] > cfg.epsilon),
            key=lambda item: item[0][1],
        )
        (t, c), _ = best
        if c < cfg.delta:
            status = "correlation-below-threshold"
            break
        P = Polynomial.from_coefficients(coeffs[t], p, n, cfg.d)
        nxt = B.with_polys(_homogenized(list(B.polys) + [P]))
        if cfg.growth is not None:
            nxt = refine_to_high_rank(nxt, cfg.growth, cfg.rank_budget, homogeneous=True)
        assert nxt.refines(B)
        B = nxt
    return MultiDecompositionResult(B, hs, gs, norms, steps, status)


# ---------------------------------------------------------------------------
# bias versus rank
# ---------------------------------------------------------------------------

@dataclass
class FrontierPoint:
    rank_above: int
    max_bias: float
    count: int


def bias_rank_frontier(p: int, n: int, d: int, r_max: int = 2, budget: int = RANK_BUDGET):
    """(bias, rank) for every polynomial of degree exactly d, plus the
    empirical frontier: the largest bias among polynomials of rank > r."""
    from .poly import enumerate_polynomials

    pairs = []
    for P in enumerate_polynomials(p, n, d):
        if P.degree() != d:
            continue
        b = float(abs(tree_mean(e_p(P.table, p))))
        pairs.append((P, b, polynomial_rank([P], r_max, budget)))
    frontier = []
    for r in range(r_max + 1):
        above = [b for _, b, rk in pairs if rk is None or rk > r]
        frontier.append(FrontierPoint(r, max(above, default=0.0), len(above)))
    return pairs, frontier

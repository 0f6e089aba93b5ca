"""The acceptance battery.  Each criterion is a plain function returning a
:class:`CriterionResult`; pytest and the CLI share them."""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analytic import (
    DenseFunction, bias, fourier, gowers_norm, gowers_power, t_average, t_average_fourier, t_average_naive,
)
from .experiments import invariance_battery, pipeline_battery
from .factors import DecomposeConfig, decompose
from .linsys import (
    LinearSystem, all_systems, arithmetic_progression, complexity_report, cs_complexity, nullspace,
    systems_up_to_isomorphism,
)
from .multilinear import (
    collection_independent, expand_composition, p_lambda_is_zero, p_lambda_is_zero_bruteforce, polarize,
    polarize_by_monomials, top_layer_matrix,
)
from .poly import Polynomial, enumerate_polynomials, monomials
from . import ff_core


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    runtime_s: float
    time_limit_s: float | None
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f"/{self.time_limit_s:g}s" if self.time_limit_s else ""
        return f"[{status}] {self.number:>2}. {self.title:<60} {self.runtime_s:7.2f}s{limit}"

    def to_json(self) -> dict:
        return {
            "criterion": self.number, "title": self.title, "passed": self.passed,
            "runtime_s": self.runtime_s, "time_limit_s": self.time_limit_s, "detail": self.detail,
        }


CRITERIA: dict[int, tuple[str, float | None, Callable]] = {}


def criterion(number: int, title: str, time_limit_s: float | None = None):
    def wrap(fn):
        CRITERIA[number] = (title, time_limit_s, fn)
        return fn
    return wrap


def run_criterion(number: int) -> CriterionResult:
    title, limit, fn = CRITERIA[number]
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    in_time = limit is None or dt < limit
    detail["within_time_limit"] = in_time
    return CriterionResult(number, title, bool(ok and in_time), dt, limit, detail)


def run_all(numbers=None) -> list[CriterionResult]:
    return [run_criterion(i) for i in (numbers or sorted(CRITERIA))]


def summary_text(results: list[CriterionResult]) -> str:
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# corpora
# ---------------------------------------------------------------------------

def random_corpus(count: int = 50) -> list[DenseFunction]:
    """Seeded functions with values in the unit disk on F_3^2 and F_5^1."""
    return [DenseFunction.random_bounded(p, n, seed) for p, n in ((3, 2), (5, 1)) for seed in range(count)]


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

@criterion(1, "U^2 norm equals the fourth-moment spectrum", 5)
def c1_gowers_fourier():
    worst = 0.0
    for f in random_corpus():
        direct = gowers_power(f, 2, method="direct")
        quartic = float(np.sum(np.abs(fourier(f).coefficients) ** 4))
        worst = max(worst, abs(direct - quartic))
    return worst <= 1e-9, {"max_abs_error": worst}


@criterion(2, "norm ladder U1 <= U2 <= U3 and |E f| <= U^k", 30)
def c2_norm_ladder():
    worst = math.inf
    for f in random_corpus():
        u = [gowers_norm(f, k) for k in (1, 2, 3)]
        m = abs(f.mean())
        slacks = [u[1] - u[0], u[2] - u[1]] + [x - m for x in u]
        worst = min(worst, min(slacks))
    return worst >= -1e-12, {"min_slack": worst}


@criterion(3, "phase polynomials have unit U^{d+1} norm", 120)
def c3_phase_norms():
    p, n = 3, 2
    fs = [DenseFunction.random_bounded(p, n, 100 + s) for s in range(5)]
    worst_unit = worst_inv = 0.0
    count = 0
    for d in (1, 2):
        base = [gowers_norm(f, d + 1) for f in fs]
        for P in enumerate_polynomials(p, n, d):
            ph = DenseFunction.phase(P)
            worst_unit = max(worst_unit, abs(gowers_norm(ph, d + 1) - 1))
            for f, b in zip(fs, base):
                worst_inv = max(worst_inv, abs(gowers_norm(f * ph, d + 1) - b))
            count += 1
    ok = worst_unit <= 1e-9 and worst_inv <= 1e-9
    return ok, {"polynomials": count, "max_unit_error": worst_unit, "max_invariance_error": worst_inv}


@criterion(4, "quadratic-phase goldens over F_5")
def c4_quadratic_goldens():
    q = DenseFunction.phase(Polynomial(5, 1, (((2,), 1),)))
    one = DenseFunction.constant(1, 5, 1)
    ap3 = arithmetic_progression(3, 5)
    vals = {
        "bias": (bias(q), 5**-0.5),
        "u2": (gowers_norm(q, 2), 5**-0.25),
        "ap3_all": (t_average_naive(ap3, [q, q, q]), 0.2),
        "ap3_first": (abs(t_average_naive(ap3, [q, one, one])), 5**-0.5),
    }
    errs = {k: abs(complex(v) - w) for k, (v, w) in vals.items()}
    return max(errs.values()) <= 1e-9, {"errors": errs}


@criterion(5, "Fourier vs enumeration for linear-form averages", 60)
def c5_t_cross_oracle():
    p = 3
    worst = 0.0
    cases = 0
    rng = np.random.default_rng(5)
    for k in (1, 2):
        for S in all_systems(p, k, 4):
            for n in (1, 2):
                for _ in range(20):
                    fs = [DenseFunction.random_bounded(p, n, int(rng.integers(2**32))) for _ in range(S.m)]
                    worst = max(worst, abs(t_average_naive(S, fs) - t_average_fourier(S, fs)))
                    cases += 1
    return worst <= 1e-9, {"cases": cases, "max_abs_error": worst}


@criterion(6, "complexity goldens and true <= CS over a corpus", 120)
def c6_complexity():
    p = 5
    goldens = {
        "3-AP": (arithmetic_progression(3, p), (1, 1)),
        "4-AP": (arithmetic_progression(4, p), (2, 2)),
        "{x,y}": (LinearSystem.from_lists([(1, 0), (0, 1)], p), (0, 0)),
    }
    got = {}
    ok = True
    for name, (S, want) in goldens.items():
        r = complexity_report(S)
        got[name] = (r.cs_complexity, r.true_complexity)
        ok &= got[name] == want
    corpus = systems_up_to_isomorphism(p, 2, 4, pairwise_independent=True)
    violations = []
    for S in corpus:
        r = complexity_report(S)
        if r.true_complexity > r.cs_complexity:
            violations.append(S.to_json())
    return ok and not violations, {"goldens": got, "corpus_size": len(corpus), "violations": violations}


def _random_homogeneous(rng, p: int, n: int, d: int) -> Polynomial:
    mons = [e for e in monomials(p, n, d) if sum(e) == d]
    while True:
        c = rng.integers(0, p, len(mons))
        if c.any():
            return Polynomial(p, n, tuple(zip(mons, (int(v) for v in c))))


def _random_degrees(rng, n: int, max_count: int = 3, max_degree: int = 3) -> list[int]:
    """1..max_count degrees, never more of one degree than there are monomials."""
    while True:
        degrees = [int(x) for x in rng.integers(1, max_degree + 1, int(rng.integers(1, max_count + 1)))]
        if all(degrees.count(d) <= math.comb(n + d - 1, d) for d in set(degrees)):
            return degrees


def _random_lambda_rows(rng, S: LinearSystem, degrees, want_zero: bool) -> np.ndarray:
    rows = []
    for d in degrees:
        K = nullspace(top_layer_matrix(S, d), S.p)
        if want_zero and K.shape[0]:
            coef = rng.integers(0, S.p, K.shape[0])
            rows.append((coef @ K) % S.p)
        else:
            rows.append(rng.integers(0, S.p, S.m))
    return np.array(rows, dtype=np.int64)


def _random_system(rng, p: int, k: int, m: int, homogeneous: bool = False) -> LinearSystem:
    # forms with L(v) = 1 make up an affine hyperplane of p^(k-1) points
    if m > (p ** (k - 1) if homogeneous else p**k):
        raise ValueError(f"cannot draw {m} distinct forms in {k} variables")
    while True:
        M = rng.integers(0, p, (m, k))
        if homogeneous:
            v = rng.integers(0, p, k)
            if not v.any():
                continue
            j = int(np.flatnonzero(v)[0])
            inv = pow(int(v[j]), -1, p)
            for r in range(m):
                rest = int(M[r] @ v - M[r, j] * v[j]) % p
                M[r, j] = (1 - rest) * inv % p
        rows = {tuple(int(x) for x in r) for r in M}
        if len(rows) == m:
            return LinearSystem.from_lists(M.tolist(), p)


@criterion(7, "coefficient zero-test matches brute force", 120)
def c7_homogeneous_dichotomy():
    p, n = 5, 2
    rng = np.random.default_rng(7)
    agree = zeros = 0
    for t in range(200):
        degrees = _random_degrees(rng, n)
        while True:
            polys = [_random_homogeneous(rng, p, n, d) for d in degrees]
            if collection_independent(polys):
                break
        S = _random_system(rng, p, int(rng.integers(1, 4)), int(rng.integers(2, 5)))
        Lam = _random_lambda_rows(rng, S, degrees, want_zero=t % 2 == 0)
        brute = p_lambda_is_zero_bruteforce(Lam, S, polys, n)
        agree += p_lambda_is_zero(Lam, S, degrees) == brute
        zeros += brute
    return agree == 200, {"agree": agree, "instances": 200, "zero_instances": zeros}


@criterion(8, "top-layer test for non-homogeneous polynomials", 120)
def c8_nonhomogeneous():
    p, n = 5, 2
    rng = np.random.default_rng(8)
    agree = zeros = 0
    for t in range(100):
        degrees = _random_degrees(rng, n)
        while True:
            tops = [_random_homogeneous(rng, p, n, d) for d in degrees]
            if collection_independent(tops):
                break
        polys = []
        for top, d in zip(tops, degrees):
            low = Polynomial(p, n, tuple((e, int(rng.integers(0, p))) for e in monomials(p, n, d - 1)))
            polys.append(top + low)
        # one variable would force every form to equal 1/v
        want_zero = t % 2 == 0
        # wide systems in two variables leave room in the top-layer kernels
        k, m = (2, int(rng.integers(4, 6))) if want_zero else (int(rng.integers(2, 4)), int(rng.integers(2, 5)))
        S = _random_system(rng, p, k, m, homogeneous=True)
        Lam = _random_lambda_rows(rng, S, degrees, want_zero)
        brute = p_lambda_is_zero_bruteforce(Lam, S, polys, n)
        agree += p_lambda_is_zero(Lam, S, degrees, homogeneous_polys=False) == brute
        zeros += brute
    return agree == 100, {"agree": agree, "instances": 100, "zero_instances": zeros}


@criterion(9, "polarization identity and the 3j^2 coefficient")
def c9_polarization():
    bad = []
    checked = 0
    for p, n, dmax in ((5, 1, 3), (3, 2, 2)):
        pts = ff_core.points(p, n)
        for P in enumerate_polynomials(p, n, dmax):
            if P.is_zero() or not P.is_homogeneous() or P.degree() < 1:
                continue
            B = polarize(P)
            diag = B.evaluate_many([pts] * B.d)
            if not np.array_equal(diag, P.table) or B.coeff_map != polarize_by_monomials(P).coeff_map:
                bad.append(str(P))
            checked += 1
    coef = [expand_composition(3, (1, j), 5).get((0, 1, 1), 0) for j in range(5)]
    want = [3 * j * j % 5 for j in range(5)]
    return not bad and coef == want, {"checked": checked, "failures": bad, "coefficients": coef}


@criterion(10, "energy-increment decomposition contract", 120)
def c10_decomposition():
    delta = 0.25
    limit = math.ceil(1 / delta**2) + 1
    failures = []
    steps = []
    for seed in range(20):
        f = DenseFunction.random_unimodular(2, 3, seed)
        r = decompose(f, DecomposeConfig(1, 0.5, delta))
        drops = -np.diff(r.energy_trace)
        ok = (
            r.status == "converged"
            and r.steps <= limit
            and r.residual_norm <= 0.5
            and all(drops[i] > 0 and drops[i] >= r.correlations[i] ** 2 - 1e-12 for i in range(len(drops)))
            and np.max(np.abs(f.values - (r.f1.values + r.f2.values))) <= 1e-12
        )
        steps.append(r.steps)
        if not ok:
            failures.append(seed)
    return not failures, {"failures": failures, "steps": steps, "step_limit": limit}


@criterion(11, "Cauchy-Schwarz bound on linear-form averages")
def c11_cs_bound():
    p = 5
    worst = math.inf
    for length in (3, 4):
        S = arithmetic_progression(length, p)
        s = cs_complexity(S).s
        for seed in range(25):
            rng = np.random.default_rng(1000 * length + seed)
            fs = [DenseFunction.random_bounded(p, 1, int(rng.integers(2**32))) for _ in range(S.m)]
            t = abs(t_average(S, fs))
            worst = min(worst, min(gowers_norm(f, s + 1) for f in fs) + 1e-9 - t)
    return worst >= 0, {"min_slack": worst}


@criterion(12, "invariance bound on the example battery")
def c12_invariance():
    reports = invariance_battery()
    return all(r.passed for r in reports), {"reports": [r.measurements[0] for r in reports]}


@criterion(13, "Delta-term expansion reconciles with the direct average")
def c13_pipeline():
    reports = pipeline_battery()
    recon = [c for r in reports for c in r.checks if c.name.startswith("Delta sum")]
    ok = len(recon) == len(reports) and all(c.passed for c in recon)
    return ok, {
        "max_reconciliation_error": max(c.lhs for c in recon),
        "all_checks_passed": all(r.passed for r in reports),
        "reports": [r.measurements[0] for r in reports],
    }

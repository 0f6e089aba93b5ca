"""Verification experiments: measured inequalities between averages and norms.

Every check compares quantities that are all computed from the stored
inputs; no existential constant is ever instantiated.
"""
from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .analytic import DenseFunction, e_p, fourier, gowers_norm, t_average
from .codecs import complex_to_json, function_from_json
from .errors import ValidationError
from .factors import DecomposeConfig, conditional_expectation, decompose_multi
from .linsys import LinearSystem, cs_complexity, is_homogeneous_system, power_in_span, true_complexity
from .multilinear import collection_independent, form_value_indices, p_lambda_is_zero, p_lambda_table
from .poly import Polynomial, poly_lincomb
from .reduce import tree_sum

TOL = 1e-9


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    passed: bool
    relation: str = "<="


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict
    measurements: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    vacuous: bool = False
    notes: list[str] = field(default_factory=list)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def le(self, name: str, lhs: float, rhs: float, tol: float = TOL) -> bool:
        ok = bool(lhs <= rhs + tol)
        self.checks.append(Check(name, float(lhs), float(rhs), ok))
        return ok

    def eq(self, name: str, lhs, rhs, tol: float = TOL) -> bool:
        ok = bool(abs(complex(lhs) - complex(rhs)) <= tol)
        self.checks.append(Check(name, abs(complex(lhs) - complex(rhs)), tol, ok, "|diff| <="))
        return ok

    def holds(self, name: str, ok: bool) -> bool:
        self.checks.append(Check(name, float(ok), 1.0, bool(ok), "is"))
        return bool(ok)

    def failed_checks(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": self.parameters,
            "measurements": self.measurements,
            "checks": [asdict(c) for c in self.checks],
            "vacuous": self.vacuous,
            "passed": self.passed,
            "notes": self.notes,
            "runtime_ms": self.runtime_ms,
        }


class _Timer:
    def __init__(self, report: ExperimentReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.runtime_ms = (time.perf_counter() - self.t0) * 1e3
        return False


def _check_bounded(fs, report: ExperimentReport) -> None:
    if any(not f.bounded for f in fs):
        report.notes.append("some input exceeds the unit disk; bounds assume values in D")
        warnings.warn("function exceeds the unit disk; bound assumes values in D")


# ---------------------------------------------------------------------------
# control by the first function's norm
# ---------------------------------------------------------------------------

def verify_strong_independence(
    S: LinearSystem,
    d: int,
    n_range: Sequence[int] = (1, 2),
    fn_specs: Sequence[dict] | None = None,
) -> ExperimentReport:
    """Track |t| against ||f_1||_{U^{d+1}} as n grows.

    Default inputs: f_1 = e_p(sum_i x_i^{d+1}) and f_2..f_m = 1.
    """
    p = S.p
    report = ExperimentReport(
        "strong-independence",
        {"system": S.to_json(), "d": d, "n_range": list(n_range), "fn_specs": fn_specs},
    )
    with _Timer(report):
        if d < 0:
            raise ValidationError(f"d must be >= 0, got {d}")
        if power_in_span(S, 0, d + 1):
            report.vacuous = True
            report.notes.append(f"L_1^{d + 1} lies in the span of the other powers; nothing to test")
            return report
        s = cs_complexity(S).s
        report.parameters["cs_complexity"] = s
        if s > p:
            report.notes.append("Cauchy-Schwarz complexity exceeds p")
        if fn_specs is None:
            if d + 1 >= p:
                raise ValidationError(f"default phase needs d + 1 < p (d={d}, p={p})")
            fn_specs = [{"type": "power_phase", "degree": d + 1}] + [{"type": "constant", "value": 1}] * (S.m - 1)
            report.parameters["fn_specs"] = fn_specs
        if len(fn_specs) != S.m:
            raise ValidationError(f"need {S.m} function specs, got {len(fn_specs)}")
        rows = []
        for n in n_range:
            fs = [function_from_json(spec, p, n) for spec in fn_specs]
            _check_bounded(fs, report)
            norm_d = gowers_norm(fs[0], d + 1)
            norm_s = gowers_norm(fs[0], s + 1)
            t = t_average(S, fs)
            rows.append({"n": n, "norm_d": norm_d, "norm_s": norm_s, "abs_t": abs(t), "t": complex_to_json(t)})
            report.le(f"|t| <= ||f_1||_U{s + 1} (n={n})", abs(t), norm_s)
        for a, b in zip(rows, rows[1:]):
            if b["norm_d"] <= a["norm_d"] + TOL:
                report.le(f"|t| co-decreases with the norm (n={a['n']}->{b['n']})", b["abs_t"], a["abs_t"])
        report.measurements = rows
    return report


# ---------------------------------------------------------------------------
# approximation of averages
# ---------------------------------------------------------------------------

def verify_avg_approx(
    S: LinearSystem,
    fn_pairs: Sequence[tuple[DenseFunction, DenseFunction]],
    d: int | None = None,
) -> ExperimentReport:
    """|t(f) - t(g)| against the U^{s+1} norms of f_i - g_i.

    Asserted: the telescoping identity, the per-term bound, the total bound
    sum_i ||f_i - g_i||_{U^{s+1}} <= 2m max_i ||f_i - g_i||_{U^{s+1}}, and for
    each nonempty subset T the bound 2^{|T|-1} min_{i in T} ||f_i - g_i||
    in the subsystem's own norm.  The U^{d+1} version is asserted only when
    d equals s; otherwise it is recorded.
    """
    m = S.m
    if len(fn_pairs) != m:
        raise ValidationError(f"need {m} function pairs, got {len(fn_pairs)}")
    fs = [f for f, _ in fn_pairs]
    gs = [g for _, g in fn_pairs]
    d = true_complexity(S) if d is None else d
    s = cs_complexity(S).s
    report = ExperimentReport("avg-approx", {"system": S.to_json(), "d": d, "cs_complexity": s})
    with _Timer(report):
        _check_bounded(fs + gs, report)
        hs = [f - g for f, g in zip(fs, gs)]
        norms_s = [gowers_norm(h, s + 1) for h in hs]
        norms_d = [gowers_norm(h, d + 1) for h in hs]
        tf, tg = t_average(S, fs), t_average(S, gs)
        diff = abs(tf - tg)
        terms = [t_average(S, gs[:i] + [hs[i]] + fs[i + 1:]) for i in range(m)]
        report.eq("telescoping identity", complex(tree_sum(np.array(terms))), tf - tg)
        for i, T in enumerate(terms):
            report.le(f"telescoping term {i} <= ||f_i - g_i||_U{s + 1}", abs(T), norms_s[i])
        report.le("|t(f)-t(g)| <= sum_i ||f_i - g_i||_U(s+1)", diff, sum(norms_s))
        report.le("|t(f)-t(g)| <= 2m max_i ||f_i - g_i||_U(s+1)", diff, 2 * m * max(norms_s))
        bound_d = 2 * m * max(norms_d)
        if d == s:
            report.le("|t(f)-t(g)| <= 2m max_i ||f_i - g_i||_U(d+1)", diff, bound_d)
        subsets = []
        for r in range(1, m + 1):
            for T in itertools.combinations(range(m), r):
                sub = S.subsystem(T)
                sT = cs_complexity(sub).s
                val = abs(t_average(sub, [hs[i] for i in T]))
                bound = 2 ** (r - 1) * min(gowers_norm(hs[i], sT + 1) for i in T)
                subsets.append({"subset": list(T), "cs_complexity": sT, "abs_avg": val, "bound": bound})
                report.le(f"subset {list(T)} product bound", val, bound)
        report.measurements = [{
            "t_f": complex_to_json(tf), "t_g": complex_to_json(tg), "diff": diff,
            "norms_s": norms_s, "norms_d": norms_d, "bound_d": bound_d,
            "within_bound_d": diff <= bound_d + TOL, "subsets": subsets,
        }]
    return report


# ---------------------------------------------------------------------------
# invariance under swapping polynomial collections
# ---------------------------------------------------------------------------

def _labels(polys: Sequence[Polynomial]) -> np.ndarray:
    p = polys[0].p
    lab = np.zeros(p ** polys[0].n, dtype=np.int64)
    for i, P in enumerate(polys):
        lab += P.table * p**i
    return lab


def gamma_table(spec, p: int, k: int) -> np.ndarray:
    """Gamma: F_p^k -> D from a seed (random unimodular), a constant, or values."""
    size = p**k
    if spec is None:
        spec = {"seed": 0}
    if isinstance(spec, dict):
        if "constant" in spec:
            return np.full(size, complex(spec["constant"]))
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        return np.exp(2j * np.pi * rng.random(size))
    arr = np.asarray(spec, dtype=np.complex128).reshape(-1)
    if arr.size != size:
        raise ValidationError(f"Gamma needs {size} values, got {arr.size}")
    return arr


def verify_invariance(
    Ps: Sequence[Polynomial],
    Qs: Sequence[Polynomial],
    S: LinearSystem,
    gamma=None,
) -> ExperimentReport:
    """|t(Gamma(P)) - t(Gamma(Q))| <= 2 eps p^{mk}, eps the largest measured
    bias of a nonvanishing combination P_Lambda or Q_Lambda."""
    Ps, Qs = list(Ps), list(Qs)
    k, m, p = len(Ps), S.m, S.p
    if k == 0 or len(Qs) != k:
        raise ValidationError("need two nonempty collections of equal size")
    if [P.degree() for P in Ps] != [Q.degree() for Q in Qs]:
        raise ValidationError("degree sequences differ")
    n = Ps[0].n
    if any((P.p, P.n) != (p, n) for P in Ps + Qs):
        raise ValidationError("all polynomials must live on the same F_p^n as the system")
    cond_polys = all(P.is_homogeneous() for P in Ps + Qs)
    cond_system = is_homogeneous_system(S) is not None
    if not (cond_polys or cond_system):
        raise ValidationError("need homogeneous polynomials or a homogeneous system")
    G = gamma_table(gamma, p, k)
    report = ExperimentReport("invariance", {
        "system": S.to_json(), "P": [P.to_json() for P in Ps], "Q": [Q.to_json() for Q in Qs],
        "n": n, "gamma": gamma if gamma is None or isinstance(gamma, dict) else "explicit",
        "homogeneous_polys": cond_polys, "homogeneous_system": cond_system,
    })
    with _Timer(report):
        f = DenseFunction(p, n, G[_labels(Ps)])
        g = DenseFunction(p, n, G[_labels(Qs)])
        eps = 0.0
        patterns_match = True
        for flat in range(1, p ** (k * m)):
            Lam = np.array([(flat // p**t) % p for t in range(k * m)]).reshape(k, m)
            tp = p_lambda_table(Lam, S, Ps, n)
            tq = p_lambda_table(Lam, S, Qs, n)
            zp, zq = not tp.any(), not tq.any()
            patterns_match &= zp == zq
            for tab, zero in ((tp, zp), (tq, zq)):
                if not zero:
                    eps = max(eps, abs(complex(tree_sum(e_p(tab, p)))) / tab.size)
        tf, tg = t_average(S, f), t_average(S, g)
        diff = abs(tf - tg)
        bound = 2 * eps * p ** (m * k)
        report.le("|t(f)-t(g)| <= 2 eps p^(mk)", diff, bound)
        report.measurements = [{
            "t_f": complex_to_json(tf), "t_g": complex_to_json(tg), "diff": diff,
            "eps_meas": eps, "bound": bound, "zero_patterns_match": bool(patterns_match),
        }]
    return report


# ---------------------------------------------------------------------------
# the decomposition pipeline for the main control theorem
# ---------------------------------------------------------------------------

def _atom_function(h: DenseFunction, polys: Sequence[Polynomial], p: int) -> np.ndarray:
    """Gamma on F_p^C with h = Gamma(P_1, .., P_C); zero on empty atoms."""
    C = len(polys)
    out = np.zeros(p**C, dtype=np.complex128)
    lab = _labels(polys) if C else np.zeros(h.size, dtype=np.int64)
    out[lab] = h.values
    return out


def verify_pipeline(
    S: LinearSystem,
    fs: Sequence[DenseFunction],
    epsilon: float = 0.5,
    d: int | None = None,
    factor_degree: int | None = None,
    growth=None,
    tol: float = 1e-6,
    max_terms: int = 2**22,
    sample_terms: int = 4096,
    seed: int = 0,
) -> ExperimentReport:
    """Replay the proof: decompose, expand E prod h_i(L_i) into a sum over
    (gamma_1..gamma_m) of Delta terms, and audit those terms."""
    fs = list(fs)
    p, m = S.p, S.m
    if len(fs) != m:
        raise ValidationError(f"need {m} functions, got {len(fs)}")
    s = cs_complexity(S).s
    d = true_complexity(S) if d is None else d
    deg = s if factor_degree is None else factor_degree
    eta = epsilon / (2 * m)
    hypothesis = not power_in_span(S, 0, d + 1)
    report = ExperimentReport("pipeline", {
        "system": S.to_json(), "n": fs[0].n, "epsilon": epsilon, "eta": eta, "d": d,
        "cs_complexity": s, "factor_degree": deg, "seed": seed, "hypothesis": hypothesis,
    })
    with _Timer(report):
        _check_bounded(fs, report)
        res = decompose_multi(fs, DecomposeConfig(deg, eta, growth=growth))
        polys = list(res.factor.polys)
        C = len(polys)
        report.parameters["factor"] = [P.to_json() for P in polys]
        n = fs[0].n

        tf = t_average(S, fs)
        th = t_average(S, res.h)
        hp_norms = [gowers_norm(h, s + 1) for h in res.h_prime]
        report.le("|t(f)-t(h)| <= sum ||h'_i||_U(s+1)", abs(tf - th), sum(hp_norms))
        if res.status == "converged" and deg == s:
            report.le("|t(f)-t(h)| <= epsilon/2", abs(tf - th), epsilon / 2)

        D = C * m
        if p**D > max_terms:
            raise ValidationError(f"Delta expansion has {p ** D} terms, above {max_terms}")
        # c_{i, gamma}: Fourier coefficients of Gamma_i on F_p^C
        coeffs = [fourier(DenseFunction(p, C, _atom_function(h, polys, p))).coefficients for h in res.h]
        prod = np.ones(1, dtype=np.complex128)
        for c in coeffs:  # gamma_1 varies fastest
            prod = (c[:, None] * prod[None, :]).reshape(-1)
        # joint distribution of (P_i(L_j(X)))_{i,j}, then its characters
        N, k = p**n, S.k
        hist = np.zeros(p**D, dtype=np.float64)
        chunk = 2**16
        for start in range(0, N**k, chunk):
            idx = form_value_indices(S, n, start, min(N**k, start + chunk))
            lab = np.zeros(idx.shape[1], dtype=np.int64)
            for j in range(m):
                for i, P in enumerate(polys):
                    lab += P.table[idx[j]] * p ** (i + C * j)
            hist += np.bincount(lab, minlength=p**D)
        shape = (p,) * D if D else (1,)
        avg = np.fft.ifftn(hist.reshape(shape)).reshape(-1) * p**D / N**k
        delta = prod * avg
        total = complex(tree_sum(delta))
        report.eq("Delta sum = E prod h_i(L_i(X))", total, th, tol)

        # gamma_1 in the low-degree set versus outside it
        low = np.zeros(p**C, dtype=bool)
        for g1 in range(p**C):
            gam = [(g1 // p**i) % p for i in range(C)]
            low[g1] = (poly_lincomb(gam, polys).degree() if C else -1) <= d
        g1_of = np.arange(p**D) % p**C
        zero = np.abs(avg - 1) <= TOL  # factor polynomials vanish at 0
        bad = int(np.sum(zero & ~low[g1_of]))
        if hypothesis:
            report.holds("no vanishing combination with gamma_1 outside the low-degree set", bad == 0)
        max_c1_low = float(np.max(np.abs(coeffs[0][low]), initial=0.0))
        surviving = np.abs(delta) > 1e-12

        degrees = [P.degree() for P in polys]
        compared = 0
        agree = True
        if C and collection_independent(polys) and all(P.is_homogeneous() for P in polys) and max(degrees) < p:
            rng = np.random.default_rng(seed)
            picks = np.arange(p**D) if p**D <= sample_terms else rng.choice(p**D, sample_terms, replace=False)
            for flat in picks:
                gam = [(int(flat) // p ** (C * j)) % p**C for j in range(m)]
                Lam = np.array([[(gam[j] // p**i) % p for j in range(m)] for i in range(C)])
                agree &= p_lambda_is_zero(Lam, S, degrees) == bool(zero[flat])
                compared += 1
            report.holds("coefficient zero-test agrees with the term averages", agree)
        report.measurements = [{
            "t_f": complex_to_json(tf), "t_h": complex_to_json(th), "delta_sum": complex_to_json(total),
            "terms": int(p**D), "surviving_terms": int(surviving.sum()), "complexity": C,
            "decomposition_status": res.status, "residual_norms": res.norms, "h_prime_norms_s": hp_norms,
            "max_abs_c1_low": max_c1_low,
            "low_mass": float(np.abs(delta[low[g1_of]]).sum()),
            "high_mass": float(np.abs(delta[~low[g1_of]]).sum()),
            "vanishing_high_terms": bad, "zero_test_compared": compared,
        }]
    return report


# ---------------------------------------------------------------------------
# default batteries
# ---------------------------------------------------------------------------

GAP_SYSTEM = [(2, 2, 2), (2, 1, 2), (4, 2, 1), (2, 3, 2), (1, 1, 4), (0, 1, 3)]


def invariance_battery() -> list[ExperimentReport]:
    p, n = 3, 2
    S = LinearSystem.from_lists([(1, 0), (1, 1), (1, 2)], p)

    def P(*terms):
        return Polynomial(p, n, tuple(terms))

    x1sq, x2sq = P(((2, 0), 1)), P(((0, 2), 1))
    cases = [
        ([x1sq], [x1sq], {"seed": 1}),
        ([x1sq], [x2sq], {"seed": 2}),
        ([x1sq], [x2sq], {"seed": 3}),
        ([x1sq], [P(((2, 0), 1), ((0, 2), 1))], {"seed": 4}),
        ([P(((1, 1), 1))], [P(((2, 0), 1), ((0, 2), 2))], {"seed": 5}),
        ([P(((1, 0), 1))], [P(((1, 0), 1), ((0, 1), 1))], {"seed": 6}),
        ([P(((2, 0), 1), ((0, 1), 1))], [P(((0, 2), 1), ((1, 0), 1))], {"seed": 7}),
        ([x1sq], [x2sq], {"constant": 0.5}),
    ]
    return [verify_invariance(a, b, S, g) for a, b, g in cases]


def pipeline_battery() -> list[ExperimentReport]:
    out = []
    p = 5
    ap3 = LinearSystem.from_lists([(1, 0), (1, 1), (1, 2)], p)
    ap4 = LinearSystem.from_lists([(1, j) for j in range(4)], p)
    x1 = Polynomial.variable(0, p, 2)
    rng = np.random.default_rng(11)
    gam = [np.exp(2j * np.pi * rng.random(p)) for _ in range(3)]
    out.append(verify_pipeline(ap3, [DenseFunction(p, 2, G[x1.table]) for G in gam]))
    out.append(verify_pipeline(ap3, [DenseFunction.constant(1, p, 1)] * 3))
    quad = DenseFunction.phase(Polynomial(p, 2, (((2, 0), 1), ((0, 2), 1))))
    out.append(verify_pipeline(ap3, [quad] + [DenseFunction.constant(1, p, 2)] * 2))
    gap = LinearSystem.from_lists(GAP_SYSTEM, p)
    sq = DenseFunction.phase(Polynomial(p, 1, (((2,), 1),)))
    out.append(verify_pipeline(gap, [sq] + [DenseFunction.constant(1, p, 1)] * 5))
    out.append(verify_pipeline(ap4, [DenseFunction.random_unimodular(p, 1, s) for s in range(4)]))
    return out

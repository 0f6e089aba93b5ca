import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hofa_lab.analytic import DenseFunction, gowers_norm, inner_product
from hofa_lab.errors import BudgetError, ValidationError
from hofa_lab.factors import (
    DecomposeConfig, GrowthFunction, PolynomialFactor, bias_rank_frontier, conditional_expectation,
    decompose, decompose_multi, polynomial_rank, project_check, rank_gt, refine_to_high_rank,
)
from hofa_lab.poly import Polynomial, enumerate_polynomials


def P(p, n, *terms):
    return Polynomial(p, n, tuple(terms))


X1X2 = P(2, 2, ((1, 1), 1))


def test_atoms_of_coordinate_factor():
    B = PolynomialFactor(3, 2, (Polynomial.variable(0, 3, 2), Polynomial.variable(1, 3, 2)))
    assert B.num_atoms == 9 and B.complexity == 2 and B.degree == 1
    assert all(len(v) == 1 for v in B.atoms().values())
    assert PolynomialFactor.trivial(3, 2).num_atoms == 1


def test_conditional_expectation_examples():
    f = DenseFunction.random_bounded(3, 2, 4)
    trivial = PolynomialFactor.trivial(3, 2)
    assert conditional_expectation(f, trivial).allclose(DenseFunction.constant(f.mean(), 3, 2))
    coords = PolynomialFactor(3, 2, (Polynomial.variable(0, 3, 2), Polynomial.variable(1, 3, 2)))
    assert conditional_expectation(f, coords).allclose(f)


@pytest.mark.parametrize("seed", range(20))
def test_conditional_expectation_is_projection(seed):
    rng = np.random.default_rng(seed)
    polys = list(enumerate_polynomials(3, 2, 2))
    chosen = [polys[i] for i in rng.choice(len(polys), size=int(rng.integers(1, 3)), replace=False)]
    B = PolynomialFactor(3, 2, tuple(chosen))
    f = DenseFunction.random_bounded(3, 2, seed)
    h = conditional_expectation(f, B)
    assert h.mean() == pytest.approx(f.mean(), abs=1e-12)
    assert conditional_expectation(h, B).allclose(h, atol=1e-12)
    assert h.l2_squared() <= f.l2_squared() + 1e-12
    assert B.is_measurable(h)
    # f - E(f|B) is orthogonal to every atom indicator
    for idx in B.atoms().values():
        g = DenseFunction.indicator(idx, 3, 2)
        a, b = project_check(f, g, B)
        assert a == pytest.approx(b, abs=1e-9)


def test_project_check_examples():
    P1 = P(3, 2, ((2, 0), 1), ((0, 1), 1))
    B = PolynomialFactor(3, 2, (P1,))
    f = DenseFunction.random_unimodular(3, 2, 9)
    a, b = project_check(f, DenseFunction.phase(P1), B)
    assert a == pytest.approx(b, abs=1e-12)
    a, b = project_check(f, DenseFunction.constant(1, 3, 2), B)
    assert a == pytest.approx(f.mean()) and b == pytest.approx(f.mean())
    with pytest.raises(ValidationError):
        project_check(f, DenseFunction.indicator([0], 3, 2), B)


def test_refines():
    x1 = Polynomial.variable(0, 3, 2)
    fine = PolynomialFactor(3, 2, (x1, Polynomial.variable(1, 3, 2)))
    coarse = PolynomialFactor(3, 2, (P(3, 2, ((2, 0), 1)),))
    assert fine.refines(coarse) and not coarse.refines(fine)


def test_rank_examples():
    cert = rank_gt([X1X2], 1)
    assert cert.kind == "exhaustive" and cert.holds is True
    low = rank_gt([X1X2], 2)
    assert low.holds is False and len(low.witness_polys) <= 2 and low.verify([X1X2])
    assert polynomial_rank([X1X2]) == 2
    lin = P(3, 2, ((1, 0), 1), ((0, 1), 2))
    assert all(rank_gt([lin], r).holds for r in range(3))
    assert polynomial_rank([lin]) is None
    sq = P(3, 1, ((2,), 1))
    c = rank_gt([sq], 1)
    assert c.holds is False and c.verify([sq])
    assert polynomial_rank([sq]) == 1


def test_rank_budget():
    big = P(5, 3, ((1, 1, 1), 1))
    with pytest.raises(BudgetError):
        rank_gt([big], 2, budget=10, allow_fallback=False)
    fb = rank_gt([big], 2, budget=10)
    assert fb.kind == "bias-bound" and fb.holds is None and fb.max_bias is not None


def test_rank_witnesses_verify_exhaustively():
    for Q in enumerate_polynomials(2, 2, 2):
        if Q.degree() < 1:
            continue
        for r in range(3):
            cert = rank_gt([Q], r)
            assert cert.holds is not None
            if cert.holds is False:
                assert cert.verify([Q])


def test_refine_examples():
    x1 = Polynomial.variable(0, 2, 2)
    B = PolynomialFactor(2, 2, (x1,))
    assert refine_to_high_rank(B, "C+1").polys == B.polys
    hi = PolynomialFactor(2, 2, (X1X2,))
    assert refine_to_high_rank(hi, 0).polys == hi.polys
    B = PolynomialFactor(2, 2, (X1X2, X1X2 + x1))
    R = refine_to_high_rank(B, "C")
    assert R.refines(B)
    cert = R.rank_certificate
    assert cert is not None and cert.holds and cert.r >= R.complexity
    assert sorted(Q.degree() for Q in R.polys) < sorted(Q.degree() for Q in B.polys)
    assert rank_gt(R.polys, R.complexity).holds


def test_growth_parsing():
    assert GrowthFunction.parse("r(C)=C+2")(3) == 5
    assert GrowthFunction.parse("C")(4) == 4
    assert GrowthFunction.parse(2)(10) == 2
    assert GrowthFunction.parse([0, 1, 3])(7) == 3
    with pytest.raises(ValidationError):
        GrowthFunction.parse("2^C")


def test_config_defaults():
    cfg = DecomposeConfig(2, 0.2)
    assert cfg.delta == pytest.approx(0.1)
    assert cfg.max_steps == math.ceil(1 / 0.1**2) + 1
    with pytest.raises(ValidationError):
        DecomposeConfig(1, 0.1, delta=0.5)


def test_decompose_quadratic_phase():
    f = DenseFunction.phase(P(3, 2, ((2, 0), 1), ((0, 1), 1)))
    res = decompose(f, DecomposeConfig(2, 0.1))
    assert res.converged
    assert max(abs(inner_product(f, DenseFunction.phase(Q))) for Q in res.factor.polys) == pytest.approx(1)
    assert np.allclose(res.f2.values, 0, atol=1e-12)
    assert (res.f1 + res.f2).allclose(f)


def test_decompose_already_uniform():
    f = DenseFunction.constant(1, 3, 2)
    res = decompose(f, DecomposeConfig(1, 0.1))
    assert res.converged and res.steps == 1 and res.factor.complexity == 0


@pytest.mark.parametrize("seed", range(5))
def test_decompose_postconditions(seed):
    f = DenseFunction.random_unimodular(2, 3, seed)
    cfg = DecomposeConfig(1, 0.5)
    res = decompose(f, cfg)
    assert res.status in {"converged", "max-steps", "correlation-below-threshold"}
    assert (res.f1 + res.f2).allclose(f, atol=1e-12)
    assert res.factor.is_measurable(res.f1)
    assert res.steps <= cfg.max_steps
    E = res.energy_trace
    for a, b, c in zip(E, E[1:], res.correlations):
        assert b <= a - c**2 + 1e-12
    if res.converged:
        assert gowers_norm(res.f2, 2) <= 0.5 + 1e-12
        assert res.steps - 1 <= math.ceil(1 / cfg.delta**2)


def test_decompose_with_growth_certifies_rank():
    f = DenseFunction.phase(P(3, 2, ((1, 1), 1)))
    res = decompose(f, DecomposeConfig(2, 0.2, growth="C"))
    assert res.converged
    cert = res.factor.rank_certificate
    assert cert is not None and cert.holds


def test_decompose_multi_example():
    fs = [DenseFunction.phase(P(3, 1, ((2,), 1))), DenseFunction.phase(P(3, 1, ((2,), 1), ((1,), 1)))]
    res = decompose_multi(fs, DecomposeConfig(2, 0.1))
    assert res.status == "converged"
    assert all(Q.is_homogeneous() for Q in res.factor.polys)
    assert {Q.degree() for Q in res.factor.polys} == {1, 2}
    for h, g in zip(res.h, res.h_prime):
        assert np.allclose(g.values, 0, atol=1e-12)
    consts = [DenseFunction.constant(c, 3, 2) for c in (1, 0.5j)]
    assert decompose_multi(consts, DecomposeConfig(2, 0.1)).factor.complexity == 0


def test_decompose_needs_small_degree():
    with pytest.raises(ValidationError):
        decompose(DenseFunction.constant(1, 2, 2), DecomposeConfig(2, 0.1))


def test_bias_rank_frontier():
    pairs, frontier = bias_rank_frontier(2, 2, 2, r_max=1)
    assert len(pairs) == 8
    assert frontier[0].count == len(pairs)
    for _, b, rk in pairs:
        assert 0 <= b <= 1


@given(st.integers(0, 2**16))
def test_factor_json_round_trip_fields(seed):
    rng = np.random.default_rng(seed)
    polys = list(enumerate_polynomials(3, 1, 2))
    chosen = tuple(polys[i] for i in rng.choice(len(polys), size=2, replace=False))
    B = PolynomialFactor(3, 1, chosen)
    out = B.to_json()
    assert out["p"] == 3 and out["n"] == 1
    assert len(out["polys"]) == B.complexity


@pytest.mark.parametrize("seed", range(10))
def test_refinement_lowers_residual_energy(seed):
    rng = np.random.default_rng(seed)
    polys = [Q for Q in enumerate_polynomials(3, 2, 2) if Q.degree() >= 1]
    idx = rng.choice(len(polys), size=3, replace=False)
    coarse = PolynomialFactor(3, 2, (polys[idx[0]],))
    fine = PolynomialFactor(3, 2, tuple(polys[i] for i in idx))
    assert fine.refines(coarse)
    f = DenseFunction.random_bounded(3, 2, seed)
    e_coarse = (f - conditional_expectation(f, coarse)).l2_squared()
    e_fine = (f - conditional_expectation(f, fine)).l2_squared()
    assert e_fine <= e_coarse + 1e-12

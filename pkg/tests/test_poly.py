import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hofa_lab.errors import BudgetError, ValidationError
from hofa_lab.ff_core import FpVector, idx_decode
from hofa_lab.poly import (
    FunctionTable, Polynomial, additive_derivative, count_polynomials, degree, enumerate_polynomials,
    enumerate_tables, homogeneous_part, monomials, poly_eval, poly_lincomb, table_degree_le, table_of,
)


def P(p, n, *terms):
    return Polynomial(p, n, tuple(terms))


def test_eval_examples():
    assert poly_eval(P(5, 2, ((1, 2), 1)), FpVector((2, 3), 5)).value == 3
    c4 = Polynomial.constant(4, 5, 2)
    assert all(poly_eval(c4, idx_decode(i, 5, 2)).value == 4 for i in range(25))
    assert poly_eval(P(3, 2, ((2, 0), 1), ((0, 1), 1)), FpVector((2, 2), 3)).value == 0


def test_lincomb_examples():
    x1 = Polynomial.variable(0, 2, 1)
    assert poly_lincomb([1, 1], [x1, x1]).is_zero()
    a, b = Polynomial.variable(0, 5, 2), Polynomial.variable(1, 5, 2)
    assert poly_lincomb([2, 1], [a, b]) == P(5, 2, ((1, 0), 2), ((0, 1), 1))
    assert poly_lincomb([0, 0], [a, b]).is_zero()


def test_derivative_examples():
    assert additive_derivative(P(5, 1, ((2,), 1)), FpVector((1,), 5)) == P(5, 1, ((1,), 2), ((0,), 1))
    lin = P(5, 2, ((1, 0), 1), ((0, 1), 2))
    assert additive_derivative(lin, FpVector((1, 1), 5)) == Polynomial.constant(3, 5, 2)
    q = P(5, 2, ((2, 1), 3), ((1, 0), 1))
    assert additive_derivative(q, FpVector((0, 0), 5)).is_zero()


def test_degree_and_parts():
    Q = P(5, 2, ((2, 0), 1), ((0, 1), 1), ((0, 0), 3))
    assert homogeneous_part(Q, 2) == P(5, 2, ((2, 0), 1))
    assert homogeneous_part(Q, 1) == P(5, 2, ((0, 1), 1))
    assert homogeneous_part(Q, 0) == Polynomial.constant(3, 5, 2)
    assert sum(Q.homogeneous_parts().values(), Polynomial.zero(5, 2)) == Q
    assert degree(P(5, 2, ((1, 2), 1))) == 3
    assert homogeneous_part(Polynomial.variable(0, 5, 2), 2).is_zero()
    assert degree(Polynomial.zero(3, 2)) == -1


def test_reduction_of_exponents():
    assert P(3, 1, ((5,), 1)) == Polynomial.variable(0, 3, 1)
    assert P(2, 1, ((2,), 1)) == Polynomial.variable(0, 2, 1)
    assert P(5, 1, ((1,), 3), ((1,), 2)).is_zero()
    assert P(3, 1, ((0,), 7)) == Polynomial.constant(1, 3, 1)


def test_enumeration_counts_and_order():
    assert sum(1 for _ in enumerate_polynomials(2, 2, 1)) == 8
    assert count_polynomials(3, 2, 2) == 729
    polys = list(enumerate_polynomials(2, 3, 2))
    assert len(polys) == 128 and len(set(polys)) == 128
    assert len(monomials(2, 3, 2)) == 7
    coeffs, tables = enumerate_tables(3, 2, 1)
    for c, t, Q in zip(coeffs, tables, enumerate_polynomials(3, 2, 1)):
        assert np.array_equal(Q.table, t)
        assert np.array_equal(Q.coefficient_vector(1), c)
    with pytest.raises(BudgetError):
        next(enumerate_polynomials(5, 3, 4, budget=1000))


def test_table_degree_examples():
    x1x2 = table_of(P(2, 2, ((1, 1), 1)))
    assert not table_degree_le(x1x2, 1) and table_degree_le(x1x2, 2)
    assert table_degree_le(table_of(Polynomial.constant(2, 3, 2)), 0)
    sq = table_of(P(3, 1, ((2,), 1)))
    assert not table_degree_le(sq, 1) and table_degree_le(sq, 2)


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2)])
def test_table_degree_exact_for_all_polys(p, n):
    for Q in enumerate_polynomials(p, n, 2):
        d = Q.degree()
        if d >= 1:
            assert table_degree_le(table_of(Q), d)
            assert not table_degree_le(table_of(Q), d - 1)


@pytest.mark.parametrize("p,n", [(2, 2), (3, 1), (3, 2)])
def test_iterated_derivatives_vanish(p, n):
    dirs = [idx_decode(i, p, n) for i in range(p**n)]
    for Q in enumerate_polynomials(p, n, 1 if p == 3 and n == 2 else 2):
        d = max(Q.degree(), 0)
        for ys in itertools.product(dirs, repeat=d + 1):
            R = Q
            for y in ys:
                R = additive_derivative(R, y)
            assert R.is_zero()


def test_derivatives_commute_exhaustive():
    p, n = 3, 2
    dirs = [idx_decode(i, p, n) for i in range(p**n)]
    for Q in list(enumerate_polynomials(p, n, 2))[::37]:
        for y, z in itertools.product(dirs, repeat=2):
            assert additive_derivative(additive_derivative(Q, y), z) == additive_derivative(
                additive_derivative(Q, z), y
            )


poly_strategy = st.builds(
    lambda p, coeffs: (p, coeffs),
    st.sampled_from([2, 3, 5]),
    st.lists(st.integers(0, 4), min_size=6, max_size=6),
)


@given(poly_strategy, poly_strategy)
def test_table_is_ring_homomorphism(a, b):
    p = a[0]
    mons = monomials(p, 2, 2)
    A = Polynomial(p, 2, tuple(zip(mons, a[1])))
    B = Polynomial(p, 2, tuple(zip(mons, b[1])))
    assert np.array_equal((A + B).table, (A.table + B.table) % p)
    assert np.array_equal((A * B).table, (A.table * B.table) % p)
    assert A - A == Polynomial.zero(p, 2)


@given(poly_strategy)
def test_json_round_trip(a):
    p = a[0]
    A = Polynomial(p, 2, tuple(zip(monomials(p, 2, 2), a[1])))
    assert Polynomial.from_json(A.to_json(), p, 2) == A


def test_validation_errors():
    with pytest.raises(ValidationError):
        Polynomial.variable(0, 3, 1) + Polynomial.variable(0, 5, 1)
    with pytest.raises(ValidationError):
        FunctionTable(3, 2, [0] * 8)

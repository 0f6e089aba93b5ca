import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hofa_lab import ff_core
from hofa_lab.errors import UnsupportedError, ValidationError
from hofa_lab.linsys import LinearSystem, arithmetic_progression
from hofa_lab.multilinear import (
    b_coefficients, collapse_assignment, collapse_holds, expand_composition, multiset_count,
    multisets, p_lambda_is_zero, p_lambda_is_zero_bruteforce, polarize, polarize_by_monomials,
)
from hofa_lab.poly import Polynomial, enumerate_polynomials


def test_multiset_count_example():
    assert multiset_count((0, 1, 1), 5) == 3
    assert multiset_count((0, 1, 2), 7) == 6
    with pytest.raises(ValidationError):
        multiset_count((0, 0, 0), 3)


def test_polarize_examples():
    B = polarize(Polynomial(5, 1, (((3,), 1),)))
    assert B.coeff_map == {(0, 0, 0): 1}
    P = Polynomial(7, 2, (((1, 2), 6),))
    B = polarize(P)
    assert B.coeff_map == {(0, 1, 1): 2}
    assert B == polarize_by_monomials(P)
    y, z, w = (1, 2), (3, 4), (5, 6)
    expect = 2 * (y[0] * z[1] * w[1] + z[0] * y[1] * w[1] + w[0] * y[1] * z[1]) % 7
    assert B(y, z, w) == expect
    lin = Polynomial(5, 2, (((1, 0), 2), ((0, 1), 3)))
    assert polarize(lin).coeff_map == {(0,): 2, (1,): 3}


@pytest.mark.parametrize("p,n,dmax", [(5, 1, 3), (3, 2, 2), (5, 2, 2)])
def test_polarization_identity_exhaustive(p, n, dmax):
    pts = ff_core.points(p, n)
    for Q in enumerate_polynomials(p, n, dmax):
        for d, H in Q.homogeneous_parts().items():
            if d == 0:
                continue
            B = polarize(H)
            assert np.array_equal(B.evaluate_many([pts] * d), H.table)


@given(st.lists(st.integers(0, 4), min_size=6, max_size=6).filter(any), st.data())
def test_polarized_form_is_symmetric_and_linear(coeffs, data):
    p = 5
    mons = [m for m in itertools.combinations_with_replacement(range(3), 2)]
    terms = []
    for (i, j), c in zip(mons, coeffs):
        e = [0, 0, 0]
        e[i] += 1
        e[j] += 1
        terms.append((tuple(e), c))
    B = polarize(Polynomial(p, 3, tuple(terms)))
    vec = st.tuples(*[st.integers(0, 4)] * 3)
    x, y, z = data.draw(vec), data.draw(vec), data.draw(vec)
    c = data.draw(st.integers(0, 4))
    assert B(x, y) == B(y, x)
    xz = tuple((a + c * b) % p for a, b in zip(x, z))
    assert B(xz, y) == (B(x, y) + c * B(z, y)) % p


def test_expand_composition_example():
    p = 7
    got = [expand_composition(3, (1, j), p)[(0, 1, 1)] for j in range(5)]
    assert got == [3 * j * j % p for j in range(5)]
    assert not any(expand_composition(2, (0, 0), 5).values())


def test_expand_composition_matches_substitution():
    p, n = 5, 1
    P = Polynomial(p, n, (((3,), 2),))
    B = polarize(P)
    L = (2, 3)
    coeffs = expand_composition(3, L, p)
    for x1, x2 in itertools.product(range(p), repeat=2):
        xs = [(x1,), (x2,)]
        lhs = P.table[(L[0] * x1 + L[1] * x2) % p]
        rhs = sum(c * B(*[xs[j] for j in u]) for u, c in coeffs.items()) % p
        assert lhs == rhs


def test_b_coefficient_example():
    S = LinearSystem.from_lists([(1, j) for j in range(1, 5)], 7)
    Lam = [[0] * 4, [1] * 4]
    b = b_coefficients(Lam, S, (1, 3))
    assert b.values[(1, 3, (0, 1, 1))] == 6
    assert b_coefficients([[0] * 4, [0] * 4], S, (1, 3)).all_zero()


def test_telescope_examples():
    tel = LinearSystem.from_lists([(1, 0), (0, 1), (1, 1)], 5)
    Lam = [[1, 1, 4]]
    assert p_lambda_is_zero(Lam, tel, (1,))
    assert not p_lambda_is_zero(Lam, tel, (2,))
    assert b_coefficients(Lam, tel, (2,)).values[(0, 2, (0, 1))] == (-2) % 5
    x2 = Polynomial(5, 1, (((2,), 1),))
    x1 = Polynomial.variable(0, 5, 1)
    assert p_lambda_is_zero_bruteforce(Lam, tel, [x1], 1)
    assert not p_lambda_is_zero_bruteforce(Lam, tel, [x2], 1)


def test_nonhomogeneous_unsupported():
    T = LinearSystem.from_lists([(1, 0), (2, 0)], 5)
    with pytest.raises(UnsupportedError):
        p_lambda_is_zero([[1, 1]], T, (1,), homogeneous_polys=False)


def test_collapse_examples():
    p = 5
    assert collapse_assignment({(0, 1): 1}, 2, p) == ((1, 1), 1)
    assert collapse_assignment({(0, 0): 1, (1, 1): p - 1}, 2, p) == ((1, 0), 1)
    assert collapse_assignment({(0, 0): 0, (0, 1): 0}, 2, p) is None
    B = polarize(Polynomial(p, 2, (((1, 1), 1), ((2, 0), 3))))
    for coeffs in [{(0, 1): 1}, {(0, 0): 1, (1, 1): p - 1}, {(0, 1): 2, (1, 1): 3}]:
        a, alpha = collapse_assignment(coeffs, 2, p)
        assert alpha != 0
        assert collapse_holds(coeffs, B, a, alpha)


@given(st.dictionaries(st.sampled_from(multisets(3, 2)), st.integers(0, 6), min_size=1))
def test_collapse_found_whenever_nonzero(coeffs):
    p = 7
    res = collapse_assignment(coeffs, 3, p)
    if not any(c % p for c in coeffs.values()):
        assert res is None
        return
    a, alpha = res
    B = polarize(Polynomial(p, 2, (((1, 1), 1), ((0, 2), 2))))
    assert collapse_holds(coeffs, B, a, alpha)


@pytest.mark.parametrize("seed", range(10))
def test_zero_tests_agree_on_ap(seed):
    rng = np.random.default_rng(seed)
    S4 = arithmetic_progression(4, 5)
    P = Polynomial(5, 2, (((2, 0), 1), ((1, 1), 2)))
    Lam = rng.integers(0, 5, size=(1, 4))
    assert p_lambda_is_zero(Lam, S4, (2,)) == p_lambda_is_zero_bruteforce(Lam, S4, [P], 2)

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hofa_lab.errors import BudgetError, ValidationError
from hofa_lab.linsys import (
    LinearForm, LinearSystem, arithmetic_progression, canonicalize_homogeneous, complexity_report,
    cs_complexity, gf_rank, in_span, is_homogeneous_system, isomorphism_key, nullspace,
    systems_isomorphic, systems_up_to_isomorphism, tensor_power, true_complexity,
)


def S(forms, p=5):
    return LinearSystem.from_lists(forms, p)


def test_tensor_power_examples():
    assert tuple(tensor_power(LinearForm((1, 2), 5), 2)) == (1, 2, 2, 4)
    assert tuple(tensor_power(LinearForm((3, 4), 5), 1)) == (3, 4)
    assert not tensor_power(LinearForm((0, 0, 0), 5), 3).any()
    with pytest.raises(BudgetError):
        tensor_power(LinearForm((1,) * 8, 5), 8, budget=1000)


def test_rank_and_span_examples():
    assert gf_rank([(1, 0), (1, 1), (1, 2)], 5) == 2
    assert gf_rank([], 5) == 0
    assert in_span((1, 1), [(1, 0), (1, 2)], 5) == (3, 3)
    assert in_span((1, 0), [(0, 1)], 5) is None


def test_complexity_goldens():
    ap3, ap4 = arithmetic_progression(3, 5), arithmetic_progression(4, 5)
    xy = S([(1, 0), (0, 1)])
    assert true_complexity(ap3) == 1 and cs_complexity(ap3).s == 1
    assert true_complexity(ap4) == 2 and cs_complexity(ap4).s == 2
    assert true_complexity(xy) == 0 and cs_complexity(xy).s == 0
    rep = complexity_report(xy)
    assert rep.true_complexity == 0 and rep.true_complexity_positive == 1


def test_cs_witnesses_are_valid():
    S4 = arithmetic_progression(4, 5)
    res = cs_complexity(S4)
    M = S4.matrix
    assert len(res.witnesses) == S4.m
    for i, parts in enumerate(res.witnesses):
        assert len(parts) == res.s + 1
        assert sorted(j for part in parts for j in part) == [j for j in range(S4.m) if j != i]
        for part in parts:
            assert in_span(M[i], [M[j] for j in part], 5) is None


def test_cs_undefined_for_scalar_multiples():
    with pytest.raises(ValidationError):
        cs_complexity(S([(1, 0), (2, 0)]))


def test_homogeneity_examples():
    assert is_homogeneous_system(arithmetic_progression(3, 5)).coords == (1, 0)
    assert is_homogeneous_system(S([(1, 0), (2, 0)])) is None
    assert is_homogeneous_system(S([(1,)])).coords == (1,)
    ap = arithmetic_progression(3, 5)
    assert canonicalize_homogeneous(ap) == ap


def test_canonicalize_moves_witness_to_first_axis():
    T = S([(2, 1), (3, 1), (4, 1)])
    C = canonicalize_homogeneous(T)
    assert all(row[0] == 1 for row in C.matrix)
    assert systems_isomorphic(T, C) is not None


def test_isomorphism_examples():
    assert systems_isomorphic(S([(1, 0), (0, 1)]), S([(1, 0), (1, 1)])) is not None
    assert systems_isomorphic(S([(1, 0), (2, 0)]), S([(1, 0), (0, 1)])) is None
    ap = arithmetic_progression(4, 5)
    assert systems_isomorphic(ap, ap) == (0, 1, 2, 3)


def test_nullspace_is_kernel():
    A = np.array([[1, 2, 3], [0, 1, 1]])
    N = nullspace(A, 5)
    assert N.shape[0] == 1
    assert not ((A @ N.T) % 5).any()


@pytest.mark.parametrize("m_max", [3])
def test_isomorphism_invariance_of_complexities(m_max):
    systems = systems_up_to_isomorphism(3, 2, m_max, pairwise_independent=True)
    keys = {isomorphism_key(T) for T in systems}
    assert len(keys) == len(systems)
    for T in systems:
        perm = list(reversed(range(T.m)))
        T2 = T.subsystem(perm)
        assert systems_isomorphic(T, T2) is not None
        assert true_complexity(T) == true_complexity(T2)
        assert cs_complexity(T).s == cs_complexity(T2).s


def _pairwise_independent(forms):
    return all(gf_rank([u, v], 5) == 2 for u, v in itertools.combinations(forms, 2))


forms_strategy = st.lists(
    st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)).filter(any),
    min_size=2, max_size=5, unique=True,
).filter(_pairwise_independent)


@given(forms_strategy, st.integers(0, 4), st.integers(0, 4))
def test_isomorphic_under_change_of_variables(forms, a, b):
    T = S(forms)
    # an invertible change of variables x -> Ux keeps the relation space
    U = np.array([[1, a, 0], [0, 1, b], [0, 0, 1]])
    T2 = LinearSystem.from_lists((T.matrix @ U) % 5, 5)
    assert systems_isomorphic(T, T2) is not None
    assert true_complexity(T) == true_complexity(T2)


@given(forms_strategy)
def test_true_at_most_cs(forms):
    T = S(forms)
    assert true_complexity(T) <= cs_complexity(T).s


def test_json_round_trip():
    T = arithmetic_progression(4, 7)
    assert LinearSystem.from_json(T.to_json()) == T
    with pytest.raises(ValidationError):
        LinearSystem.from_json({"p": 4, "forms": [[1, 0]]})


@given(forms_strategy)
def test_cs_at_most_m_minus_two(forms):
    T = S(forms)
    if T.m >= 2:
        assert cs_complexity(T).s <= max(T.m - 2, 0)


@given(forms_strategy, st.randoms())
def test_tensor_rank_permutation_invariant(forms, rnd):
    from hofa_lab.linsys import tensor_rank

    T = S(forms)
    perm = list(range(T.m))
    rnd.shuffle(perm)
    for t in (1, 2, 3):
        assert tensor_rank(T, t) == tensor_rank(T.subsystem(perm), t)


def test_isomorphism_is_equivalence_on_corpus():
    from hofa_lab.linsys import all_systems

    corpus = list(all_systems(3, 2, 2, m_min=2))[:40]
    for A in corpus:
        assert systems_isomorphic(A, A) is not None
    for A, B in itertools.combinations(corpus, 2):
        assert (systems_isomorphic(A, B) is None) == (systems_isomorphic(B, A) is None)
    for A, B, C in itertools.combinations(corpus[:15], 3):
        if systems_isomorphic(A, B) is not None and systems_isomorphic(B, C) is not None:
            assert systems_isomorphic(A, C) is not None

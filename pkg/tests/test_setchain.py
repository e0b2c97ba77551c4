import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import matrix_powers_upper, rand_mass, rand_model, space
from imc import (
    Precise,
    SizeCapError,
    UpperTransitionOperator,
    Vacuous,
    ergodicity_coefficient,
    extreme_matrices,
    lower_power_apply,
    max_product_expectation,
    min_product_expectation,
    power_apply,
    product_scrambling_check,
    regularly_absorbing,
    strict_inclusion_demo,
)
from imc.reliability import embedded_operator
from imc.setchain import contaminated_identity, enumerate_products

EX4 = np.array([[0.15, 0.85], [0.85, 0.15]])


def test_vacuous_extremes_are_deterministic_matrices():
    M = extreme_matrices(UpperTransitionOperator(space(2), [Vacuous(2)] * 2))
    assert len(M) == 4
    for P in M:
        assert set(P.ravel()) <= {0.0, 1.0}


def test_contaminated_identity_extremes():
    eps = 0.2
    M = extreme_matrices(contaminated_identity(space(2), eps))
    assert len(M) == 4
    rows0 = {tuple(np.round(P[0], 12)) for P in M}
    rows1 = {tuple(np.round(P[1], 12)) for P in M}
    assert rows0 == {(1.0, 0.0), (0.8, 0.2)}
    assert rows1 == {(0.0, 1.0), (0.2, 0.8)}


def test_precise_chain():
    T = UpperTransitionOperator.from_matrix(space(2), EX4)
    M = extreme_matrices(T)
    assert len(M) == 1
    h = np.array([1.0, -2.0])
    np.testing.assert_allclose(max_product_expectation(M, h, 5), np.linalg.matrix_power(EX4, 5) @ h)


def test_counterexample_value():
    M = extreme_matrices(contaminated_identity(space(2), 0.3))
    assert max_product_expectation(M, np.array([1.0, 0.0]), 2, x=1) == pytest.approx(0.51)


def test_ergodicity_coefficient():
    assert ergodicity_coefficient(np.eye(2)) == 1.0
    assert ergodicity_coefficient(np.tile([0.2, 0.3, 0.5], (3, 1))) == 0.0
    assert ergodicity_coefficient(EX4) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        ergodicity_coefficient([[0.5, 0.6], [0.5, 0.5]])


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_tau_submultiplicative(seed, n):
    rng = np.random.default_rng(seed)
    A = np.array([rand_mass(rng, n, sparse=True) for _ in range(n)])
    B = np.array([rand_mass(rng, n, sparse=True) for _ in range(n)])
    assert ergodicity_coefficient(A @ B) <= ergodicity_coefficient(A) * ergodicity_coefficient(B) + 1e-12


def test_scrambling_verdicts():
    vac = product_scrambling_check(extreme_matrices(UpperTransitionOperator(space(3), [Vacuous(3)] * 3)), 4)
    assert vac.verdict == "not_scrambling"
    np.testing.assert_array_equal(vac.witness, np.eye(3))
    pos = product_scrambling_check(extreme_matrices(UpperTransitionOperator.from_matrix(space(2), EX4)), 3)
    assert pos.verdict == "scrambling" and pos.m == 1
    rel = product_scrambling_check(extreme_matrices(embedded_operator(3, 0.9, 1.0)), 4)
    assert not rel.scrambling
    np.testing.assert_array_equal(rel.witness, np.eye(4))


def test_scrambling_reached_later():
    # a -> b -> c -> c: only the cube is scrambling
    P = np.array([[0, 1.0, 0], [0, 0, 1.0], [0, 0, 1.0]])
    v = product_scrambling_check(extreme_matrices(UpperTransitionOperator.from_matrix(space(3), P)), 4)
    assert v.verdict == "scrambling" and v.m == 2


def test_scrambling_inconclusive_and_caps():
    P = np.array([[0, 1.0, 0], [0, 0, 1.0], [0, 0, 1.0]])
    M = extreme_matrices(UpperTransitionOperator.from_matrix(space(3), P))
    assert product_scrambling_check(M, 1).verdict == "inconclusive"
    big = extreme_matrices(UpperTransitionOperator(space(3), [Vacuous(3)] * 3))
    with pytest.raises(SizeCapError):
        extreme_matrices(UpperTransitionOperator(space(3), [Vacuous(3)] * 3), cap=10)
    with pytest.raises(SizeCapError):
        max_product_expectation(big, np.ones(3), 5, cap=20)
    with pytest.raises(SizeCapError):
        list(enumerate_products(big, 5, cap=1000))


def test_strict_inclusion():
    for eps in (0.01, 0.3, 0.5, 0.9):
        assert strict_inclusion_demo(eps)
    assert not strict_inclusion_demo(0.0)
    assert not strict_inclusion_demo(1.0)


def random_operator(rng, n):
    fams = ["interval", "belief", "contamination", "precise"]
    return UpperTransitionOperator(space(n), [rand_model(rng, n, fams[rng.integers(4)]) for _ in range(n)])


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 5))
def test_fold_matches_operator_powers(seed, n, k):
    rng = np.random.default_rng(seed)
    T = random_operator(rng, n)
    M = extreme_matrices(T)
    h = rng.normal(size=n)
    np.testing.assert_allclose(max_product_expectation(M, h, k), power_apply(T, h, k), atol=1e-9)
    np.testing.assert_allclose(min_product_expectation(M, h, k), lower_power_apply(T, h, k), atol=1e-9)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_fold_matches_product_enumeration(seed, k):
    rng = np.random.default_rng(seed)
    T = random_operator(rng, 2)
    M = extreme_matrices(T)
    h = rng.normal(size=2)
    best = matrix_powers_upper(M.matrices, h, k)
    np.testing.assert_allclose(max_product_expectation(M, h, k), best, atol=1e-12)
    for P in enumerate_products(M, k):
        assert np.all(P @ h <= power_apply(T, h, k) + 1e-9)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_scrambling_implies_regularly_absorbing(seed, n):
    rng = np.random.default_rng(seed)
    T = random_operator(rng, n)
    v = product_scrambling_check(extreme_matrices(T), 4)
    if v.scrambling:
        assert regularly_absorbing(T)


def test_matrix_set_serialises():
    d = extreme_matrices(contaminated_identity(space(2), 0.1)).to_dict()
    assert d["count"] == 4 and d["states"] == ["a", "b"]

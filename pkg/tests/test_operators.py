import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import rand_operator, space
from imc import (
    Contamination,
    DimensionError,
    Precise,
    TimeIndexedOperators,
    UpperTransitionOperator,
    Vacuous,
    apply,
    lower_apply,
    lower_power_apply,
    matrix_of,
    power_apply,
    tree_step,
)
from imc.reliability import embedded_operator
from imc.setchain import contaminated_identity

TOL = 1e-9
EX4 = np.array([[0.15, 0.85], [0.85, 0.15]])


def test_vacuous_rows_give_max_and_min():
    T = UpperTransitionOperator(space(3), [Vacuous(3)] * 3)
    h = np.array([0.2, -1.0, 3.0])
    np.testing.assert_allclose(apply(T, h), [3.0] * 3)
    np.testing.assert_allclose(lower_apply(T, h), [-1.0] * 3)


def test_precise_rows_are_linear():
    M = np.array([[0.2, 0.8, 0.0], [0.1, 0.1, 0.8], [0.5, 0.25, 0.25]])
    T = UpperTransitionOperator.from_matrix(space(3), M)
    h = np.array([1.0, 2.0, -3.0])
    np.testing.assert_allclose(apply(T, h), M @ h)
    np.testing.assert_allclose(lower_apply(T, h), M @ h)
    np.testing.assert_allclose(power_apply(T, h, 4), np.linalg.matrix_power(M, 4) @ h)
    np.testing.assert_allclose(matrix_of(T), M)


def test_contaminated_identity_values():
    T = contaminated_identity(space(2), 0.3)
    h = np.array([1.0, 0.0])
    assert apply(T, h)[1] == pytest.approx(0.3)
    assert power_apply(T, h, 2)[1] == pytest.approx(0.51)
    np.testing.assert_array_equal(power_apply(T, h, 0), h)


def test_reliability_lower_row():
    rl, ru = 0.9, 0.95
    T = embedded_operator(3, rl, ru)
    h = np.array([0, 0, 0, 1.0])
    low = lower_apply(T, h)
    assert low[2] == pytest.approx(1 - ru)
    assert apply(T, h)[2] == pytest.approx(1 - rl)
    assert low[3] == 1.0 and low[0] == 0.0


def test_matrix_of_example_rows():
    T = UpperTransitionOperator.from_matrix(space(2), EX4)
    np.testing.assert_allclose(matrix_of(T), EX4)
    np.testing.assert_allclose(matrix_of(UpperTransitionOperator.from_matrix(space(2), np.eye(2))), np.eye(2))
    with pytest.raises(TypeError):
        matrix_of(contaminated_identity(space(2), 0.1))


def test_tree_step_reduces_to_apply():
    rng = np.random.default_rng(1)
    T = rand_operator(rng, 3, "interval")
    h = rng.normal(size=3)
    f = np.broadcast_to(h, (3, 3)).copy()
    np.testing.assert_allclose(tree_step(T, f), apply(T, h))
    g = rng.normal(size=3)
    f = np.broadcast_to(g[:, None], (3, 3)).copy()
    np.testing.assert_allclose(tree_step(T, f), g)


def test_tree_step_uniform_averages():
    # leaves of a depth-3 tree on {a, b}, uniform rows: each step averages sibling pairs
    leaves = np.array([4, 3, 2, 3, 2.5, 1.5, 0.5, 3]).reshape(2, 2, 2)
    T = UpperTransitionOperator(space(2), [Precise([0.5, 0.5])] * 2)
    step = tree_step(T, leaves)
    np.testing.assert_allclose(step, [[3.5, 2.5], [2.0, 1.75]])
    np.testing.assert_allclose(tree_step(T, step), [3.0, 1.875])


def test_dimension_errors():
    T = UpperTransitionOperator(space(2), [Vacuous(2)] * 2)
    with pytest.raises(DimensionError):
        apply(T, [1.0, 2.0, 3.0])
    with pytest.raises((DimensionError, ValueError)):
        UpperTransitionOperator(space(2), [Vacuous(3), Vacuous(3)])
    with pytest.raises((DimensionError, ValueError)):
        UpperTransitionOperator(space(2), [Vacuous(2)])


def test_time_indexed():
    A = UpperTransitionOperator(space(2), [Vacuous(2)] * 2)
    B = contaminated_identity(space(2), 0.2)
    ops = TimeIndexedOperators([A, A])
    assert ops.stationary and len(ops) == 2 and ops[1] is A
    assert not TimeIndexedOperators([A, B]).stationary


# --- T1-T7 ---------------------------------------------------------------


def _operator_axioms(T, rng):
    n = T.size
    h, g = rng.normal(size=n) * 5, rng.normal(size=n) * 5
    lam, mu = rng.random() * 4, rng.normal() * 3
    Th = apply(T, h)
    assert np.all(Th >= h.min() - TOL) and np.all(Th <= h.max() + TOL)  # T1
    assert np.all(apply(T, h + g) <= Th + apply(T, g) + TOL)  # T2
    np.testing.assert_allclose(apply(T, lam * h), lam * Th, atol=TOL * (1 + lam))  # T3
    np.testing.assert_allclose(apply(T, h + mu), Th + mu, atol=TOL)  # T4
    assert np.all(apply(T, h - np.abs(g)) <= Th + TOL)  # T5
    assert np.all(np.abs(apply(T, g) - Th) <= np.abs(g - h).max() + TOL)  # T6
    assert np.all(lower_apply(T, h) <= Th + TOL)  # T7
    np.testing.assert_allclose(lower_apply(T, h), -apply(T, -h), atol=TOL)


def _family_test(family):
    @settings(max_examples=500)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 4))
    def run(seed, n):
        rng = np.random.default_rng(seed)
        _operator_axioms(rand_operator(rng, n, family), rng)

    return run


test_T_axioms_precise = _family_test("precise")
test_T_axioms_vacuous = _family_test("vacuous")
test_T_axioms_contamination = _family_test("contamination")
test_T_axioms_belief = _family_test("belief")
test_T_axioms_interval = _family_test("interval")
test_T_axioms_polytope = _family_test("polytope")
test_T_axioms_mixed = _family_test(None)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(0, 6))
def test_powers_compose(seed, n, k):
    rng = np.random.default_rng(seed)
    T = rand_operator(rng, n)
    h = rng.normal(size=n)
    g = h
    for _ in range(k):
        g = apply(T, g)
    np.testing.assert_allclose(power_apply(T, h, k), g, atol=1e-12)
    assert np.all(lower_power_apply(T, h, k) <= power_apply(T, h, k) + TOL)

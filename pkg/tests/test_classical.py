import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_local_bound
from stcorr import rand
from stcorr.classical import (BiasedOperationError, ClassicalOperation, ClassicalResource,
                              bell_factorization, biseparable_bound, classical_correlations,
                              classical_is_unbiased, local_bound)
from stcorr.correlations import (InequalityFunctional, chsh, evaluate, mermin,
                                 svetlichny)


@pytest.mark.parametrize("f,want", [(chsh, 2), (mermin, 2), (svetlichny, 4)])
def test_local_bounds(f, want):
    fn = f()
    got = local_bound(fn)
    assert got == want and float(got).is_integer()
    assert got == brute_local_bound(fn.coefficients, fn.n_parties, fn.n_settings, fn.absolute)


@pytest.mark.parametrize("f,want", [(svetlichny, 4), (mermin, 4)])
def test_biseparable_bounds(f, want):
    assert biseparable_bound(f()) == want


def test_biseparable_bound_not_below_local():
    for f in (mermin(), svetlichny()):
        assert biseparable_bound(f) >= local_bound(f)


def test_bound_input_checks():
    with pytest.raises(ValueError):
        biseparable_bound(chsh())
    big = InequalityFunctional("big", {(0,) * 11: 1, (1,) * 11: 1}, 2)
    with pytest.raises(ValueError):
        local_bound(big)


@settings(max_examples=25, deadline=None)
@given(coeffs=st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_local_bound_matches_brute_force(coeffs):
    terms = dict(zip([(0, 0), (0, 1), (1, 0), (1, 1)], coeffs))
    if not any(terms.values()):
        return
    f = InequalityFunctional("f", terms, 0)
    assert local_bound(f) == brute_local_bound(terms, 2, 2)


def test_bell_factorization_roundtrip():
    a = rand.unbiased_classical_preparation(seed=1)
    r = rand.classical_resource(2, 2, seed=2)
    b = rand.classical_measurement(seed=3)
    model = bell_factorization(a, r, b)
    direct = classical_correlations(a, r, b).values
    assert np.max(np.abs(model.correlations() - direct)) <= 1e-14
    # the model is local: shared randomness is normalised, responses are conditional
    assert np.isclose(model.shared.sum(), 1)
    np.testing.assert_allclose(model.response_a.sum(axis=0), 1)


def test_biased_operation_refused():
    t = np.zeros((2, 2, 2, 1))
    t[0, 0, :, 0] = 1  # always outcome +1, always lambda = 0
    a = ClassicalOperation(t)
    assert not classical_is_unbiased(a)
    with pytest.raises(BiasedOperationError):
        bell_factorization(a, rand.classical_resource(2, 2, seed=0),
                           rand.classical_measurement(seed=0))


def test_biased_classical_operation_exceeds_chsh():
    # lambda copies x, so the second party learns x and reaches the algebraic maximum
    a = np.zeros((2, 2, 2, 1))
    a[0, 0, 0, 0] = 1
    a[0, 1, 1, 0] = 1
    b = np.zeros((2, 1, 2, 2))
    b[0, 0, 0, 0] = b[1, 0, 1, 0] = 1   # lambda = 0: b = +1 for y = 0, -1 for y = 1
    b[0, 0, :, 1] = 1                   # lambda = 1: b = +1
    op_a = ClassicalOperation(a)
    assert not classical_is_unbiased(op_a)
    table = classical_correlations(op_a, ClassicalResource(np.eye(2)), ClassicalOperation(b))
    assert evaluate(chsh(), table) == 4


def test_chain_shape_checks():
    a = rand.unbiased_classical_preparation(d_out=3, seed=0)
    with pytest.raises(ValueError):
        classical_correlations(a, rand.classical_resource(2, 2, seed=0),
                               rand.classical_measurement(seed=0))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(1, 4))
def test_unbiased_classical_chsh_is_local(seed, d):
    rng = np.random.default_rng(seed)
    a = rand.unbiased_classical_preparation(d_out=d, seed=rng)
    r = rand.classical_resource(d, d, seed=rng)
    b = rand.classical_measurement(d_in=d, seed=rng)
    assert classical_is_unbiased(a)
    table = classical_correlations(a, r, b)
    assert evaluate(chsh(), table) <= 2 + 1e-9
    assert np.max(np.abs(bell_factorization(a, r, b).correlations() - table.values)) <= 1e-14

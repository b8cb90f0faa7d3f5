import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import choi_by_units, xy_projector
from stcorr import rand
from stcorr.operations import (POVM, BlochSetting, Instrument,
                               InvalidOperationError, choi_from_kraus, choi_from_map,
                               is_unbiased, povm_to_instrument, preparation_from_states,
                               preparation_instrument, projective_instrument,
                               reduce_preparation, spatial_povm_of_preparation)
from stcorr.tensor import Operator, inp, out

A_I, A_O = inp("A"), out("A")


def test_identity_choi_convention():
    cp = choi_from_kraus([np.eye(2)], A_I, A_O)
    want = np.zeros((4, 4))
    for j in range(2):
        for l in range(2):
            want[2 * j + j, 2 * l + l] = 1
    np.testing.assert_array_equal(cp.choi.matrix, want)


@pytest.mark.parametrize("d_in,d_out,n", [(2, 2, 1), (2, 3, 2), (3, 2, 4)])
def test_choi_from_kraus_matches_unit_construction(d_in, d_out, n):
    ks = rand.kraus_channel(d_in, d_out, n, seed=d_in + 10 * d_out)
    cp = choi_from_kraus(ks, inp("A", d_in), out("A", d_out))
    np.testing.assert_allclose(cp.choi.matrix, choi_by_units(ks, d_in), atol=1e-12)
    via_map = choi_from_map(lambda r: sum(k @ r @ k.conj().T for k in ks),
                            inp("A", d_in), out("A", d_out))
    np.testing.assert_allclose(via_map.choi.matrix, cp.choi.matrix, atol=1e-12)
    assert cp.is_cp() and cp.is_trace_preserving()


def test_apply_inverts_choi():
    ks = rand.kraus_channel(2, 3, 2, seed=4)
    cp = choi_from_kraus(ks, inp("A", 2), out("A", 3))
    rho = rand.density_matrix(2, seed=5)
    np.testing.assert_allclose(cp.apply(rho), sum(k @ rho @ k.conj().T for k in ks),
                               atol=1e-12)


def test_transpose_map_is_positive_but_not_cp():
    cp = choi_from_map(lambda r: r.T, A_I, A_O)
    assert cp.is_trace_preserving()
    assert not cp.is_cp()


@pytest.mark.parametrize("phi", [0.0, np.pi / 4, 1.0])
def test_projective_instrument_is_valid_and_unbiased(phi):
    ins = projective_instrument(BlochSetting(phi))
    assert len(ins) == 2 and ins.outcomes == (1, -1)
    assert is_unbiased(ins)
    rho = rand.density_matrix(2, seed=2)
    p = xy_projector(phi, 1)
    np.testing.assert_allclose(ins.branches[0].apply(rho), p @ rho @ p, atol=1e-12)


def test_bloch_setting_directions():
    assert np.allclose(BlochSetting(0.3).direction, BlochSetting(0.3, np.pi / 2).direction)
    np.testing.assert_allclose(BlochSetting(0.0, 0.0).observable(), np.diag([1, -1]))
    assert BlochSetting(0.0).plane == "xy"
    with pytest.raises(ValueError):
        BlochSetting(np.nan)


def test_instrument_rejects_non_tp():
    half = choi_from_kraus([np.eye(2) / 2], A_I, A_O)
    with pytest.raises(InvalidOperationError, match="trace-preserving"):
        Instrument([half])


def test_instrument_rejects_non_cp():
    t = choi_from_map(lambda r: r.T, A_I, A_O)
    with pytest.raises(InvalidOperationError, match="completely positive"):
        Instrument([t])


def test_povm_rejects_bad_elements():
    lab = inp("A")
    with pytest.raises(InvalidOperationError):
        POVM([Operator(np.eye(2) * 0.6, [lab]), Operator(np.eye(2) * 0.6, [lab])])
    with pytest.raises(InvalidOperationError):
        POVM([Operator(np.diag([1.5, 1]), [lab]), Operator(np.diag([-0.5, 0]), [lab])])


def test_povm_to_instrument_dimension_mismatch():
    e = rand.povm(3, seed=1)
    with pytest.raises(InvalidOperationError):
        povm_to_instrument(e, 2)


def test_biased_instrument_detected():
    # discard the input and always prepare |0>
    keep0 = [np.outer([1, 0], v) for v in np.eye(2)]
    ins = Instrument([choi_from_kraus(keep0, A_I, A_O)])
    assert not is_unbiased(ins)


def test_preparation_reduction_roundtrip():
    states = [rand.density_matrix(2, seed=s) for s in (1, 2)]
    prep = preparation_from_states([0.3, 0.7], states)
    got = reduce_preparation(prep)
    for (p, s), want_p, want_s in zip(got, [0.3, 0.7], states):
        assert np.isclose(p, want_p)
        np.testing.assert_allclose(s, want_s, atol=1e-12)


def test_preparation_instrument_of_unbiased_instrument():
    ins = rand.unbiased_instrument(seed=3)
    prep = preparation_instrument(ins)
    assert prep.input_label.dimension == 1
    total = sum(b.choi.matrix for b in prep.branches)
    np.testing.assert_allclose(total, np.eye(2) / 2, atol=1e-12)
    povm = spatial_povm_of_preparation(prep)
    np.testing.assert_allclose(sum(e.matrix for e in povm.elements), np.eye(2), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(2, 3), n=st.integers(1, 4))
def test_random_unbiased_instruments(seed, d, n):
    ins = rand.unbiased_instrument(d=d, n_outcomes=n, seed=seed)
    assert is_unbiased(ins)
    assert all(b.is_cp() for b in ins.branches)
    assert ins.total().is_trace_preserving()


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(1, 3), d_out=st.sampled_from([1, 2, 3]),
       n=st.integers(1, 4))
def test_povm_to_instrument_property(seed, d, d_out, n):
    e = rand.povm(d * d_out, n, seed=seed)
    ins = povm_to_instrument(e, d_out)
    assert ins.input_label.dimension == d and ins.output_label.dimension == d_out
    # the unnormalised-trace relation between the two descriptions
    for el, b in zip(e.elements, ins.branches):
        np.testing.assert_allclose(b.choi.matrix * d_out, el.matrix, atol=1e-12)

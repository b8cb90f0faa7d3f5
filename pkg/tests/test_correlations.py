import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import (ghz_family_ket, sequential_table, spatial_table,
                     svetlichny_from_table, xy_projector)
from stcorr import rand
from stcorr.correlations import (InequalityFunctional, NumericalError, Party,
                                 ProbabilityTable, Scenario, born_rule, chsh, correlators,
                                 evaluate, expectation, ghz_paradox_check, mermin,
                                 no_signalling_distance, preset, probability_table,
                                 svetlichny)
from stcorr.operations import (BlochSetting, Instrument, choi_from_kraus,
                               measurement_instrument, projective_instrument, projective_povm)
from stcorr.optimize import SettingsVector, reference_settings, ghz_template
from stcorr.processes import ProcessMatrix, Structure, ghz_process, identity_process
from stcorr.tensor import LayoutError, Operator, inp, out

Z_SETTING = BlochSetting(0.0, 0.0)


def z_measurement(party="B"):
    return measurement_instrument(projective_povm(Z_SETTING, inp(party)), party=party)


def test_identity_process_perfect_correlation():
    s = Scenario(identity_process(), [Party("A", [projective_instrument(Z_SETTING)]),
                                      Party("B", [z_measurement()])])
    p = born_rule(s, (0, 0))
    np.testing.assert_allclose(p, [[0.5, 0], [0, 0.5]], atol=1e-15)


def kraus_instrument(seed, party="A"):
    """Random unbiased instrument together with its Kraus description."""
    rng = np.random.default_rng(seed)
    u = rand.unitary(4, rng)
    # two-outcome instrument from a random isometry 2 -> 2 x 2 (outcome x output)
    v = u[:, :2]
    kraus = [[v[2 * a:2 * a + 2]] for a in range(2)]
    branches = [choi_from_kraus(k, inp(party), out(party)) for k in kraus]
    return Instrument(branches), kraus


@pytest.mark.parametrize("seed", range(5))
def test_born_rule_matches_sequential_oracle(seed):
    ins0, k0 = kraus_instrument(seed)
    ins1, k1 = kraus_instrument(seed + 100)
    povms = [rand.povm(2, 2, seed=seed + s, label=inp("B")) for s in (200, 300)]
    s = Scenario(identity_process(), [
        Party("A", [ins0, ins1]),
        Party("B", [measurement_instrument(p, party="B") for p in povms])])
    table = probability_table(s)
    want = sequential_table([k0, k1], [[e.matrix for e in p.elements] for p in povms],
                            np.eye(2) / 2)
    np.testing.assert_allclose(table.values, want, atol=1e-12)


@pytest.mark.parametrize("kappa", [0.0, 0.3, 1.0])
@pytest.mark.parametrize("seed", range(3))
def test_temporal_table_equals_spatial_table(kappa, seed):
    rng = np.random.default_rng(seed)
    preps = [rand.unbiased_preparation("A", seed=rng) for _ in range(2)]
    meas = {p: [rand.measurement(p, seed=rng) for _ in range(2)] for p in "BC"}
    s = Scenario(ghz_process(kappa), [Party("A", preps), Party("B", meas["B"]),
                                      Party("C", meas["C"])])
    temporal = probability_table(s).values
    # spatial POVM of a preparation: twice the transpose of the emitted (subnormalised) state
    emitted = [[b.choi.matrix.T for b in ins.branches] for ins in preps]
    povms = [[[2 * st.T for st in x] for x in emitted]]
    povms += [[[b.choi.matrix for b in ins.branches] for ins in meas[p]] for p in "BC"]
    spatial = spatial_table(ghz_family_ket(kappa), povms)
    np.testing.assert_allclose(temporal, spatial, atol=1e-10)


def test_svetlichny_at_reference_angles():
    table = probability_table(ghz_template(1.0)(reference_settings()))
    assert abs(evaluate(svetlichny(), table) - 4 * np.sqrt(2)) < 1e-9
    assert abs(svetlichny_from_table(table.values) - 4 * np.sqrt(2)) < 1e-9


def mermin_table():
    return probability_table(ghz_template(1.0)(SettingsVector([0, np.pi / 2] * 3)))


def test_ghz_paradox_and_mermin():
    table = mermin_table()
    report = ghz_paradox_check(table)
    assert report.passed, report.expectations
    assert abs(evaluate(mermin(), table) - 4) < 1e-9


def test_mermin_against_spatial_oracle():
    povms = [[[xy_projector(phi, a) for a in (1, -1)] for phi in (0, np.pi / 2)]] * 3
    spatial = spatial_table(ghz_family_ket(1.0), povms)
    np.testing.assert_allclose(mermin_table().values, spatial, atol=1e-12)


def test_correlators_vectorised_agree():
    table = mermin_table()
    corr = correlators(table)
    for xs in table.settings():
        assert np.isclose(corr[xs], expectation(table, xs))


def test_presets_and_custom_functional():
    assert preset("CHSH") == chsh()
    with pytest.raises(KeyError):
        preset("nope")
    f = InequalityFunctional("zz", {(0, 0): 1}, 1)
    table = probability_table(Scenario(identity_process(), [
        Party("A", [projective_instrument(Z_SETTING)]), Party("B", [z_measurement()])]))
    assert np.isclose(evaluate(f, table), 1.0)
    with pytest.raises(KeyError):
        evaluate(chsh(), table)
    with pytest.raises(ValueError):
        evaluate(mermin(), table)


def test_layout_mismatch_rejected():
    with pytest.raises(LayoutError):
        Scenario(identity_process(), [Party("A", [projective_instrument(Z_SETTING)])])
    with pytest.raises(LayoutError):
        Scenario(identity_process(), [Party("A", [projective_instrument(Z_SETTING)]),
                                      Party("B", [z_measurement("C")])])


def test_negative_probability_raises():
    bogus = ProcessMatrix(Operator(np.diag([-0.5, 1.5]), [inp("B")]), Structure.SPATIAL_STATE)
    with pytest.raises(NumericalError):
        probability_table(Scenario(bogus, [Party("B", [z_measurement()])]))


def test_probability_table_validation():
    with pytest.raises(NumericalError):
        ProbabilityTable(("A",), ((1, -1),), np.array([[0.7, 0.7]]))
    with pytest.raises(ValueError):
        ProbabilityTable(("A",), ((1, -1),), np.array([0.5, 0.5]))


def test_biased_preparation_signals():
    # A ignores its input and prepares |0> (setting 0) or |+> (setting 1)
    def prepare(vec):
        kraus = [np.outer(vec, e) for e in np.eye(2)]
        b = choi_from_kraus(kraus, inp("A"), out("A"))
        zero = choi_from_kraus([np.zeros((2, 2))], inp("A"), out("A"))
        return Instrument([b, zero])

    s = Scenario(identity_process(), [
        Party("A", [prepare(np.array([1, 0])), prepare(np.array([1, 1]) / np.sqrt(2))]),
        Party("B", [z_measurement()])])
    table = probability_table(s)
    assert np.isclose(no_signalling_distance(table, "A", ["B"]), 0.5)
    assert no_signalling_distance(table, "B", ["A"]) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), kappa=st.floats(0, 1))
def test_unbiased_operations_do_not_signal(seed, kappa):
    rng = np.random.default_rng(seed)
    s = Scenario(ghz_process(kappa), [
        Party("A", [rand.unbiased_preparation("A", seed=rng) for _ in range(2)]),
        Party("B", [rand.measurement("B", seed=rng) for _ in range(2)]),
        Party("C", [rand.measurement("C", seed=rng) for _ in range(2)])])
    table = probability_table(s)
    for src in "ABC":
        rest = [p for p in "ABC" if p != src]
        for k in (1, 2):
            for tgt in itertools.combinations(rest, k):
                assert no_signalling_distance(table, src, tgt) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(phis=st.lists(st.floats(0, 2 * np.pi), min_size=6, max_size=6))
def test_svetlichny_never_exceeds_quantum_maximum(phis):
    table = probability_table(ghz_template(1.0)(SettingsVector(phis)))
    assert evaluate(svetlichny(), table) <= 4 * np.sqrt(2) + 1e-9
    assert np.allclose(table.values.sum(axis=(3, 4, 5)), 1)

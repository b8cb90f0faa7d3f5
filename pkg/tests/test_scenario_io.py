import numpy as np
import pytest

from stcorr.correlations import evaluate, probability_table
from stcorr.processes import Structure
from stcorr.scenario_io import (ScenarioParseError, ScenarioValidationError, bundled,
                                bundled_names, parse_scenario, serialize_scenario)

NON_CPTP = """\
name: leaky
process:
  builder: channel
  kraus:
    - [[1, 0], [0, 1]]
    - [[0, 1], [0, 0]]
parties:
  - {name: A, role: instrument, settings: [{phi: 0}]}
  - {name: B, role: measurement, settings: [{phi: 0}]}
"""


def test_bundled_fixtures_present():
    assert {"identity_chsh", "ghz_svetlichny", "ghz_mermin"} <= set(bundled_names())


@pytest.mark.parametrize("name", ["identity_chsh", "ghz_svetlichny", "ghz_mermin"])
def test_fixture_roundtrip(name):
    sf = parse_scenario(bundled(name))
    again = parse_scenario(serialize_scenario(sf))
    assert again == sf
    assert probability_table(again.scenario) == probability_table(sf.scenario)


@pytest.mark.parametrize("name,value", [("identity_chsh", 2 * np.sqrt(2)),
                                        ("ghz_svetlichny", 4 * np.sqrt(2)),
                                        ("ghz_mermin", 4.0)])
def test_fixture_values(name, value):
    sf = parse_scenario(bundled(name))
    assert abs(evaluate(sf.inequality, probability_table(sf.scenario)) - value) < 1e-9


def test_ghz_fixture_structure():
    sf = parse_scenario(bundled("ghz_svetlichny"))
    assert sf.scenario.process.structure is Structure.COMB
    assert sf.roles == (("A", "preparation"), ("B", "measurement"), ("C", "measurement"))


def test_non_cptp_channel_names_trace_condition():
    with pytest.raises(ScenarioValidationError) as err:
        parse_scenario(NON_CPTP)
    assert "tr_{B_I} T = 1^{A_O}" in str(err.value)
    assert err.value.location.startswith("line 4")


def test_explicit_matrix_process_and_povm():
    text = """\
process:
  builder: matrix
  layout: [{party: A, port: none}, {party: B, port: none}]
  structure: spatial_state
  entries:
    - [0.5, 0, 0, 0.5]
    - [0, 0, 0, 0]
    - [0, 0, 0, 0]
    - ["(0.5, 0)", 0, 0, [0.5, 0.0]]
parties:
  - name: A
    role: measurement
    settings:
      - povm: [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]
  - name: B
    role: measurement
    settings:
      - povm: [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]
inequality:
  name: zz
  bound: 1
  terms: [{settings: [0, 0], coeff: 1}]
"""
    with pytest.raises(ScenarioValidationError, match="do not match"):
        # measurements act on A_I/B_I, the state lives on port-less spaces
        parse_scenario(text)
    text = text.replace("port: none", "port: input")
    sf = parse_scenario(text)
    assert np.isclose(evaluate(sf.inequality, probability_table(sf.scenario)), 1)
    assert parse_scenario(serialize_scenario(sf)) == sf


def test_visibility_applied():
    text = bundled("ghz_svetlichny") + "visibility: 0.5\n"
    sf = parse_scenario(text)
    v = evaluate(sf.inequality, probability_table(sf.effective_scenario()))
    assert abs(v - 2 * np.sqrt(2)) < 1e-9


@pytest.mark.parametrize("text,kind,where", [
    ("process: [1, 2\n", ScenarioParseError, "line 2"),
    ("process: {builder: identity}\n", ScenarioParseError, "missing field 'parties'"),
    ("process: {builder: warp}\nparties: []\n", ScenarioParseError, "process.builder"),
    ("process: {builder: ghz_kappa, kappa: 2}\nparties: []\n", ScenarioValidationError,
     "process.kappa"),
    ("process: {builder: identity}\nparties:\n  - {name: A, settings: [{phi: pi}]}\n",
     ScenarioParseError, "parties[0].settings[0].phi"),
    ("process: {builder: identity}\nparties:\n  - {name: A, role: boss, settings: []}\n",
     ScenarioParseError, "parties[0].role"),
    ("- 1\n- 2\n", ScenarioParseError, "mapping"),
])
def test_diagnostics(text, kind, where):
    with pytest.raises(kind) as err:
        parse_scenario(text)
    assert where in str(err.value)


def test_non_psd_matrix_process_rejected():
    text = """\
process:
  builder: matrix
  layout: [{party: A, port: input}]
  structure: spatial_state
  entries: [[1.5, 0], [0, -0.5]]
parties:
  - {name: A, role: measurement, settings: [{phi: 0}]}
"""
    with pytest.raises(ScenarioValidationError, match="positive semidefinite"):
        parse_scenario(text)


def test_invalid_instrument_rejected():
    text = """\
process: {builder: identity}
parties:
  - name: A
    settings:
      - instrument: [[[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]]]
        d_in: 2
        d_out: 2
  - {name: B, role: measurement, settings: [{phi: 0}]}
"""
    with pytest.raises(ScenarioValidationError, match="trace-preserving"):
        parse_scenario(text)

"""
No-bias implies no-signalling
=============================

With unbiased operations the marginals of later parties do not depend on
earlier settings. A biased preparation (output chosen by the setting)
breaks this immediately.
"""

import numpy as np

from stcorr import rand
from stcorr.correlations import Party, Scenario, no_signalling_distance, probability_table
from stcorr.operations import (BlochSetting, Instrument, choi_from_kraus, is_unbiased,
                               povm_to_instrument, projective_povm)
from stcorr.processes import identity_process
from stcorr.tensor import inp, out

rng = np.random.default_rng(3)
a = Party("A", [rand.unbiased_instrument("A", seed=rng) for _ in range(2)])
b = Party("B", [rand.measurement("B", seed=rng) for _ in range(2)])
table = probability_table(Scenario(identity_process(), [a, b]))
print("unbiased A -> B distance:", no_signalling_distance(table, "A", ["B"]))


def prepare(vec):
    """Discard the input and emit |vec>; the second outcome never fires."""
    keep = choi_from_kraus([np.outer(vec, e) for e in np.eye(2)], inp("A"), out("A"))
    never = choi_from_kraus([np.zeros((2, 2))], inp("A"), out("A"))
    return Instrument([keep, never])


biased = Party("A", [prepare(np.array([1, 0])), prepare(np.array([1, 1]) / np.sqrt(2))])
print("biased preparation unbiased?", is_unbiased(biased.instruments[0]))
z = Party("B", [povm_to_instrument(projective_povm(BlochSetting(0, 0), inp("B")), 1, party="B")])
table = probability_table(Scenario(identity_process(), [biased, z]))
print("biased A -> B distance:", no_signalling_distance(table, "A", ["B"]))

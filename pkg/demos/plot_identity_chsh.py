"""
CHSH in time: one qubit, two moments
====================================

A single qubit starts maximally mixed. Party A measures it (and passes the
collapsed state on), then party B measures it again. The identity process
connects the two, and the resulting correlations reach 2*sqrt(2).
"""

import numpy as np

from stcorr.correlations import Party, Scenario, chsh, evaluate, probability_table
from stcorr.operations import BlochSetting, projective_instrument, projective_povm, povm_to_instrument
from stcorr.processes import identity_process, validate
from stcorr.tensor import inp

# the process: maximally mixed input to A, identity channel from A's output to B
w = identity_process(2)
print(validate(w))

# A: Lüders measurements in the xy-plane at 0 and pi/2
a = Party("A", [projective_instrument(BlochSetting(phi), "A") for phi in (0, np.pi / 2)])

# B: final measurements at pi/4 and 3 pi/4 (no output space)
b = Party("B", [povm_to_instrument(projective_povm(BlochSetting(phi), inp("B")), 1, party="B")
                for phi in (np.pi / 4, 3 * np.pi / 4)])

table = probability_table(Scenario(w, [a, b]))
print("P(a, b | x=0, y=0) =\n", table.probs((0, 0)))
print("CHSH =", evaluate(chsh(), table), " vs 2*sqrt(2) =", 2 * np.sqrt(2))

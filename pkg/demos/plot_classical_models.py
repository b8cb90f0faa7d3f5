"""
Classical resources and their bounds
====================================

Deterministic strategies are the vertices of the local polytope, so
enumerating them gives the classical bounds exactly. Unbiased classical
operations in sequence admit an explicit local hidden-variable model.
"""

import numpy as np

from stcorr import rand
from stcorr.classical import (bell_factorization, biseparable_bound, classical_correlations,
                              local_bound)
from stcorr.correlations import chsh, evaluate, mermin, svetlichny

print("local bound CHSH      :", local_bound(chsh()))
print("local bound Mermin    :", local_bound(mermin()))
print("biseparable Svetlichny:", biseparable_bound(svetlichny()))
print("biseparable Mermin    :", biseparable_bound(mermin()))

# a random unbiased preparation, a classical channel and a measurement
rng = np.random.default_rng(0)
a = rand.unbiased_classical_preparation(d_out=3, seed=rng)
r = rand.classical_resource(3, 3, seed=rng)
b = rand.classical_measurement(d_in=3, seed=rng)
table = classical_correlations(a, r, b)
model = bell_factorization(a, r, b)
print("\nCHSH of the classical sequence:", round(evaluate(chsh(), table), 6))
print("local model reproduces it to", np.max(np.abs(model.correlations() - table.values)))

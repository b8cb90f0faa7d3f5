"""
A three-time process that behaves like a GHZ state
==================================================

A's output enters a CNOT (strength kappa set by an ancilla); the two
outputs reach B and C. The resulting process matrix is twice the pure
state |G_kappa>, so its statistics match those of a spatial tripartite state.
"""

import numpy as np

from stcorr.correlations import evaluate, ghz_paradox_check, mermin, probability_table
from stcorr.optimize import SettingsVector, ghz_template
from stcorr.processes import g_kappa_state, ghz_process, validate

# compare the process with the state family across kappa
for kappa in (0.0, 0.5, 1.0):
    chi = ghz_process(kappa)
    gap = np.linalg.norm(chi.matrix - 2 * g_kappa_state(kappa).matrix)
    print(f"kappa={kappa:.1f}  trace={chi.trace():.3f}  |chi - 2G|={gap:.1e}  "
          f"valid={validate(chi).valid}")

# A prepares, B and C measure; setting 0 is X, setting 1 is Y
template = ghz_template(1.0)
table = probability_table(template(SettingsVector([0.0, np.pi / 2] * 3)))

report = ghz_paradox_check(table)
for xs, value in report.expectations.items():
    print("<", "".join("XY"[x] for x in xs), "> =", round(value, 12))
print("Mermin =", evaluate(mermin(), table), "(local bound 2)")

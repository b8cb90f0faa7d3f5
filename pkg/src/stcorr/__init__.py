"""Process-matrix simulation of spatial, temporal and spatio-temporal correlations."""

from .classical import (ClassicalOperation, ClassicalResource, LocalModel,
                        bell_factorization, biseparable_bound, classical_correlations,
                        local_bound)
from .correlations import (InequalityFunctional, NumericalError, Party, ProbabilityTable,
                           Scenario, born_rule, chsh, correlators, evaluate, expectation,
                           ghz_paradox_check, mermin, no_signalling_distance,
                           probability_table, svetlichny)
from .operations import (POVM, BlochSetting, CPMap, Instrument, InvalidOperationError,
                         choi_from_kraus, choi_from_map, is_unbiased, povm_to_instrument,
                         projective_instrument, projective_povm)
from .optimize import (OptimizationResult, ProjectiveTemplate, SettingsVector,
                       reference_settings, ghz_template, scan_kappa)
from .processes import (InvalidProcessError, ProcessMatrix, Structure, channel_to_process,
                        cnot_process, depolarize, g_kappa_state, ghz_process,
                        identity_process, process_to_state, validate)
from .scenario_io import (ScenarioFile, ScenarioParseError, ScenarioValidationError,
                          load_scenario, parse_scenario, serialize_scenario)
from .tensor import (Operator, Port, SpaceLabel, identity, inp, out, partial_trace,
                     reorder, tensor, transpose_subsystem)

__version__ = "0.1.0"

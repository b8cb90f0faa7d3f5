"""Multistart derivative-free search over measurement angles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .correlations import (InequalityFunctional, Party, Scenario, evaluate,
                           probability_table, svetlichny)
from .operations import (BlochSetting, Instrument, povm_to_instrument,
                         projective_instrument, projective_povm)
from .processes import ProcessMatrix, depolarize, ghz_process
from .tensor import inp, out

MODES = ("xy", "bloch")
SIMPLEX_TOL = 1e-10
MAX_EVALUATIONS = 100_000

# Svetlichny-optimal xy-plane angles on GHZ; setting 1 is setting 0 rotated by pi/2.
REFERENCE_ANGLES = {"A": np.pi / 4, "B": 0.0, "C": np.pi / 2}


class TemplateError(ValueError):
    def __init__(self, message, settings=None):
        super().__init__(message)
        self.settings = settings


def projective_setting_instrument(role: str, party: str, setting: BlochSetting,
                                  check: bool = True) -> Instrument:
    """Two-outcome projective instrument for a party in a given role.

    ``instrument``: Lüders measurement on ``(X_I, X_O)``.
    ``measurement``: final POVM on ``X_I``.
    ``preparation``: trivial input; the branches are ``P_a / 2`` so that the
    preparation plays the part of the spatial POVM ``{P_a}`` (the state
    actually emitted is the transpose, i.e. the mirrored direction).
    """
    if role == "instrument":
        return projective_instrument(setting, party, check=check)
    if role == "measurement":
        return povm_to_instrument(projective_povm(setting, inp(party), check), 1,
                                  party=party, setting=setting, check=check)
    if role == "preparation":
        return povm_to_instrument(projective_povm(setting, out(party), check), 2,
                                  party=party, setting=setting, check=check)
    raise ValueError(f"unknown role {role!r}")


@dataclass(frozen=True)
class SettingsVector:
    """Flattened angles, party-major then setting-major.

    ``xy`` mode: one azimuth per setting.  ``bloch`` mode: ``(theta, phi)``.
    """

    values: tuple[float, ...]
    mode: str = "xy"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite angle")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        object.__setattr__(self, "values", vals)

    @property
    def per_setting(self) -> int:
        return 1 if self.mode == "xy" else 2

    def settings(self) -> list[BlochSetting]:
        v = self.values
        if self.mode == "xy":
            return [BlochSetting(phi) for phi in v]
        return [BlochSetting(phi=v[i + 1], theta=v[i]) for i in range(0, len(v), 2)]

    def reduced(self) -> tuple[float, ...]:
        return tuple(float(np.mod(v, 2 * np.pi)) for v in self.values)


@dataclass(frozen=True)
class ProjectiveTemplate:
    """Maps a :class:`SettingsVector` to a scenario of projective qubit parties.

    ``parties`` lists ``(name, role)`` pairs in table order.
    """

    process: ProcessMatrix
    parties: tuple[tuple[str, str], ...]
    n_settings: int = 2

    def n_params(self, mode: str) -> int:
        return len(self.parties) * self.n_settings * (1 if mode == "xy" else 2)

    def __call__(self, vector: SettingsVector, check: bool = True) -> Scenario:
        settings = vector.settings()
        if len(settings) != len(self.parties) * self.n_settings:
            raise TemplateError(
                f"expected {len(self.parties) * self.n_settings} settings, "
                f"got {len(settings)}", vector)
        parties = []
        try:
            for k, (name, role) in enumerate(self.parties):
                chunk = settings[k * self.n_settings:(k + 1) * self.n_settings]
                parties.append(Party(name, [
                    projective_setting_instrument(role, name, s, check) for s in chunk]))
            return Scenario(self.process, parties)
        except ValueError as exc:
            raise TemplateError(f"invalid scenario at settings {vector.values}: {exc}",
                                vector) from exc


def ghz_template(kappa: float = 1.0, visibility: float = 1.0) -> ProjectiveTemplate:
    w = ghz_process(kappa)
    if visibility != 1:
        w = depolarize(w, visibility)
    return ProjectiveTemplate(w, (("A", "preparation"), ("B", "measurement"),
                                  ("C", "measurement")))


def reference_settings() -> SettingsVector:
    """``(phi, phi + pi/2)`` for each of A, B, C at the Svetlichny-optimal azimuths."""
    vals = []
    for p in "ABC":
        vals += [REFERENCE_ANGLES[p], REFERENCE_ANGLES[p] + np.pi / 2]
    return SettingsVector(vals, "xy")


@dataclass(frozen=True)
class OptimizationResult:
    best_value: float
    best_settings: SettingsVector
    evaluations: int
    converged: bool
    restart_values: tuple[float, ...] = ()


def functional_value(template, f: InequalityFunctional, vector: SettingsVector,
                     check: bool = True) -> float:
    return evaluate(f, probability_table(template(vector, check=check)))


def optimize(template, f: InequalityFunctional, mode: str = "xy", restarts: int = 16,
             seed: int = 0, tol: float = SIMPLEX_TOL,
             max_evaluations: int = MAX_EVALUATIONS) -> OptimizationResult:
    """Maximise ``f`` over the template's measurement angles.

    Each restart runs a Nelder-Mead simplex from uniformly random angles
    until the simplex diameter drops below ``tol`` or the evaluation budget
    is spent.  The best restart wins; ties go to the earliest restart.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if restarts < 1:
        raise ValueError("need at least one restart")
    n = template.n_params(mode)
    rng = np.random.default_rng(seed)
    # invalid templates fail here, before any search
    functional_value(template, f, SettingsVector(np.zeros(n), mode))

    def objective(x):
        return -functional_value(template, f, SettingsVector(x, mode), check=False)

    best = None
    total = 0
    all_converged = True
    values = []
    for _ in range(restarts):
        x0 = rng.uniform(0, 2 * np.pi, size=n)
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": tol, "fatol": np.inf,
                                "maxfev": max_evaluations, "maxiter": max_evaluations,
                                "adaptive": n > 4})
        total += res.nfev
        converged = bool(res.success)
        all_converged &= converged
        val = -float(res.fun)
        values.append(val)
        if best is None or val > best[0]:
            best = (val, res.x)
    vector = SettingsVector(best[1], mode)
    value = functional_value(template, f, vector)
    return OptimizationResult(value, vector, total, all_converged, tuple(values))


def scan_kappa(kappa_grid: Sequence[float], f: InequalityFunctional | None = None,
               settings: SettingsVector | None = None,
               visibility: float = 1.0) -> list[tuple[float, float]]:
    """Evaluate ``f`` on the GHZ-family process at fixed settings for each kappa."""
    f = f or svetlichny()
    settings = settings or reference_settings()
    out_ = []
    for kappa in kappa_grid:
        value = functional_value(ghz_template(kappa, visibility), f, settings)
        out_.append((float(kappa), value))
    return out_

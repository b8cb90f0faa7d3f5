"""Joint statistics from the generalised Born rule and Bell-type functionals."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .operations import Instrument
from .processes import ProcessMatrix
from .tensor import LayoutError, reorder

DUST = 1e-14
NEGATIVE_TOL = 1e-12
RENORMALISE_TOL = 1e-9


class NumericalError(ArithmeticError):
    """Raised when a Born-rule table is not a probability distribution."""


@dataclass(frozen=True)
class Party:
    name: str
    instruments: tuple[Instrument, ...]

    def __post_init__(self):
        instruments = tuple(self.instruments)
        object.__setattr__(self, "instruments", instruments)
        if not instruments:
            raise ValueError(f"party {self.name} has no settings")
        ref = instruments[0]
        for ins in instruments[1:]:
            if (ins.input_label, ins.output_label) != (ref.input_label, ref.output_label):
                raise LayoutError(f"settings of party {self.name} act on different spaces")
            if len(ins) != len(ref) or tuple(ins.outcomes) != tuple(ref.outcomes):
                raise ValueError(f"settings of party {self.name} have different outcome sets")

    @property
    def labels(self):
        ref = self.instruments[0]
        return tuple(lab for lab in (ref.input_label, ref.output_label) if lab.dimension > 1)

    @property
    def outcomes(self):
        return self.instruments[0].outcomes

    @property
    def n_settings(self) -> int:
        return len(self.instruments)

    @property
    def dim(self) -> int:
        return int(np.prod([lab.dimension for lab in self.labels], dtype=int))


@dataclass(frozen=True)
class Scenario:
    """A process together with every party's per-setting instruments.

    The nontrivial spaces of all parties must match the process layout
    exactly (as sets).
    """

    process: ProcessMatrix
    parties: tuple[Party, ...]

    def __post_init__(self):
        parties = tuple(self.parties)
        object.__setattr__(self, "parties", parties)
        names = [p.name for p in parties]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate party names {names}")
        labels = [lab for p in parties for lab in p.labels]
        proc = [lab for lab in self.process.layout if lab.dimension > 1]
        if len(labels) != len(set(labels)) or set(labels) != set(proc):
            raise LayoutError(
                f"party spaces {[str(l) for l in labels]} do not match process "
                f"layout {[str(l) for l in proc]}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parties)

    @property
    def settings_shape(self) -> tuple[int, ...]:
        return tuple(p.n_settings for p in self.parties)

    def party_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no party named {name!r}") from None

    def process_tensor(self) -> np.ndarray:
        """Process reordered to party order, reshaped to ``(D_1..D_n, D_1..D_n)``."""
        layout = [lab for p in self.parties for lab in p.labels]
        trivial = [lab for lab in self.process.layout if lab.dimension == 1]
        w = reorder(self.process.op, layout + trivial).matrix
        dims = tuple(p.dim for p in self.parties)
        return w.reshape(dims + dims)


@dataclass(frozen=True)
class ProbabilityTable:
    """``P(outcomes | settings)`` with shape ``settings_shape + outcomes_shape``."""

    parties: tuple[str, ...]
    outcome_values: tuple[tuple, ...]
    values: np.ndarray
    tol: float = field(default=1e-9, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = len(self.parties)
        if v.ndim != 2 * n:
            raise ValueError(f"table has {v.ndim} axes, expected {2 * n}")
        if v.shape[n:] != tuple(len(o) for o in self.outcome_values):
            raise ValueError("outcome axes do not match outcome values")
        if v.size and (v.min() < -self.tol or v.max() > 1 + self.tol):
            raise NumericalError("probabilities outside [0, 1]")
        sums = v.reshape(v.shape[:n] + (-1,)).sum(axis=-1)
        if v.size and np.max(np.abs(sums - 1)) > self.tol:
            raise NumericalError(
                f"probabilities do not sum to one (max deviation {np.max(np.abs(sums - 1)):.3g})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def settings_shape(self) -> tuple[int, ...]:
        return self.values.shape[:self.n_parties]

    @property
    def outcomes_shape(self) -> tuple[int, ...]:
        return self.values.shape[self.n_parties:]

    def probs(self, settings: Sequence[int]) -> np.ndarray:
        return self.values[tuple(settings)]

    def settings(self):
        return itertools.product(*(range(n) for n in self.settings_shape))

    def __eq__(self, other):
        if not isinstance(other, ProbabilityTable):
            return NotImplemented
        return (self.parties == other.parties
                and self.outcome_values == other.outcome_values
                and np.array_equal(self.values, other.values))

    __hash__ = None


def _clean(p: np.ndarray, n_settings_axes: int = 0) -> np.ndarray:
    """Remove roundoff dust; refuse genuinely negative or complex entries.

    Each outcome distribution (trailing axes after the first
    ``n_settings_axes``) is renormalised only when already within
    ``RENORMALISE_TOL`` of unit total.
    """
    if np.iscomplexobj(p):
        if p.size and np.max(np.abs(p.imag)) > RENORMALISE_TOL:
            raise NumericalError("complex probabilities: inputs are not Hermitian")
        p = p.real
    p = np.array(p, dtype=float)
    if p.size and p.min() < -NEGATIVE_TOL:
        raise NumericalError(
            f"negative probability {p.min():.3g}: process or instruments are invalid")
    p[p < DUST] = 0.0
    axes = tuple(range(n_settings_axes, p.ndim))
    s = p.sum(axis=axes, keepdims=True)
    return np.where(np.abs(s - 1) < RENORMALISE_TOL, p / s, p)


def _contract(w: np.ndarray, stacks: Sequence[np.ndarray]) -> np.ndarray:
    """Contract stacked Choi branches against the process tensor.

    Each stack has shape ``(..., n_out, D, D)`` with zero or one leading
    settings axis; the result is ``tr[(M^1 (x) ... (x) M^n) W]`` with the
    settings axes first, then the outcome axes.
    """
    operands = []
    sets, outs, rows, cols = [], [], [], []
    for k, st in enumerate(stacks):
        x, o, i, j = 4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3
        idx = [o, i, j]
        if st.ndim == 4:
            idx = [x] + idx
            sets.append(x)
        operands += [st, idx]
        outs.append(o)
        rows.append(i)
        cols.append(j)
    operands += [w, cols + rows]
    naive = np.prod([s.size for s in stacks], dtype=float) * w.shape[0] ** 2
    return np.einsum(*operands, sets + outs, optimize=bool(naive > 1e6))


def born_rule(s: Scenario, settings: Sequence[int]) -> np.ndarray:
    """Outcome distribution for one setting tuple, shape ``outcomes_shape``."""
    if len(settings) != len(s.parties):
        raise ValueError(f"need {len(s.parties)} settings, got {len(settings)}")
    w = s.process_tensor()
    stacks = []
    for p, x in zip(s.parties, settings):
        if not 0 <= x < p.n_settings:
            raise IndexError(f"party {p.name} has no setting {x}")
        stacks.append(p.instruments[x].stacked())
    return _clean(_contract(w, stacks))


def probability_table(s: Scenario, tol: float = 1e-9) -> ProbabilityTable:
    """Born-rule statistics for every combination of settings."""
    w = s.process_tensor()
    stacks = [np.stack([ins.stacked() for ins in p.instruments]) for p in s.parties]
    values = _clean(_contract(w, stacks), len(s.parties))
    return ProbabilityTable(s.names, tuple(p.outcomes for p in s.parties), values, tol)


def _binary_check(table: ProbabilityTable):
    for name, vals in zip(table.parties, table.outcome_values):
        if sorted(vals) != [-1, 1]:
            raise ValueError(f"party {name} does not have +-1 outcomes: {vals}")


def _sign_tensor(table: ProbabilityTable) -> np.ndarray:
    _binary_check(table)
    sign = np.ones(table.outcomes_shape)
    for k, vals in enumerate(table.outcome_values):
        shape = [1] * len(table.outcome_values)
        shape[k] = len(vals)
        sign = sign * np.asarray(vals, dtype=float).reshape(shape)
    return sign


def correlators(table: ProbabilityTable) -> np.ndarray:
    """All correlators at once, indexed by the settings tuple."""
    sign = _sign_tensor(table)
    axes = tuple(range(table.n_parties, 2 * table.n_parties))
    return np.sum(table.values * sign, axis=axes)


def expectation(table: ProbabilityTable, settings: Sequence[int]) -> float:
    """Correlator ``sum a b ... P(a, b, ... | settings)`` for +-1 outcomes."""
    sign = _sign_tensor(table)
    return float(np.sum(sign * table.probs(settings)))


@dataclass(frozen=True)
class InequalityFunctional:
    """Linear combination of correlators, optionally in absolute value."""

    name: str
    coefficients: Mapping[tuple, float]
    bound: float
    absolute: bool = False

    def __post_init__(self):
        coeffs = {tuple(int(x) for x in k): float(v) for k, v in dict(self.coefficients).items()}
        if not coeffs:
            raise ValueError("functional has no terms")
        if not all(np.isfinite(v) for v in coeffs.values()):
            raise ValueError("non-finite coefficient")
        if len({len(k) for k in coeffs}) != 1:
            raise ValueError("setting tuples of different lengths")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def n_parties(self) -> int:
        return len(next(iter(self.coefficients)))

    @property
    def n_settings(self) -> int:
        return 1 + max(max(k) for k in self.coefficients)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.coefficients.items())), self.bound, self.absolute))


def chsh() -> InequalityFunctional:
    return InequalityFunctional(
        "chsh", {(0, 0): 1, (0, 1): -1, (1, 0): 1, (1, 1): 1}, bound=2)


def mermin() -> InequalityFunctional:
    return InequalityFunctional(
        "mermin", {(0, 0, 0): 1, (0, 1, 1): -1, (1, 0, 1): -1, (1, 1, 0): -1}, bound=2)


def svetlichny() -> InequalityFunctional:
    coeffs = {(0, 0, 0): 1, (0, 0, 1): 1, (0, 1, 0): 1, (1, 0, 0): 1,
              (1, 1, 0): -1, (1, 0, 1): -1, (0, 1, 1): -1, (1, 1, 1): -1}
    return InequalityFunctional("svetlichny", coeffs, bound=4, absolute=True)


PRESETS = {"chsh": chsh, "mermin": mermin, "svetlichny": svetlichny}


def preset(name: str) -> InequalityFunctional:
    try:
        return PRESETS[name.lower()]()
    except KeyError:
        raise KeyError(f"unknown inequality {name!r}; choose from {sorted(PRESETS)}") from None


def evaluate(f: InequalityFunctional, table: ProbabilityTable) -> float:
    if f.n_parties != table.n_parties:
        raise ValueError(f"{f.name} needs {f.n_parties} parties, table has {table.n_parties}")
    corr = correlators(table)
    total = 0.0
    for xs, c in f.coefficients.items():
        if any(x >= n for x, n in zip(xs, table.settings_shape)):
            raise KeyError(f"table lacks setting {xs} required by {f.name}")
        total += c * corr[xs]
    total = float(total)
    return abs(total) if f.absolute else total


@dataclass
class GHZParadoxReport:
    expectations: dict
    deviations: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(d <= self.tol for d in self.deviations.values())


GHZ_TARGETS = {(0, 0, 0): 1.0, (0, 1, 1): -1.0, (1, 0, 1): -1.0, (1, 1, 0): -1.0}


def ghz_paradox_check(table: ProbabilityTable, tol: float = 1e-9) -> GHZParadoxReport:
    """Compare the four GHZ correlators (setting 0 = X, 1 = Y) to +1, -1, -1, -1."""
    if table.n_parties != 3 or any(n < 2 for n in table.settings_shape):
        raise ValueError("GHZ paradox needs three parties with two settings each")
    ex = {xs: expectation(table, xs) for xs in GHZ_TARGETS}
    dev = {xs: abs(ex[xs] - t) for xs, t in GHZ_TARGETS.items()}
    return GHZParadoxReport(ex, dev, tol)


def marginal(table: ProbabilityTable, keep: Sequence[str]) -> np.ndarray:
    """Outcome marginal over ``keep`` for every setting tuple."""
    n = table.n_parties
    idx = [table.parties.index(k) for k in keep]
    drop = tuple(n + i for i in range(n) if i not in idx)
    return table.values.sum(axis=drop)


def no_signalling_distance(table: ProbabilityTable, from_party: str,
                           to_parties: Sequence[str]) -> float:
    """Largest total-variation change of ``to_parties``' marginal under a
    change of ``from_party``'s setting, all other settings held fixed."""
    if isinstance(to_parties, str):
        to_parties = [to_parties]
    if from_party in to_parties:
        raise ValueError("from_party must not be among to_parties")
    n = table.n_parties
    src = table.parties.index(from_party)
    marg = marginal(table, to_parties)
    out_axes = tuple(range(n, marg.ndim))
    marg = np.moveaxis(marg, src, 0)
    worst = 0.0
    for x, y in itertools.combinations(range(marg.shape[0]), 2):
        d = 0.5 * np.sum(np.abs(marg[x] - marg[y]), axis=tuple(a - 1 for a in out_axes))
        worst = max(worst, float(np.max(d)))
    return worst

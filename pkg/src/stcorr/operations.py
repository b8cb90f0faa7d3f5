"""CP maps, instruments and POVMs in Choi form.

Choi convention: a map ``M`` from ``A_I`` to ``A_O`` is stored as

    sum_{jl} |j><l|_{A_I} (x) [M(|l><j|)]^T_{A_O}

so that the identity map becomes sum_{jl} |j><l| (x) |j><l|.  Preparations
have a one-dimensional input label, final measurements a one-dimensional
output label; both keep their trivial label in the layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .tensor import (PSD_TOL, Operator, SpaceLabel, identity, inp, is_psd,
                     out, partial_trace)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class InvalidOperationError(ValueError):
    """An instrument, POVM or CP map violates its defining constraints."""


@dataclass(frozen=True)
class CPMap:
    choi: Operator
    input_label: SpaceLabel
    output_label: SpaceLabel

    def __post_init__(self):
        if self.choi.layout != (self.input_label, self.output_label):
            raise InvalidOperationError(
                f"Choi layout {self.choi.layout} does not match "
                f"({self.input_label}, {self.output_label})")

    @property
    def d_in(self) -> int:
        return self.input_label.dimension

    @property
    def d_out(self) -> int:
        return self.output_label.dimension

    def apply(self, rho) -> np.ndarray:
        """Act with the map on a ``d_in x d_in`` matrix (inverts the Choi form)."""
        t = self.choi.matrix.reshape(self.d_in, self.d_out, self.d_in, self.d_out)
        return np.einsum("lj,jplq->qp", np.asarray(rho, dtype=complex), t)

    def is_cp(self, tol: float = PSD_TOL) -> bool:
        return is_psd(self.choi, tol)

    def is_trace_preserving(self, tol: float = PSD_TOL) -> bool:
        red = partial_trace(self.choi, [self.output_label]).matrix
        return bool(np.max(np.abs(red - np.eye(self.d_in))) <= tol)


@dataclass(frozen=True)
class BlochSetting:
    """Qubit measurement direction.

    With ``theta`` left as ``None`` the direction lies in the xy-plane at
    azimuth ``phi``; otherwise it is the usual polar parametrisation.
    """

    phi: float
    theta: float | None = None

    def __post_init__(self):
        vals = [self.phi] if self.theta is None else [self.phi, self.theta]
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"non-finite angle in {self}")

    @property
    def plane(self) -> str:
        return "xy" if self.theta is None else "full"

    @property
    def direction(self) -> np.ndarray:
        if self.theta is None:
            return np.array([np.cos(self.phi), np.sin(self.phi), 0.0])
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi),
                         np.cos(self.theta)])

    def observable(self) -> np.ndarray:
        nx, ny, nz = self.direction
        return nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z

    def projector(self, outcome: int) -> np.ndarray:
        return (np.eye(2) + outcome * self.observable()) / 2


def _check_outcomes(outcomes, n):
    outcomes = tuple(outcomes) if outcomes is not None else None
    if outcomes is None:
        outcomes = (1, -1) if n == 2 else tuple(range(n))
    if len(outcomes) != n:
        raise InvalidOperationError(f"{len(outcomes)} outcome values for {n} branches")
    return outcomes


@dataclass(frozen=True)
class Instrument:
    """Outcome-labelled CP maps that sum to a CPTP map.

    Construction validates positivity of every branch and trace
    preservation of the sum; pass ``check=False`` only for inputs that are
    valid by construction.
    """

    branches: tuple[CPMap, ...]
    outcomes: tuple = None
    setting: object = field(default=None, compare=False)
    tol: float = field(default=PSD_TOL, compare=False)
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        branches = tuple(self.branches)
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise InvalidOperationError("instrument has no branches")
        object.__setattr__(self, "outcomes", _check_outcomes(self.outcomes, len(branches)))
        first = branches[0]
        for b in branches[1:]:
            if (b.input_label, b.output_label) != (first.input_label, first.output_label):
                raise InvalidOperationError("instrument branches act on different spaces")
        if self.check:
            for a, b in zip(self.outcomes, branches):
                if not b.is_cp(self.tol):
                    raise InvalidOperationError(f"branch {a} is not completely positive")
            if not self.total().is_trace_preserving(self.tol):
                raise InvalidOperationError(
                    "branches do not sum to a trace-preserving map "
                    "(tr_out sum_a M_a != 1_in)")

    @property
    def input_label(self) -> SpaceLabel:
        return self.branches[0].input_label

    @property
    def output_label(self) -> SpaceLabel:
        return self.branches[0].output_label

    @property
    def party(self) -> str:
        return self.input_label.party

    def total(self) -> CPMap:
        m = sum(b.choi.matrix for b in self.branches)
        return CPMap(Operator(m, self.branches[0].choi.layout),
                     self.input_label, self.output_label)

    def stacked(self) -> np.ndarray:
        return np.stack([b.choi.matrix for b in self.branches])

    def __len__(self):
        return len(self.branches)


@dataclass(frozen=True)
class POVM:
    elements: tuple[Operator, ...]
    outcomes: tuple = None
    tol: float = field(default=PSD_TOL, compare=False)
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise InvalidOperationError("POVM has no elements")
        object.__setattr__(self, "outcomes", _check_outcomes(self.outcomes, len(els)))
        layout = els[0].layout
        if any(e.layout != layout for e in els):
            raise InvalidOperationError("POVM elements act on different spaces")
        if not self.check:
            return
        for a, e in zip(self.outcomes, els):
            if not is_psd(e, self.tol):
                raise InvalidOperationError(f"POVM element {a} is not positive")
        total = sum(e.matrix for e in els)
        if np.max(np.abs(total - np.eye(total.shape[0]))) > self.tol:
            raise InvalidOperationError("POVM elements do not sum to the identity")

    @property
    def layout(self):
        return self.elements[0].layout

    @property
    def dim(self) -> int:
        return self.elements[0].dim


def choi_from_map(fn: Callable[[np.ndarray], np.ndarray],
                  input_label: SpaceLabel, output_label: SpaceLabel) -> CPMap:
    """Choi matrix of an arbitrary linear map given as a Python callable."""
    din, dout = input_label.dimension, output_label.dimension
    m = np.zeros((din * dout, din * dout), dtype=complex)
    for j in range(din):
        for l in range(din):
            unit = np.zeros((din, din), dtype=complex)
            unit[l, j] = 1
            m[j * dout:(j + 1) * dout, l * dout:(l + 1) * dout] = np.asarray(fn(unit)).T
    return CPMap(Operator(m, (input_label, output_label)), input_label, output_label)


def choi_from_kraus(kraus: Sequence, input_label: SpaceLabel,
                    output_label: SpaceLabel) -> CPMap:
    """Choi matrix of ``rho -> sum_k K rho K^dagger``."""
    ks = np.array([np.asarray(k, dtype=complex) for k in kraus])
    if ks.ndim != 3:
        raise InvalidOperationError("Kraus operators must be matrices")
    din, dout = input_label.dimension, output_label.dimension
    if ks.shape[1:] != (dout, din):
        raise InvalidOperationError(
            f"Kraus operators have shape {ks.shape[1:]}, expected {(dout, din)}")
    t = np.einsum("kpj,kql->jplq", ks.conj(), ks)
    m = t.reshape(din * dout, din * dout)
    return CPMap(Operator(m, (input_label, output_label)), input_label, output_label)


def projective_instrument(setting: BlochSetting, party: str = "A",
                          check: bool = True) -> Instrument:
    """Two-outcome Lüders instrument ``rho -> P_a rho P_a`` on a qubit."""
    lin, lout = inp(party), out(party)
    branches = [choi_from_kraus([setting.projector(a)], lin, lout) for a in (1, -1)]
    return Instrument(branches, (1, -1), setting=setting, check=check)


def projective_povm(setting: BlochSetting, label: SpaceLabel, check: bool = True) -> POVM:
    return POVM([Operator(setting.projector(a), [label]) for a in (1, -1)], (1, -1),
                check=check)


def measurement_instrument(povm: POVM, party: str | None = None,
                           setting=None) -> Instrument:
    """A final measurement: trivial output, Choi branches equal the POVM."""
    return povm_to_instrument(povm, 1, party=party, setting=setting)


def povm_to_instrument(povm: POVM, d_out: int, party: str | None = None,
                       setting=None, check: bool = True) -> Instrument:
    """Map a POVM on ``A_I (x) A_O`` to the instrument with branches ``E_a / d_out``."""
    d = povm.dim
    if d_out < 1 or d % d_out:
        raise InvalidOperationError(
            f"POVM dimension {d} does not factor with output dimension {d_out}")
    party = party if party is not None else povm.layout[0].party
    lin, lout = inp(party, d // d_out), out(party, d_out)
    branches = [CPMap(Operator(e.matrix / d_out, (lin, lout)), lin, lout)
                for e in povm.elements]
    return Instrument(branches, povm.outcomes, setting=setting, tol=povm.tol, check=check)


def is_unbiased(instr: Instrument, tol: float = PSD_TOL) -> bool:
    """No-bias test: ``tr_in sum_a M_a == (d_in / d_out) 1_out``."""
    total = instr.total()
    red = partial_trace(total.choi, [total.input_label]).matrix
    target = (total.d_in / total.d_out) * np.eye(total.d_out)
    return bool(np.max(np.abs(red - target)) <= tol)


def reduce_preparation(instr: Instrument) -> list[tuple[float, np.ndarray | None]]:
    """Effective preparation of an instrument fed a maximally mixed input.

    Returns one ``(probability, state)`` pair per outcome, where the state is
    the normalised transpose of ``tr_in M_a / d_in``.  Zero-probability
    branches carry ``None`` as state.
    """
    result = []
    for rho in _reduced_branches(instr):
        p = float(np.real(np.trace(rho)))
        state = rho.T / p if p > 1e-15 else None
        result.append((p, state))
    return result


def _reduced_branches(instr):
    return [partial_trace(b.choi, [b.input_label]).matrix / b.d_in
            for b in instr.branches]


def preparation_instrument(instr: Instrument) -> Instrument:
    """Replace ``instr`` by the equivalent trivial-input instrument.

    Valid whenever the instrument acts on a maximally mixed input; each
    branch becomes ``rho_a = tr_in M_a / d_in`` on the output space.
    """
    lin, lout = SpaceLabel(instr.party, instr.input_label.port, 1), instr.output_label
    branches = [CPMap(Operator(rho, (lin, lout)), lin, lout)
                for rho in _reduced_branches(instr)]
    return Instrument(branches, instr.outcomes, setting=instr.setting, tol=instr.tol)


def preparation_from_states(probs: Sequence[float], states: Sequence,
                            party: str = "A", outcomes=None, setting=None) -> Instrument:
    """Instrument that prepares ``states[a]`` with probability ``probs[a]``."""
    states = [np.asarray(s, dtype=complex) for s in states]
    d = states[0].shape[0]
    lin, lout = inp(party, 1), out(party, d)
    branches = [CPMap(Operator(p * s.T, (lin, lout)), lin, lout)
                for p, s in zip(probs, states)]
    return Instrument(branches, outcomes, setting=setting)


def spatial_povm_of_preparation(instr: Instrument) -> POVM:
    """POVM ``E_a = d_out * rho_a`` that a preparation corresponds to spatially."""
    lab = SpaceLabel(instr.party, instr.output_label.port, instr.output_label.dimension)
    rhos = _reduced_branches(instr)
    return POVM([Operator(instr.output_label.dimension * r, [lab]) for r in rhos],
                instr.outcomes)


def trivial_instrument(label: SpaceLabel) -> Instrument:
    """Single-outcome 'discard' measurement: Choi is the identity on the input."""
    lout = out(label.party, 1)
    lin = SpaceLabel(label.party, label.port, label.dimension)
    cp = CPMap(Operator(identity([lin]).matrix, (lin, lout)), lin, lout)
    return Instrument([cp], (1,))

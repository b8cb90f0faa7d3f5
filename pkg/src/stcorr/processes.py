"""Process matrices: construction, the process-to-state map and validity checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .operations import PAULI_X, CPMap
from .tensor import (PSD_TOL, Operator, Port, SpaceLabel, hermiticity_error,
                     identity, inp, is_identity_factor, ket_operator,
                     min_eigenvalue, out, partial_trace, reorder, tensor,
                     transpose_subsystem)


class Structure(enum.Enum):
    SPATIAL_STATE = "spatial_state"
    CHANNEL = "channel"
    COMB = "comb"


class InvalidProcessError(ValueError):
    pass


def _normalise_order(order):
    if order is None:
        return None
    groups = []
    for g in order:
        groups.append((g,) if isinstance(g, str) else tuple(g))
    return tuple(groups)


@dataclass(frozen=True)
class ProcessMatrix:
    """An operator over parties' input/output spaces plus its declared class.

    ``order`` is only used for :attr:`Structure.COMB` and lists the parties
    in causal order; parties acting at the same time share a tuple, e.g.
    ``("A", ("B", "C"))``.  Processes keep their natural trace.
    """

    op: Operator
    structure: Structure
    order: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "structure", Structure(self.structure))
        object.__setattr__(self, "order", _normalise_order(self.order))
        if self.structure is Structure.COMB and not self.order:
            raise InvalidProcessError("a comb needs a causal order")

    @property
    def layout(self):
        return self.op.layout

    @property
    def matrix(self):
        return self.op.matrix

    def trace(self) -> float:
        return float(np.real(self.op.trace()))


def identity_choi(x: SpaceLabel, y: SpaceLabel) -> Operator:
    """``sum_jl |j><l|_x (x) |j><l|_y``, the unnormalised identity Choi."""
    if x.dimension != y.dimension:
        raise ValueError("identity Choi needs equal dimensions")
    v = np.eye(x.dimension).ravel()
    return ket_operator(v, [x, y])


def channel_to_process(cp: CPMap, source: str = "A", target: str = "B",
                       tol: float = PSD_TOL) -> ProcessMatrix:
    """Process matrix of a channel from ``source``'s output to ``target``'s input.

    Obtained as the full transpose of the map's Choi matrix, i.e.
    ``T = sum_jl |j><l| (x) T(|j><l|)``.
    """
    if not cp.is_trace_preserving(tol):
        raise InvalidProcessError("channel is not trace preserving")
    lo, li = out(source, cp.d_in), inp(target, cp.d_out)
    return ProcessMatrix(Operator(cp.choi.matrix.T, (lo, li)), Structure.CHANNEL)


def identity_process(d: int = 2, first: str = "A", second: str = "B") -> ProcessMatrix:
    """Maximally mixed input to ``first``, then identity evolution to ``second``."""
    if d < 2:
        raise ValueError("identity process needs d >= 2")
    w = tensor(identity([inp(first, d)]).scaled(1 / d),
               identity_choi(out(first, d), inp(second, d)))
    return ProcessMatrix(w, Structure.COMB, (first, second))


def process_to_state(w: ProcessMatrix) -> Operator:
    tr = w.op.trace()
    if abs(tr) < 1e-14:
        raise InvalidProcessError("process has zero trace")
    return w.op.scaled(1 / tr)


def depolarize(w: ProcessMatrix, visibility: float) -> ProcessMatrix:
    """Mix the process-equivalent state with white noise, keeping the trace.

    ``W -> tr(W) * (v W / tr W + (1 - v) 1 / D)``
    """
    if not 0 <= visibility <= 1:
        raise ValueError("visibility must lie in [0, 1]")
    tr = w.trace()
    m = visibility * w.matrix + (1 - visibility) * tr * np.eye(w.op.dim) / w.op.dim
    return ProcessMatrix(Operator(m, w.layout), w.structure, w.order)


_SQ2 = np.sqrt(2)


def cnot_process() -> ProcessMatrix:
    """Choi matrix of CNOT as a channel from ``(A_O, D_O)`` to ``(B_I, C_I)``.

    The system enters at ``A_O`` (control) and leaves at ``B_I``; the
    ancilla enters at ``D_O`` (target) and leaves at ``C_I``.  Layout is
    ``(A_O, B_I, D_O, C_I)``.
    """
    ket0, ket1 = np.array([1, 0]), np.array([0, 1])
    phi_p = (np.kron(ket0, ket0) + np.kron(ket1, ket1)) / _SQ2
    psi_p = (np.kron(ket0, ket1) + np.kron(ket1, ket0)) / _SQ2
    lam = _SQ2 * (np.kron(np.kron(ket0, ket0), phi_p) + np.kron(np.kron(ket1, ket1), psi_p))
    layout = (out("A"), inp("B"), out("D"), inp("C"))
    return ProcessMatrix(ket_operator(lam, layout), Structure.CHANNEL)


def kappa_ket(kappa: float) -> np.ndarray:
    return np.array([np.sqrt(1 + kappa), np.sqrt(1 - kappa)]) / _SQ2


def _check_kappa(kappa):
    if not 0 <= kappa <= 1:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")


def ghz_process(kappa: float) -> ProcessMatrix:
    """Tripartite process on ``(A_O, B_I, C_I)`` from a CNOT of strength ``kappa``.

    The ancilla ``D`` is prepared in ``|kappa>`` and traced out after being
    linked into the CNOT Choi matrix.  Trace is 2 for every ``kappa``.
    """
    _check_kappa(kappa)
    lam = cnot_process().op
    d = lam.label("D", Port.OUTPUT)
    prep = transpose_subsystem(ket_operator(kappa_ket(kappa), [d]), [d])
    rest = [lab for lab in lam.layout if lab != d]
    link = tensor(prep, identity(rest)) @ lam
    chi = reorder(partial_trace(link, [d]), (out("A"), inp("B"), inp("C")))
    return ProcessMatrix(chi, Structure.COMB, ("A", ("B", "C")))


def ghz_ket() -> np.ndarray:
    v = np.zeros(8, dtype=complex)
    v[0] = v[7] = 1 / _SQ2
    return v


def g_kappa_ket(kappa: float) -> np.ndarray:
    _check_kappa(kappa)
    k = (np.sqrt(1 + kappa) * np.eye(2) + np.sqrt(1 - kappa) * PAULI_X) / _SQ2
    return np.kron(np.eye(4), k) @ ghz_ket()


def g_kappa_state(kappa: float, layout=None) -> Operator:
    """Density matrix of the tripartite family interpolating Phi+ (x) |+> and GHZ."""
    if layout is None:
        layout = (SpaceLabel("A"), SpaceLabel("B"), SpaceLabel("C"))
    return ket_operator(g_kappa_ket(kappa), layout)


@dataclass
class ValidityReport:
    structure: Structure
    psd: bool
    min_eigenvalue: float
    checks: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.psd and all(ok for _, ok, _ in self.checks)

    def failures(self) -> list[str]:
        out_ = [] if self.psd else [f"not positive semidefinite (min eigenvalue {self.min_eigenvalue:.3g})"]
        out_ += [f"{name}: {detail}" for name, ok, detail in self.checks if not ok]
        return out_

    def __str__(self):
        lines = [f"structure: {self.structure.value}",
                 f"positive semidefinite: {self.psd} (min eigenvalue {self.min_eigenvalue:.3g})"]
        lines += [f"{name}: {'ok' if ok else 'FAIL'} {detail}".rstrip()
                  for name, ok, detail in self.checks]
        lines.append(f"valid: {self.valid}")
        return "\n".join(lines)


def _labels_of(layout, parties, port):
    return [lab for lab in layout if lab.party in parties and lab.port is port]


def validate(w: ProcessMatrix, tol: float = PSD_TOL) -> ValidityReport:
    """Check positivity and the trace conditions of the declared class."""
    op = w.op
    herm = hermiticity_error(op)
    lam = min_eigenvalue(op)
    report = ValidityReport(w.structure, herm <= tol and lam >= -tol, lam)
    if herm > tol:
        report.checks.append(("hermitian", False, f"deviation {herm:.3g}"))

    if w.structure is Structure.SPATIAL_STATE:
        outputs = [lab for lab in op.layout if lab.port is Port.OUTPUT]
        report.checks.append(("no output ports", not outputs,
                              "" if not outputs else f"found {[str(l) for l in outputs]}"))
        tr = op.trace()
        report.checks.append(("unit trace", abs(tr - 1) <= tol, f"trace {tr.real:.6g}"))

    elif w.structure is Structure.CHANNEL:
        ins = [lab for lab in op.layout if lab.port is Port.INPUT]
        outs = [lab for lab in op.layout if lab.port is Port.OUTPUT]
        red = partial_trace(op, ins)
        red = reorder(red, outs) if outs else red
        dev = float(np.max(np.abs(red.matrix - np.eye(red.dim))))
        report.checks.append(("trace preservation (tr_in T = 1_out)", dev <= tol,
                              f"max deviation {dev:.3g}"))

    else:
        _validate_comb(w, tol, report)
    return report


def _validate_comb(w, tol, report):
    op = w.op
    listed = {p for g in w.order for p in g}
    stray = [lab for lab in op.layout if lab.party not in listed]
    if stray:
        report.checks.append(("causal order covers layout", False,
                              f"unlisted {[str(l) for l in stray]}"))
        return
    cur = op
    groups = list(w.order)
    for k in range(len(groups) - 1, -1, -1):
        outs = _labels_of(cur.layout, groups[k], Port.OUTPUT)
        if k == len(groups) - 1 and outs:
            ok, cur = is_identity_factor(cur, outs, tol)
            report.checks.append((f"identity on final outputs {[str(l) for l in outs]}", ok, ""))
        ins = _labels_of(cur.layout, groups[k], Port.INPUT)
        reduced = partial_trace(cur, ins) if ins else cur
        if k == 0:
            tr = reduced.trace()
            report.checks.append(("normalisation", abs(tr - 1) <= tol and reduced.dim == 1,
                                  f"residual trace {tr.real:.6g}"))
        else:
            prev = _labels_of(reduced.layout, groups[k - 1], Port.OUTPUT)
            ok, cur = is_identity_factor(reduced, prev, tol)
            name = "+".join(groups[k])
            report.checks.append((f"tr over {name} inputs leaves identity on "
                                  f"{[str(l) for l in prev]}", ok, ""))

"""Dense operators on labelled tensor-product spaces.

Every operator carries an ordered ``layout`` of :class:`SpaceLabel` objects.
The layout fixes the computational-basis ordering of the tensor product:
basis index ``(i_1, ..., i_n)`` is stored row-major, first label slowest.
All transposes are taken in this basis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
MAX_DIM = 2**12


class Port(enum.Enum):
    INPUT = "input"
    OUTPUT = "output"
    NONE = "none"


class LayoutError(ValueError):
    """Raised when operator layouts conflict or a label is missing."""


@dataclass(frozen=True)
class SpaceLabel:
    """A named subsystem: ``party`` plus ``port`` plus ``dimension``."""

    party: str
    port: Port = Port.NONE
    dimension: int = 2

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if not isinstance(self.port, Port):
            object.__setattr__(self, "port", Port(self.port))

    @property
    def key(self):
        return (self.party, self.port)

    def __str__(self):
        suffix = {Port.INPUT: "_I", Port.OUTPUT: "_O", Port.NONE: ""}[self.port]
        return f"{self.party}{suffix}"


def inp(party: str, d: int = 2) -> SpaceLabel:
    return SpaceLabel(party, Port.INPUT, d)


def out(party: str, d: int = 2) -> SpaceLabel:
    return SpaceLabel(party, Port.OUTPUT, d)


def _dims(layout):
    return tuple(lab.dimension for lab in layout)


def _size(layout) -> int:
    return math.prod(lab.dimension for lab in layout)


class Operator:
    """Immutable square complex matrix tagged with a subsystem layout."""

    __slots__ = ("_layout", "_matrix")

    def __init__(self, matrix, layout: Sequence[SpaceLabel]):
        layout = tuple(layout)
        keys = [lab.key for lab in layout]
        if len(set(keys)) != len(keys):
            raise LayoutError(f"duplicate labels in layout {[str(l) for l in layout]}")
        dim = _size(layout)
        if dim > MAX_DIM:
            raise ValueError(f"total dimension {dim} exceeds cap {MAX_DIM}")
        m = np.array(matrix, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.shape != (dim, dim):
            raise LayoutError(
                f"matrix shape {m.shape} does not match layout dimension {dim}")
        m.setflags(write=False)
        self._layout = layout
        self._matrix = m

    @property
    def layout(self) -> tuple[SpaceLabel, ...]:
        return self._layout

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self._layout)

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self._matrix))

    def label(self, party: str, port: Port = Port.NONE) -> SpaceLabel:
        for lab in self._layout:
            if lab.key == (party, port):
                return lab
        raise LayoutError(f"no label {party!r}/{port.value} in layout")

    def scaled(self, factor) -> "Operator":
        return Operator(self._matrix * factor, self._layout)

    def relabel(self, mapping: dict) -> "Operator":
        """Swap labels (same dimensions) without touching entries."""
        new = []
        for lab in self._layout:
            rep = mapping.get(lab, lab)
            if rep.dimension != lab.dimension:
                raise LayoutError(f"cannot relabel {lab} to {rep}: dimension differs")
            new.append(rep)
        return Operator(self._matrix, new)

    def __add__(self, other: "Operator") -> "Operator":
        other = reorder(other, self._layout)
        return Operator(self._matrix + other.matrix, self._layout)

    def __sub__(self, other: "Operator") -> "Operator":
        other = reorder(other, self._layout)
        return Operator(self._matrix - other.matrix, self._layout)

    def __matmul__(self, other: "Operator") -> "Operator":
        other = reorder(other, self._layout)
        return Operator(self._matrix @ other.matrix, self._layout)

    def __eq__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return (self._layout == other._layout
                and np.array_equal(self._matrix, other._matrix))

    __hash__ = None

    def __repr__(self):
        labs = ", ".join(str(l) for l in self._layout)
        return f"Operator([{labs}], dim={self.dim})"


def identity(layout: Sequence[SpaceLabel]) -> Operator:
    return Operator(np.eye(_size(layout)), layout)


def ket_operator(vec, layout: Sequence[SpaceLabel]) -> Operator:
    """Rank-one projector-like operator |v><v| (no normalisation)."""
    v = np.asarray(vec, dtype=complex).ravel()
    return Operator(np.outer(v, v.conj()), layout)


def tensor(*ops: Operator) -> Operator:
    """Kronecker product; the layout is the concatenation of the inputs."""
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    layout = []
    for op in ops:
        layout.extend(op.layout)
    keys = [lab.key for lab in layout]
    if len(set(keys)) != len(keys):
        raise LayoutError(f"layout conflict: {[str(l) for l in layout]}")
    m = ops[0].matrix
    for op in ops[1:]:
        m = np.kron(m, op.matrix)
    return Operator(m, layout)


def _positions(op: Operator, labels: Iterable[SpaceLabel]) -> list[int]:
    keys = [lab.key for lab in op.layout]
    pos = []
    for lab in labels:
        k = lab.key if isinstance(lab, SpaceLabel) else lab
        if k not in keys:
            raise LayoutError(f"label {lab} not in layout {[str(l) for l in op.layout]}")
        pos.append(keys.index(k))
    return pos


def _as_tensor(op: Operator) -> np.ndarray:
    d = op.dims
    return op.matrix.reshape(d + d)


def partial_trace(op: Operator, discard: Iterable[SpaceLabel]) -> Operator:
    """Trace out the subsystems in ``discard``."""
    pos = sorted(set(_positions(op, discard)))
    n = len(op.layout)
    keep = [i for i in range(n) if i not in pos]
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    rows = letters[:n]
    cols = letters[n:]
    for i in pos:
        cols[i] = rows[i]
    out_idx = [rows[i] for i in keep] + [cols[i] for i in keep]
    t = np.einsum("".join(rows + cols) + "->" + "".join(out_idx), _as_tensor(op))
    layout = [op.layout[i] for i in keep]
    d = _size(layout)
    return Operator(t.reshape(d, d), layout)


def transpose_subsystem(op: Operator, targets: Iterable[SpaceLabel]) -> Operator:
    """Partial transpose on ``targets`` in the computational basis."""
    pos = set(_positions(op, targets))
    n = len(op.layout)
    axes = list(range(2 * n))
    for i in pos:
        axes[i], axes[n + i] = n + i, i
    t = _as_tensor(op).transpose(axes)
    return Operator(t.reshape(op.dim, op.dim), op.layout)


def reorder(op: Operator, new_layout: Sequence[SpaceLabel]) -> Operator:
    """Permute tensor factors so that the layout becomes ``new_layout``."""
    new_layout = tuple(new_layout)
    if new_layout == op.layout:
        return op
    if len(new_layout) != len(op.layout) or set(new_layout) != set(op.layout):
        raise LayoutError(
            f"{[str(l) for l in new_layout]} is not a permutation of "
            f"{[str(l) for l in op.layout]}")
    perm = [op.layout.index(lab) for lab in new_layout]
    n = len(perm)
    t = _as_tensor(op).transpose(perm + [n + p for p in perm])
    return Operator(t.reshape(op.dim, op.dim), new_layout)


def hermiticity_error(op: Operator) -> float:
    m = op.matrix
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(op: Operator, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(op) <= tol


def min_eigenvalue(op: Operator) -> float:
    m = op.matrix
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def is_psd(op: Operator, tol: float = PSD_TOL) -> bool:
    """True iff the smallest eigenvalue of ``op`` is at least ``-tol``.

    Raises
    ------
    ValueError
        If ``op`` is not Hermitian within ``tol``.
    """
    err = hermiticity_error(op)
    if err > max(tol, HERMITIAN_TOL):
        raise ValueError(f"operator is not Hermitian (max deviation {err:.3g})")
    return min_eigenvalue(op) >= -tol


def is_density_matrix(op: Operator, tol: float = PSD_TOL) -> bool:
    if hermiticity_error(op) > tol:
        return False
    return is_psd(op, tol) and abs(op.trace() - 1) <= tol


def is_identity_factor(op: Operator, labels: Sequence[SpaceLabel],
                       tol: float = PSD_TOL) -> tuple[bool, Operator]:
    """Check ``op == rest (x) 1_labels``; return the flag and ``rest``."""
    labels = list(labels)
    d = _size(labels)
    rest = partial_trace(op, labels).scaled(1 / d)
    rebuilt = tensor(rest, identity(labels))
    diff = np.max(np.abs(reorder(rebuilt, op.layout).matrix - op.matrix))
    return bool(diff <= tol), rest

"""Classical temporal resources, free classical operations and classical bounds.

Bounds are obtained by exhaustive enumeration of deterministic strategies,
which are the extreme points of the relevant polytopes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .correlations import InequalityFunctional, ProbabilityTable

MAX_STRATEGY_BITS = 20


class BiasedOperationError(ValueError):
    """The operation fails the classical no-bias condition."""


def _outcome_values(n):
    return (1, -1) if n == 2 else tuple(range(n))


@dataclass(frozen=True)
class ClassicalOperation:
    """Conditional table ``P(a, lambda_out | x, lambda_in)``.

    ``table`` has axes ``(outcome, lambda_out, setting, lambda_in)``.
    """

    table: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 4:
            raise ValueError("operation table needs axes (a, lambda_out, x, lambda_in)")
        if t.min() < -self.tol:
            raise ValueError("negative probability in operation table")
        sums = t.sum(axis=(0, 1))
        if np.max(np.abs(sums - 1)) > self.tol:
            raise ValueError("operation is not normalised over (a, lambda_out)")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def n_outcomes(self) -> int:
        return self.table.shape[0]

    @property
    def d_out(self) -> int:
        return self.table.shape[1]

    @property
    def n_settings(self) -> int:
        return self.table.shape[2]

    @property
    def d_in(self) -> int:
        return self.table.shape[3]


@dataclass(frozen=True)
class ClassicalResource:
    """Classical channel ``P(lambda_B_in | lambda_A_out)``, axes ``(b_in, a_out)``."""

    table: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 2 or t.min() < -self.tol:
            raise ValueError("resource must be a nonnegative 2-d table")
        if np.max(np.abs(t.sum(axis=0) - 1)) > self.tol:
            raise ValueError("resource columns must sum to one")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)


def classical_is_unbiased(op: ClassicalOperation, tol: float = 1e-9) -> bool:
    """``(1/d_in) sum_{a, lambda_in} P(a, lambda_out | x, lambda_in) == 1/d_out``."""
    marg = op.table.sum(axis=(0, 3)) / op.d_in
    return bool(np.max(np.abs(marg - 1 / op.d_out)) <= tol)


def _check_chain(op_a, res, op_b):
    if op_a.d_in != 1:
        raise ValueError("first party must have a trivial input")
    if op_b.d_out != 1:
        raise ValueError("second party must have a trivial output")
    if res.table.shape != (op_b.d_in, op_a.d_out):
        raise ValueError(
            f"resource shape {res.table.shape} does not connect "
            f"{op_a.d_out} outputs to {op_b.d_in} inputs")


def classical_correlations(op_a: ClassicalOperation, res: ClassicalResource,
                           op_b: ClassicalOperation) -> ProbabilityTable:
    """Correlations obtained by ``op_a`` then ``res`` then ``op_b``."""
    _check_chain(op_a, res, op_b)
    pa = op_a.table[:, :, :, 0]          # (a, lam_a, x)
    pb = op_b.table[:, 0, :, :]          # (b, y, lam_b)
    p = np.einsum("byl,lm,amx->xyab", pb, res.table, pa)
    return ProbabilityTable(("A", "B"),
                            (_outcome_values(op_a.n_outcomes), _outcome_values(op_b.n_outcomes)),
                            p)


@dataclass(frozen=True)
class LocalModel:
    """Shared randomness ``(lambda_B, lambda_A)`` plus local response functions."""

    shared: np.ndarray      # P(lambda_B, lambda_A)
    response_a: np.ndarray  # P(a | x, lambda_A), axes (a, x, lambda_A)
    response_b: np.ndarray  # P(b | y, lambda_B), axes (b, y, lambda_B)

    def correlations(self) -> np.ndarray:
        """``P(a, b | x, y)`` with axes ``(x, y, a, b)``."""
        return np.einsum("byl,lm,axm->xyab", self.response_b, self.shared, self.response_a)


def bell_factorization(op_a: ClassicalOperation, res: ClassicalResource,
                       op_b: ClassicalOperation, tol: float = 1e-9) -> LocalModel:
    """Rewrite unbiased classical temporal correlations as a local hidden-variable model.

    The uniform marginal of ``lambda_A`` implied by the no-bias condition
    is moved from Alice's operation into the shared distribution.
    """
    _check_chain(op_a, res, op_b)
    if not classical_is_unbiased(op_a, tol):
        raise BiasedOperationError("first party's operation is biased; no local model")
    d = op_a.d_out
    shared = res.table / d
    response_a = d * op_a.table[:, :, :, 0].transpose(0, 2, 1)
    response_b = op_b.table[:, 0, :, :]
    return LocalModel(shared, response_a, response_b)


def _best(values, absolute):
    best = np.max(values)
    if absolute:
        best = max(best, -np.min(values))
    return float(best)


def local_bound(f: InequalityFunctional, n_parties: int | None = None,
                n_settings: int | None = None) -> float:
    """Maximum of ``f`` over local deterministic +-1 strategies."""
    n_parties = n_parties or f.n_parties
    n_settings = n_settings or f.n_settings
    if n_parties != f.n_parties or n_settings < f.n_settings:
        raise ValueError("functional does not fit the requested scenario")
    bits = n_parties * n_settings
    if bits > MAX_STRATEGY_BITS:
        raise ValueError(f"{bits} deterministic bits exceeds the limit {MAX_STRATEGY_BITS}")
    idx = np.arange(2 ** bits)
    # bit k of the strategy index is party k // n_settings, setting k % n_settings
    outs = 1 - 2 * ((idx[:, None] >> np.arange(bits)) & 1)
    outs = outs.reshape(-1, n_parties, n_settings)
    values = np.zeros(len(idx))
    for xs, c in f.coefficients.items():
        term = np.ones(len(idx))
        for k, x in enumerate(xs):
            term = term * outs[:, k, x]
        values += c * term
    return _best(values, f.absolute)


def biseparable_bound(f: InequalityFunctional) -> float:
    """Maximum of a 3-party, 2-setting functional over biseparable strategies.

    For each bipartition the pair answers with an arbitrary deterministic
    function from their setting pair to an outcome pair (signalling inside
    the pair is allowed) and the remaining party answers deterministically.
    """
    if f.n_parties != 3 or f.n_settings > 2:
        raise ValueError("biseparable bound is defined for 3 parties with 2 settings")
    pairs = list(itertools.product((0, 1), repeat=2))
    outcome_pairs = list(itertools.product((1, -1), repeat=2))
    best = -np.inf
    for lone in range(3):
        pair = [k for k in range(3) if k != lone]
        for pair_strategy in itertools.product(outcome_pairs, repeat=len(pairs)):
            response = dict(zip(pairs, pair_strategy))
            for lone_strategy in itertools.product((1, -1), repeat=2):
                total = 0.0
                for xs, c in f.coefficients.items():
                    a, b = response[(xs[pair[0]], xs[pair[1]])]
                    total += c * a * b * lone_strategy[xs[lone]]
                best = max(best, abs(total) if f.absolute else total)
    return float(best)

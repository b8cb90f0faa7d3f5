"""Random states, channels, instruments and classical tables for testing."""

from __future__ import annotations

import numpy as np

from .classical import ClassicalOperation, ClassicalResource
from .operations import (CPMap, Instrument, POVM, choi_from_kraus,
                         povm_to_instrument)
from .tensor import Operator, SpaceLabel, inp, out


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(n, m=None, seed=None):
    rng = _rng(seed)
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def unitary(d, seed=None) -> np.ndarray:
    """Haar-random unitary via QR with phase fix."""
    q, r = np.linalg.qr(ginibre(d, seed=seed))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def ket(d, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def density_matrix(d, rank=None, seed=None) -> np.ndarray:
    g = ginibre(d, rank or d, seed=seed)
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def kraus_channel(d_in, d_out, n_kraus=2, seed=None) -> list[np.ndarray]:
    """Kraus operators of a random CPTP map (random isometry, cut into blocks)."""
    v = unitary(d_out * n_kraus, seed)[:, :d_in]
    return [v[k * d_out:(k + 1) * d_out] for k in range(n_kraus)]


def povm(d, n_outcomes=2, seed=None, label=None) -> POVM:
    """Random POVM from a random isometry ``d -> n_outcomes * d``."""
    rng = _rng(seed)
    v = unitary(n_outcomes * d, rng)[:, :d]
    els = []
    for k in range(n_outcomes):
        blk = v[k * d:(k + 1) * d]
        els.append(blk.conj().T @ blk)
    label = label or SpaceLabel("A", dimension=d)
    return POVM([Operator(e, [label]) for e in els])


def unbiased_instrument(party="A", d=2, n_outcomes=2, seed=None, setting=None) -> Instrument:
    """Random instrument satisfying the no-bias condition.

    Each branch mixes a measure-and-prepare map (random input basis, random
    output basis) with a weighted random unitary; both pieces are unital
    so the whole instrument maps the maximally mixed state to itself.
    """
    rng = _rng(seed)
    lin, lout = inp(party, d), out(party, d)
    basis_in = unitary(d, rng)
    basis_out = unitary(d, rng)
    q = rng.uniform(0, 0.5)
    weights = rng.dirichlet(np.ones(n_outcomes))
    groups = np.array_split(rng.permutation(d), n_outcomes) if n_outcomes <= d else None
    branches = []
    for a in range(n_outcomes):
        kraus = []
        if groups is not None:
            for j in groups[a]:
                k = np.outer(basis_out[:, j], basis_in[:, j].conj())
                kraus.append(np.sqrt(1 - q) * k)
        u = unitary(d, rng)
        kraus.append(np.sqrt(q * weights[a]) * u)
        if groups is None:
            kraus[-1] = np.sqrt(weights[a]) * u
        branches.append(choi_from_kraus(kraus, lin, lout))
    return Instrument(branches, setting=setting)


def unbiased_preparation(party="A", d=2, n_outcomes=2, seed=None) -> Instrument:
    """Random trivial-input instrument with branches summing to ``1 / d``.

    Built as a random POVM mapped to a preparation (branches ``E_a / d``).
    """
    e = povm(d, n_outcomes, seed, label=out(party, d))
    return povm_to_instrument(e, d, party=party)


def measurement(party="B", d=2, n_outcomes=2, seed=None) -> Instrument:
    e = povm(d, n_outcomes, seed, label=inp(party, d))
    return povm_to_instrument(e, 1, party=party)


def channel_map(d_in, d_out, n_kraus=2, seed=None, labels=None) -> CPMap:
    lin, lout = labels or (SpaceLabel("in", dimension=d_in), SpaceLabel("out", dimension=d_out))
    return choi_from_kraus(kraus_channel(d_in, d_out, n_kraus, seed), lin, lout)


def _simplex(rng, shape, n):
    return rng.dirichlet(np.ones(n), size=shape)


def unbiased_classical_preparation(n_outcomes=2, d_out=2, n_settings=2,
                                   seed=None) -> ClassicalOperation:
    """Trivial-input operation with ``sum_a P(a, lambda | x) = 1 / d_out``."""
    rng = _rng(seed)
    p = _simplex(rng, (d_out, n_settings), n_outcomes) / d_out   # (lam, x, a)
    return ClassicalOperation(p.transpose(2, 0, 1)[..., None])


def classical_measurement(n_outcomes=2, d_in=2, n_settings=2, seed=None) -> ClassicalOperation:
    rng = _rng(seed)
    p = _simplex(rng, (n_settings, d_in), n_outcomes)              # (x, lam, b)
    return ClassicalOperation(p.transpose(2, 0, 1)[:, None])


def classical_resource(d_in, d_out, seed=None) -> ClassicalResource:
    """Random channel ``P(lambda_B | lambda_A)`` with Dirichlet columns."""
    rng = _rng(seed)
    return ClassicalResource(_simplex(rng, (d_out,), d_in).T)

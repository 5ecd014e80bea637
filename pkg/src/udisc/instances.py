"""Seeded random test instances: states, channels, ensembles and protocols."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .linalg import hermitize, proj


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_unitary(d: int, seed=None) -> np.ndarray:
    if d == 1:
        return np.ones((1, 1), dtype=complex)
    rng = rng_from(seed)
    return unitary_group.rvs(d, random_state=rng)


def haar_isometry(d_in: int, d_out: int, seed=None) -> np.ndarray:
    """``d_out x d_in`` isometry: the first ``d_in`` columns of a Haar unitary."""
    return haar_unitary(d_out, seed)[:, :d_in]


def haar_pure_state(d: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return proj(v / np.linalg.norm(v))


def random_state(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Induced-measure mixed state of the given rank (full rank by default)."""
    rng = rng_from(seed)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return hermitize(rho / np.trace(rho).real)


def random_hermitian(d: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return hermitize(g)


def random_trace_one_hermitian(d: int, seed=None) -> np.ndarray:
    h = random_hermitian(d, seed)
    t = np.trace(h).real
    return h + (1 - t) / d * np.eye(d)


def random_kraus(d_in: int, d_out: int, rank: int = 2, seed=None) -> list[np.ndarray]:
    """Kraus operators of a channel induced by a Haar isometry into ``B (x) E``."""
    v = haar_isometry(d_in, d_out * rank, seed)
    # rows are ordered as (b, e) with e fastest
    v = v.reshape(d_out, rank, d_in)
    return [v[:, j, :] for j in range(rank)]


def random_channel(d_in: int, d_out: int | None = None, rank: int = 2, seed=None):
    from .channels import Channel

    d_out = d_in if d_out is None else d_out
    return Channel(random_kraus(d_in, d_out, rank, seed))


def random_ensemble(k: int, d: int, seed=None, rank: int | None = None):
    from .stategame import Ensemble

    rng = rng_from(seed)
    states = [random_state(d, rank, rng) for _ in range(k)]
    priors = rng.dirichlet(np.ones(k))
    priors = np.maximum(priors, 1e-3)
    return Ensemble(tuple(states), tuple(priors / priors.sum()))

"""Channels, Choi operators, the geometric channel divergence and adaptive protocols.

Choi operators put the input system first: ``J = sum_ij |i><j| (x) N(|i><j|)``.
Divergence formulas use this unnormalized form, for which ``tr_B J = I_A``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import sdp
from .divergences import _compress, _pos_power, add_geometric_cascade, cascade_level
from .instances import haar_pure_state, random_kraus, rng_from
from .linalg import (
    SUPPORT_TOL,
    DimensionMismatch,
    DomainError,
    as_state,
    hermitize,
    intersect_supports,
    max_entangled,
    operator_norm,
    partial_trace,
    support_basis,
    support_contains,
)
from .stategame import Ensemble, GameConfig, _additive_term, succ_prob_primal

TP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Channel:
    kraus: tuple

    def __post_init__(self):
        ks = tuple(np.atleast_2d(np.asarray(k, dtype=complex)) for k in self.kraus)
        if not ks:
            raise DomainError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise DimensionMismatch("Kraus operators have different shapes")
        s = sum(k.conj().T @ k for k in ks)
        if np.max(np.abs(s - np.eye(shape[1]))) > TP_TOL:
            raise DomainError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ks)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return hermitize(sum(k @ rho @ k.conj().T for k in self.kraus))

    def on_second(self, rho, d_ref: int) -> np.ndarray:
        """``(id_R (x) N)(rho)`` for ``rho`` on ``R (x) A``."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (d_ref * self.dim_in,) * 2:
            raise DimensionMismatch(f"state of shape {rho.shape} does not fit R={d_ref}, A={self.dim_in}")
        eye = np.eye(d_ref)
        return hermitize(sum(np.kron(eye, k) @ rho @ np.kron(eye, k).conj().T for k in self.kraus))

    @cached_property
    def choi_unnormalized(self) -> np.ndarray:
        phi = np.eye(self.dim_in).reshape(-1)
        vecs = [np.kron(np.eye(self.dim_in), k) @ phi for k in self.kraus]
        return hermitize(sum(np.outer(v, v.conj()) for v in vecs))

    def choi(self, normalized: bool = False) -> np.ndarray:
        j = self.choi_unnormalized
        return j / self.dim_in if normalized else j.copy()


def choi(ch: Channel, normalized: bool = False) -> np.ndarray:
    return ch.choi(normalized)


def apply_choi(j, rho, d_in: int, d_out: int) -> np.ndarray:
    """``N(rho) = tr_A[(rho^T (x) I) J]`` for an unnormalized Choi operator."""
    rho = np.asarray(rho, dtype=complex)
    return hermitize(partial_trace(np.kron(rho.T, np.eye(d_out)) @ j, (d_in, d_out), keep="B"))


def identity_channel(d: int = 2) -> Channel:
    return Channel([np.eye(d)])


def unitary_channel(u) -> Channel:
    return Channel([np.asarray(u, dtype=complex)])


def depolarizing(q: float, d: int = 2) -> Channel:
    """``rho -> (1 - q) rho + q tr(rho) I/d``."""
    if not 0 <= q <= 1 + 1 / (d * d - 1):
        raise DomainError("depolarizing parameter out of range")
    ops = [np.sqrt(max(0.0, 1 - q + q / d**2)) * np.eye(d)]
    w = np.sqrt(q) / d
    for a in range(d):
        for b in range(d):
            if a == 0 and b == 0:
                continue
            shift = np.roll(np.eye(d), a, axis=0)
            clock = np.diag(np.exp(2j * np.pi * b * np.arange(d) / d))
            ops.append(w * shift @ clock)
    return Channel(ops)


def bit_flip(p: float) -> Channel:
    x = np.array([[0, 1], [1, 0]])
    return Channel([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * x])


def amplitude_damping(g: float) -> Channel:
    return Channel([np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]])])


def _check_pair(channels):
    d_in, d_out = channels[0].dim_in, channels[0].dim_out
    if any((c.dim_in, c.dim_out) != (d_in, d_out) for c in channels):
        raise DimensionMismatch("channels have different input/output dimensions")
    return d_in, d_out


def channel_geometric_renyi(n_ch: Channel, m_ch: Channel, alpha: float, tol: float = SUPPORT_TOL) -> float:
    """Geometric Renyi divergence between channels from their Choi operators."""
    if not 1 < alpha <= 2:
        raise DomainError("alpha must lie in (1, 2]")
    d_in, d_out = _check_pair([n_ch, m_ch])
    jn, jm = n_ch.choi_unnormalized, m_ch.choi_unnormalized
    if not support_contains(jm, jn, tol):
        return np.inf
    v = support_basis(jm, tol)
    m = _compress(jm, v)
    m_half, m_ihalf = _pos_power(m, 0.5), _pos_power(m, -0.5)
    t = hermitize(m_ihalf @ _compress(jn, v) @ m_ihalf)
    inner = m_half @ _pos_power(t, alpha) @ m_half
    full = v @ inner @ v.conj().T
    return float(np.log(operator_norm(partial_trace(full, (d_in, d_out), keep="A"))) / (alpha - 1))


@dataclass
class ChannelSdpResult:
    value: float
    J_T: np.ndarray | None
    lam: float
    gap: float = np.nan
    iterations: int = 0

    def __iter__(self):
        return iter((self.value, self.J_T))


def channel_radius_sdp(
    channels: Sequence[Channel],
    alpha: float | None = None,
    l: int | None = None,
    fixed: np.ndarray | None = None,
) -> ChannelSdpResult:
    """``inf_T max_x`` geometric channel divergence at ``alpha = 1 + 2^-l``.

    ``T`` ranges over channels, represented by an unnormalized Choi operator
    confined to the common support of the ``J_{N_x}``. With ``fixed`` the
    Choi operator of ``T`` is pinned to the given matrix.
    """
    if l is None:
        l = cascade_level(alpha)
    if l < 0:
        raise DomainError("l must be a nonnegative integer")
    channels = list(channels)
    d_in, d_out = _check_pair(channels)
    chois = [c.choi_unnormalized for c in channels]
    vs = intersect_supports(chois)
    if vs.shape[1] == 0:
        return ChannelSdpResult(np.inf, None, np.inf)
    rs = vs.shape[1]
    p = sdp.SdpProblem()
    if fixed is None:
        jt = p.variable("J_T", rs, "psd")
        p.add_eq((vs @ jt @ vs.conj().T).partial_trace((d_in, d_out), "A"), np.eye(d_in), name="trace-preserving")
    else:
        fixed = hermitize(np.asarray(fixed, dtype=complex))
        if fixed.shape != chois[0].shape:
            raise DimensionMismatch("pinned Choi operator has the wrong shape")
        inside = np.linalg.norm(fixed - vs @ vs.conj().T @ fixed @ vs @ vs.conj().T)
        if inside > 1e-8 * max(1.0, np.linalg.norm(fixed)):
            return ChannelSdpResult(np.inf, fixed, np.inf)
        jt = _compress(fixed, vs)
        # pinned operators may be singular inside the face; shrink to their own support
        vf = support_basis(jt)
        vs = vs @ vf
        jt = _compress(jt, vf)
        rs = vs.shape[1]
    lam = p.variable("lambda", kind="real")
    for x, j in enumerate(chois):
        vx = support_basis(j)
        m = add_geometric_cascade(p, jt, _compress(j, vx), vs.conj().T @ vx, l, f"x{x}_")
        p.add_psd(
            sdp.kron_scalar(lam, d_in) - (vs @ m @ vs.conj().T).partial_trace((d_in, d_out), "A"),
            name=f"norm{x}",
        )
    p.minimize(lam)
    try:
        sol = sdp.solve(p)
    except sdp.Infeasible:
        return ChannelSdpResult(np.inf, None, np.inf)
    lam_v = sol.primal_value
    j_full = fixed if fixed is not None else hermitize(vs @ sol.blocks["J_T"] @ vs.conj().T)
    return ChannelSdpResult(float(2**l * np.log(lam_v)), j_full, lam_v, sol.gap, sol.iterations)


def channel_exponent_bound(
    channels: Sequence[Channel],
    priors: Sequence[float],
    eta: float,
    n: int,
    alpha: float,
) -> float:
    """Upper bound on ``-(1/n) ln(1 - p_succ^(n))`` for adaptive protocols."""
    if n < 1:
        raise DomainError("n must be positive")
    if len(priors) != len(channels):
        raise DimensionMismatch("one prior per channel is required")
    dummy = Ensemble.uniform([np.eye(1)] * len(channels))
    e = Ensemble(dummy.states, tuple(priors))
    term = _additive_term(e, eta)
    if not np.isfinite(term):
        return np.inf
    value = channel_radius_sdp(channels, alpha).value
    if not np.isfinite(value):
        return np.inf
    return float(value - alpha / (n * (alpha - 1)) * term)


# -- adaptive protocols --------------------------------------------------------------


@dataclass
class AdaptiveProtocol:
    """``tau_RA``, then ``n - 1`` processing channels on ``R (x) B -> R (x) A``."""

    n: int
    tau_RA: np.ndarray
    d_ref: int
    adapters: list = field(default_factory=list)
    final_povm: list | None = None

    def __post_init__(self):
        self.tau_RA = as_state(self.tau_RA)
        if self.n < 1:
            raise DomainError("a protocol needs at least one round")
        if len(self.adapters) != self.n - 1:
            raise DimensionMismatch(f"{self.n} rounds need {self.n - 1} adapters")
        if self.tau_RA.shape[0] % self.d_ref:
            raise DimensionMismatch("tau_RA dimension is not a multiple of d_ref")

    @property
    def d_in(self) -> int:
        return self.tau_RA.shape[0] // self.d_ref


@dataclass
class ProtocolTrace:
    rho: list  # rho[x][i]: state before the i-th channel use
    sigma: list  # sigma[x][i]: state after it

    @property
    def final_states(self) -> list:
        return [s[-1] for s in self.sigma]


def simulate_protocol(p: AdaptiveProtocol, channels: Sequence[Channel]) -> ProtocolTrace:
    d_in, d_out = _check_pair(list(channels))
    if p.d_in != d_in:
        raise DimensionMismatch(f"protocol feeds dimension {p.d_in}, channels take {d_in}")
    for a in p.adapters:
        if (a.dim_in, a.dim_out) != (p.d_ref * d_out, p.d_ref * d_in):
            raise DimensionMismatch("adapter does not map R(x)B to R(x)A")
    rhos, sigmas = [], []
    for ch in channels:
        rho = p.tau_RA
        rs, ss = [], []
        for i in range(p.n):
            rs.append(rho)
            sigma = ch.on_second(rho, p.d_ref)
            ss.append(sigma)
            if i < p.n - 1:
                rho = p.adapters[i](sigma)
        rhos.append(rs)
        sigmas.append(ss)
    return ProtocolTrace(rhos, sigmas)


def protocol_success(trace: ProtocolTrace, priors: Sequence[float], eta: float) -> float:
    """Best success probability of a final measurement with abstention ``>= eta I``."""
    finals = [hermitize(s / np.trace(s).real) for s in trace.final_states]
    e = Ensemble(tuple(finals), tuple(priors))
    return succ_prob_primal(e, GameConfig(eta=eta)).success_probability


def random_protocol(n: int, d_in: int, d_out: int, d_ref: int = 2, seed=None, rank: int = 2) -> AdaptiveProtocol:
    """Haar-random pure ``tau_RA`` and isometry-induced processing channels."""
    if d_ref > 4:
        raise DomainError("reference dimension is limited to 4")
    rng = rng_from(seed)
    tau = haar_pure_state(d_ref * d_in, rng)
    adapters = [Channel(random_kraus(d_ref * d_out, d_ref * d_in, rank, rng)) for _ in range(n - 1)]
    return AdaptiveProtocol(n, tau, d_ref, adapters)


def channel_radius_sequence(channels: Sequence[Channel], l_max: int = 3):
    """Channel SDP values at ``alpha = 1 + 2^-l`` for ``l = 1..l_max``.

    Returns ``([(alpha, value), ...], value at l_max)``; the last entry is the
    tightest computable upper bound as ``alpha`` decreases towards 1.
    """
    if not 1 <= l_max <= 3:
        raise DomainError("l_max must lie in 1..3")
    seq = []
    for l in range(1, l_max + 1):
        seq.append((1 + 2.0**-l, channel_radius_sdp(channels, l=l).value))
    return seq, seq[-1][1]


def max_entangled_input(d: int) -> np.ndarray:
    return max_entangled(d, normalized=True)


__all__ = [
    "AdaptiveProtocol",
    "Channel",
    "ChannelSdpResult",
    "ProtocolTrace",
    "amplitude_damping",
    "apply_choi",
    "bit_flip",
    "channel_geometric_renyi",
    "choi",
    "channel_radius_sequence",
    "depolarizing",
    "identity_channel",
    "max_entangled_input",
    "protocol_success",
    "random_protocol",
    "simulate_protocol",
    "channel_exponent_bound",
    "channel_radius_sdp",
    "unitary_channel",
]

"""The state discrimination game with a guaranteed abstention weight.

A player measures one of ``k`` states ``rho_x`` (prior ``p_x``) with a POVM
``{Q_0, Q_1, ..., Q_k}`` whose abstention element obeys ``Q_0 >= eta I`` and
scores when outcome ``x`` matches the prepared state.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import sdp
from .divergences import gamma_eps, radius
from .linalg import DimensionMismatch, DomainError, as_state, clamp_psd, hermitize, proj, ket, tensor

PRIOR_TOL = 1e-10
# game programs are tiny; solving past the library defaults leaves headroom for 1e-9 checks
SOLVE_OPTS = {"gap_tol": 1e-10, "kkt_tol": 1e-9}


def _solve(p: sdp.SdpProblem) -> sdp.SdpSolution:
    """Solve tightly; if the iterates stall short of that, settle for the default tolerances."""
    try:
        return sdp.solve(p, **SOLVE_OPTS)
    except sdp.MaxIters:
        return sdp.solve(p)


@dataclass(frozen=True)
class Ensemble:
    states: tuple
    priors: tuple

    def __post_init__(self):
        states = tuple(as_state(r) for r in self.states)
        priors = tuple(float(p) for p in self.priors)
        if not states:
            raise DomainError("an ensemble needs at least one state")
        d = states[0].shape[0]
        if any(r.shape != (d, d) for r in states):
            raise DimensionMismatch("states have different dimensions")
        if len(priors) != len(states):
            raise DimensionMismatch("one prior per state is required")
        if any(p <= 0 for p in priors) or abs(sum(priors) - 1) > PRIOR_TOL:
            raise DomainError("priors must be positive and sum to 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "priors", priors)

    @classmethod
    def uniform(cls, states: Sequence) -> "Ensemble":
        return cls(tuple(states), tuple([1.0 / len(states)] * len(states)))

    @property
    def k(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def copies(self, n: int) -> "Ensemble":
        """The ensemble of ``n``-fold tensor powers."""
        return Ensemble(tuple(tensor(*([r] * n)) for r in self.states), self.priors)


@dataclass(frozen=True)
class GameConfig:
    eta: float = 0.0
    alpha: float = 2.0
    n_copies: int = 1

    def __post_init__(self):
        if not 0 <= self.eta < 1:
            raise DomainError("eta must lie in [0, 1)")
        if self.n_copies < 1:
            raise DomainError("n_copies must be positive")


@dataclass
class GameResult:
    success_probability: float
    optimal_povm: list
    dual_certificate: np.ndarray
    gap: float
    primal_value: float = np.nan
    dual_value: float = np.nan
    iterations: int = 0

    @property
    def abstention(self) -> np.ndarray:
        d = self.dual_certificate.shape[0]
        return np.eye(d) - sum(self.optimal_povm)


def succ_prob_primal(e: Ensemble, cfg: GameConfig = GameConfig()) -> GameResult:
    """Optimal success probability from the POVM program."""
    d = e.dim
    p = sdp.SdpProblem()
    qs = [p.variable(f"Q{x}", d, "psd") for x in range(e.k)]
    p.add_psd((1 - cfg.eta) * np.eye(d) - sum(qs[1:], qs[0]), name="budget")
    p.maximize(sum((pr * sdp.inner(r, q) for pr, r, q in zip(e.priors, e.states, qs)), sdp.Affine(0)))
    sol = _solve(p)
    povm = [clamp_psd(sol.blocks[f"Q{x}"], 1e-6) for x in range(e.k)]
    value = float(sum(pr * np.trace(r @ q).real for pr, r, q in zip(e.priors, e.states, povm)))
    return GameResult(
        success_probability=min(1.0, max(0.0, value)),
        optimal_povm=povm,
        dual_certificate=hermitize(sol.duals["budget"]),
        gap=sol.gap,
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        iterations=sol.iterations,
    )


def succ_prob_dual(e: Ensemble, cfg: GameConfig = GameConfig()) -> GameResult:
    """Optimal success probability from ``min (1-eta) tr M`` with ``M >= p_x rho_x``."""
    d = e.dim
    p = sdp.SdpProblem()
    m = p.variable("M", d, "herm")
    for x, (pr, r) in enumerate(zip(e.priors, e.states)):
        p.add_psd(m - pr * r, name=f"dominate{x}")
    p.minimize((1 - cfg.eta) * sdp.trace(m))
    sol = _solve(p)
    povm = [clamp_psd(hermitize(sol.duals[f"dominate{x}"]), 1e-6) for x in range(e.k)]
    return GameResult(
        success_probability=min(1.0, max(0.0, sol.primal_value)),
        optimal_povm=povm,
        dual_certificate=hermitize(sol.blocks["M"]),
        gap=sol.gap,
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        iterations=sol.iterations,
    )


def cq_state(ops: Sequence, weights: Sequence) -> np.ndarray:
    """``sum_x w_x |x><x| (x) A_x`` with the register first."""
    k = len(ops)
    return sum(w * np.kron(proj(ket(x, k)), a) for x, (w, a) in enumerate(zip(weights, ops)))


def hypothesis_test_certificate(e: Ensemble, cfg: GameConfig = GameConfig()):
    """``(tau_hat, gamma)`` with ``tau_hat`` the normalized dual optimizer.

    ``gamma`` is the hypothesis-testing quantity between the uniform
    register times ``tau_hat`` and the classical-quantum encoding of the
    ensemble at ``eps = (1 - eta)/k``; it reproduces the success probability.
    """
    res = succ_prob_dual(e, cfg)
    m = res.dual_certificate
    tau_hat = hermitize(m / np.trace(m).real)
    eps = (1 - cfg.eta) / e.k
    first = cq_state([tau_hat] * e.k, [1.0 / e.k] * e.k)
    second = cq_state(e.states, e.priors)
    second = hermitize(second / np.trace(second).real)
    return tau_hat, gamma_eps(first, second, eps)


def _additive_term(e: Ensemble, eta: float) -> float:
    """``ln p_min + ln(k - 1 + eta)``; ``-inf`` when ``k = 1`` and ``eta = 0``."""
    s = e.k - 1 + eta
    if s <= 0:
        return -np.inf
    return float(np.log(min(e.priors)) + np.log(s))


def radius_exponent_bound(e: Ensemble, cfg: GameConfig = GameConfig(), n: int = 1, **radius_kw) -> float:
    """Upper bound on ``-(1/n) ln(1 - P_succ)`` from the sandwiched radius.

    ``n`` counts copies of each state; the single-copy radius bounds the
    ``n``-copy one through additivity, so only the additive term is scaled.
    """
    a = cfg.alpha
    if not a > 1:
        raise DomainError("alpha must exceed 1")
    term = _additive_term(e, cfg.eta)
    if not np.isfinite(term):
        return np.inf
    r = radius(e.states, "sandwiched", a, **radius_kw).value
    if not np.isfinite(r):
        return np.inf
    return float(r - a / (n * (a - 1)) * term)


def radius_exponent_details(e: Ensemble, cfg: GameConfig = GameConfig()) -> dict:
    """Bound ingredients, including the radius over trace-one Hermitian centers."""
    a = cfg.alpha
    states_r = radius(e.states, "sandwiched", a)
    out = {"radius_states": states_r.value, "additive_term": _additive_term(e, cfg.eta)}
    if np.isfinite(states_r.value) and e.k > 1:
        out["radius_hermitian"] = radius(e.states, "sandwiched", a, hermitian_domain=True).value
    else:
        out["radius_hermitian"] = states_r.value
    out["bound"] = (
        states_r.value - a / (a - 1) * out["additive_term"]
        if np.isfinite(out["additive_term"])
        else np.inf
    )
    return out


def asymptotic_state_bound(e: Ensemble | Sequence) -> float:
    """The Umegaki radius, which bounds the error exponent as copies grow."""
    states = e.states if isinstance(e, Ensemble) else e
    return radius(states, "umegaki").value


def exponent(p_succ: float, n: int = 1) -> float:
    """``-(1/n) ln(1 - p)``."""
    if p_succ >= 1.0:
        return np.inf
    return float(-np.log1p(-p_succ) / n)


# -- q_re and the classical comparison ------------------------------------------


@dataclass
class QreResult:
    value: float
    dual_value: float
    P: np.ndarray
    Y: list = field(default_factory=list)
    gap: float = 0.0

    def __iter__(self):
        return iter((self.value, self.P, self.Y))


def _check_psd_family(ops):
    ops = [clamp_psd(hermitize(np.asarray(q, dtype=complex))) for q in ops]
    d = ops[0].shape[0]
    if any(q.shape != (d, d) for q in ops):
        raise DimensionMismatch("operators have different dimensions")
    return ops, d


def q_re(ops: Sequence) -> QreResult:
    """Smallest ``tr P`` with ``P >= Q_x`` for all ``x``, solved in both forms."""
    ops, d = _check_psd_family(ops)
    p = sdp.SdpProblem()
    P = p.variable("P", d, "herm")
    for x, q in enumerate(ops):
        p.add_psd(P - q, name=f"dominate{x}")
    p.minimize(sdp.trace(P))
    primal = _solve(p)
    value, ys, dual_value = _qre_dual(ops, d, 0.0)
    return QreResult(
        value=primal.primal_value,
        dual_value=dual_value,
        P=hermitize(primal.blocks["P"]),
        Y=ys,
        gap=abs(primal.primal_value - dual_value),
    )


def _qre_dual(ops, d, eta):
    p = sdp.SdpProblem()
    ys = [p.variable(f"Y{x}", d, "psd") for x in range(len(ops))]
    p.add_psd((1 - eta) * np.eye(d) - sum(ys[1:], ys[0]), name="budget")
    p.maximize(sum((sdp.inner(q, y) for q, y in zip(ops, ys)), sdp.Affine(0)))
    sol = _solve(p)
    return sol.primal_value, [hermitize(sol.blocks[f"Y{x}"]) for x in range(len(ops))], sol.primal_value


def qre_eta_program(ops: Sequence, eta: float) -> float:
    """``max sum_x tr(Y_x Q_x)`` subject to ``sum_x Y_x <= (1 - eta) I``."""
    ops, d = _check_psd_family(ops)
    return _qre_dual(ops, d, eta)[0]


def eta_star(ops: Sequence) -> float:
    """``1 - ||sum_x Y_x||`` at the dual optimizer of :func:`q_re`, clipped to ``[0, 1)``."""
    res = q_re(ops)
    norm = float(np.linalg.norm(sum(res.Y), 2))
    return float(min(max(0.0, 1.0 - norm), 1.0 - 1e-12))


def classical_success(priors: Sequence, eta: float) -> float:
    if not 0 <= eta <= 1:
        raise DomainError("eta must lie in [0, 1]")
    return float((1 - eta) * max(priors))


def advantage_ratio(states: Sequence, eta: float, priors: Sequence | None = None):
    """``(P_q / P_c, q_re)``; uniform priors unless ``priors`` is given."""
    states = [as_state(r) for r in states]
    star = eta_star(states)
    if eta < star - 1e-6:
        warnings.warn(f"eta={eta} lies below eta_*={star:.6g}", RuntimeWarning, stacklevel=2)
    e = Ensemble.uniform(states) if priors is None else Ensemble(tuple(states), tuple(priors))
    pq = succ_prob_primal(e, GameConfig(eta=eta)).success_probability
    return pq / classical_success(e.priors, eta), q_re(states).value

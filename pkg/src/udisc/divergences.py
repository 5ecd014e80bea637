"""State divergences, the hypothesis-testing quantities and divergence radii.

All logarithms are natural. Divergences take the value ``+inf`` when the
support condition of their definition fails.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import sdp
from .linalg import (
    SUPPORT_TOL,
    DimensionMismatch,
    DomainError,
    as_operator,
    as_state,
    as_trace_one,
    clamp_psd,
    divided_differences,
    hermitize,
    intersect_supports,
    support_basis,
    support_contains,
    support_projector,
)

DIVERGENCES = ("sandwiched", "geometric", "umegaki", "bs")


class SupportEmpty(DomainError):
    """The states share no common support vector, so every center diverges."""


@dataclass(frozen=True)
class DivergenceParams:
    alpha: float = 2.0
    epsilon: float = 0.1
    support_tol: float = SUPPORT_TOL

    def check(self, kind: str) -> "DivergenceParams":
        if kind == "sandwiched" and not self.alpha > 1:
            raise DomainError("sandwiched divergence needs alpha > 1")
        if kind == "geometric" and not 1 < self.alpha <= 2:
            raise DomainError("geometric divergence needs alpha in (1, 2]")
        if not 0 < self.epsilon < 1:
            raise DomainError("epsilon must lie in (0, 1)")
        return self


@dataclass
class RadiusResult:
    value: float
    optimizer_tau: np.ndarray | None
    per_state_divergences: list
    iterations: int
    method: str = ""
    diagnostics: dict = field(default_factory=dict)


# -- small spectral helpers on already validated matrices ---------------------


def _eigh(h):
    lam, v = np.linalg.eigh(hermitize(h))
    return lam, v


def _fn(h, f):
    lam, v = _eigh(h)
    return (v * f(lam)) @ v.conj().T


def _pos_power(h, p):
    return _fn(h, lambda x: np.maximum(x, 0.0) ** p)


def _compress(op, basis):
    return hermitize(basis.conj().T @ op @ basis)


def _frechet(h, f, df, e):
    """Frechet derivative ``Df_h[e]`` via divided differences."""
    lam, v = _eigh(h)
    dd = divided_differences(lam, f, df)
    dd = np.where(np.isfinite(dd), dd, 0.0)
    return v @ (dd * (v.conj().T @ e @ v)) @ v.conj().T


# -- hypothesis testing ---------------------------------------------------------


def _gamma_is_one(rho, sigma, eps, tol) -> bool:
    """Exact test for ``gamma_eps = 1``.

    ``tr(Q sigma) = 1`` with ``0 <= Q <= I`` forces ``Q = P_sigma + Q'`` with
    ``Q'`` living on ``ker(sigma)``; the cheapest such ``Q`` keeps ``tr(Q rho)``
    at ``tr(P_sigma rho) + tr((P_ker rho P_ker)_-)``.
    """
    p_supp = support_projector(sigma, tol)
    p_ker = np.eye(sigma.shape[0]) - p_supp
    lam = np.linalg.eigvalsh(hermitize(p_ker @ rho @ p_ker))
    cost = float(np.trace(p_supp @ rho).real) + float(np.sum(lam[lam < 0]))
    return cost <= eps + 1e-12


def optimal_test(rho, sigma, eps: float, tol: float = SUPPORT_TOL):
    """``(gamma_eps, Q)``: largest ``tr(Q sigma)`` with ``tr(Q rho) <= eps``, ``0 <= Q <= I``."""
    rho = as_trace_one(rho)
    sigma = as_state(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"{rho.shape} vs {sigma.shape}")
    DivergenceParams(epsilon=eps).check("")
    d = rho.shape[0]
    p = sdp.SdpProblem()
    Q = p.variable("Q", d, "psd")
    p.add_psd(np.eye(d) - Q, name="Q<=I")
    p.add_le(sdp.inner(rho, Q), eps, name="type-I")
    p.maximize(sdp.inner(sigma, Q))
    sol = sdp.solve(p)
    value = min(1.0, max(0.0, sol.primal_value))
    if _gamma_is_one(rho, sigma, eps, tol):
        value = 1.0
    return value, sol.blocks["Q"]


def gamma_eps(rho, sigma, eps: float, tol: float = SUPPORT_TOL) -> float:
    return optimal_test(rho, sigma, eps, tol)[0]


def beta_eps(rho, sigma, eps: float) -> float:
    """Smallest ``tr(Q sigma)`` over tests with ``tr(Q rho) >= 1 - eps`` (states only)."""
    rho = as_state(rho)
    sigma = as_state(sigma)
    DivergenceParams(epsilon=eps).check("")
    d = rho.shape[0]
    p = sdp.SdpProblem()
    Q = p.variable("Q", d, "psd")
    p.add_psd(np.eye(d) - Q)
    p.add_ge(sdp.inner(rho, Q), 1 - eps)
    p.minimize(sdp.inner(sigma, Q))
    return max(0.0, sdp.solve(p).primal_value)


def hypothesis_testing_divergence(rho, sigma, eps: float) -> float:
    g = gamma_eps(rho, sigma, eps)
    if g >= 1.0:
        return np.inf
    return float(-np.log1p(-g))


# -- Renyi-type divergences -----------------------------------------------------


def _sandwich_parts(beta, sigma, alpha, tol):
    """Support basis of ``sigma`` and ``Gamma beta Gamma`` with ``Gamma = sigma^((1-a)/(2a))``."""
    v = support_basis(sigma, tol)
    s = _compress(sigma, v)
    gamma = _pos_power(s, (1 - alpha) / (2 * alpha))
    return v, gamma, hermitize(gamma @ _compress(beta, v) @ gamma)


def sandwiched_renyi(beta, sigma, alpha: float, tol: float = SUPPORT_TOL) -> float:
    """Sandwiched Renyi divergence; ``beta`` may be any trace-one Hermitian operator."""
    beta = as_trace_one(beta)
    sigma = clamp_psd(as_operator(sigma), tol)
    DivergenceParams(alpha=alpha).check("sandwiched")
    if not support_contains(sigma, beta, tol):
        return np.inf
    _, _, a = _sandwich_parts(beta, sigma, alpha, tol)
    q = float(np.sum(np.abs(np.linalg.eigvalsh(a)) ** alpha))
    return float(np.log(q) / (alpha - 1))


def _geometric_parts(rho, sigma, tol):
    v = support_basis(sigma, tol)
    s = _compress(sigma, v)
    s_isqrt = _pos_power(s, -0.5)
    t = hermitize(s_isqrt @ _compress(rho, v) @ s_isqrt)
    return s, s_isqrt, t


def geometric_renyi(rho, sigma, alpha: float, tol: float = SUPPORT_TOL) -> float:
    """``ln tr[sigma (sigma^-1/2 rho sigma^-1/2)^alpha] / (alpha - 1)``."""
    rho = clamp_psd(as_operator(rho), tol)
    sigma = clamp_psd(as_operator(sigma), tol)
    DivergenceParams(alpha=alpha).check("geometric")
    if not support_contains(sigma, rho, tol):
        return np.inf
    s, _, t = _geometric_parts(rho, sigma, tol)
    q = float(np.trace(s @ _pos_power(t, alpha)).real)
    return float(np.log(q) / (alpha - 1))


def umegaki(rho, sigma, tol: float = SUPPORT_TOL) -> float:
    rho = clamp_psd(as_operator(rho), tol)
    sigma = clamp_psd(as_operator(sigma), tol)
    if not support_contains(sigma, rho, tol):
        return np.inf
    v = support_basis(sigma, tol)
    r, s = _compress(rho, v), _compress(sigma, v)
    lam = np.linalg.eigvalsh(r)
    lam = lam[lam > tol * max(1.0, lam.max())]
    ent = float(np.sum(lam * np.log(lam)))
    return float(ent - np.trace(r @ _fn(s, np.log)).real)


def belavkin_staszewski(rho, sigma, tol: float = SUPPORT_TOL) -> float:
    """``tr[rho ln(rho^1/2 sigma^-1 rho^1/2)]`` on the support of ``rho``."""
    rho = clamp_psd(as_operator(rho), tol)
    sigma = clamp_psd(as_operator(sigma), tol)
    if not support_contains(sigma, rho, tol):
        return np.inf
    _, _, t = _geometric_parts(rho, sigma, tol)
    s = _compress(sigma, support_basis(sigma, tol))
    lam, v = _eigh(t)
    with np.errstate(all="ignore"):
        g = np.where(lam > tol * max(1.0, lam.max()), lam * np.log(np.maximum(lam, 1e-300)), 0.0)
    return float(np.trace(s @ (v * g) @ v.conj().T).real)


def divergence(kind: str, rho, sigma, alpha: float | None = None) -> float:
    """Dispatch on ``kind`` in ``("sandwiched", "geometric", "umegaki", "bs")``."""
    if kind == "sandwiched":
        return sandwiched_renyi(rho, sigma, alpha)
    if kind == "geometric":
        return geometric_renyi(rho, sigma, alpha)
    if kind == "umegaki":
        return umegaki(rho, sigma)
    if kind == "bs":
        return belavkin_staszewski(rho, sigma)
    raise ValueError(f"unknown divergence {kind!r}")


# -- geometric cascade SDPs -------------------------------------------------------


def cascade_level(alpha: float) -> int:
    """``l`` with ``alpha = 1 + 2**-l``; raises if alpha is not of that form."""
    l = -np.log2(alpha - 1) if alpha > 1 else np.nan
    if not np.isfinite(l) or abs(l - round(l)) > 1e-12 or round(l) < 0:
        raise DomainError(f"alpha={alpha} is not of the form 1 + 2^-l")
    return int(round(l))


def add_geometric_cascade(p: sdp.SdpProblem, x, sigma_c, coupling, l: int, tag: str):
    """Add the cascade bounding ``tr M >= tr sigma (sigma^-1/2 X sigma^-1/2)^(1+2^-l)``.

    ``x`` is an expression (or matrix) in coordinates of the face that holds
    ``X``; ``sigma_c`` is positive definite in its own support coordinates and
    ``coupling`` is the isometry overlap ``V_X^dag V_sigma`` between the two.
    Returns the expression ``M``.
    """
    r = coupling.shape[0]
    prev = None
    for i in range(1, l + 1):
        n_i = p.variable(f"{tag}N{i}", r, "herm")
        if i == 1:
            p.add_psd(
                sdp.block([[x, n_i @ coupling], [coupling.conj().T @ n_i, sigma_c]]),
                name=f"{tag}cascade{i}",
            )
        else:
            p.add_psd(sdp.block([[x, n_i], [n_i, prev]]), name=f"{tag}cascade{i}")
        prev = n_i
    m = p.variable(f"{tag}M", r, "herm")
    if prev is None:
        # alpha = 2: a single block M >= X sigma^-1 X
        p.add_psd(sdp.block([[m, x @ coupling], [coupling.conj().T @ x, sigma_c]]), name=f"{tag}top")
    else:
        p.add_psd(sdp.block([[m, x], [x, prev]]), name=f"{tag}top")
    return m


def geometric_renyi_sdp(rho, sigma, l: int, tol: float = SUPPORT_TOL) -> float:
    """Geometric Renyi divergence at ``alpha = 1 + 2^-l`` from its SDP cascade."""
    rho = clamp_psd(as_operator(rho), tol)
    sigma = clamp_psd(as_operator(sigma), tol)
    if l < 0:
        raise DomainError("l must be a nonnegative integer")
    if not support_contains(sigma, rho, tol):
        return np.inf
    vs = support_basis(sigma, tol)
    vx = support_basis(rho, tol)
    if vx.shape[1] == 0:
        raise DomainError("first argument is zero")
    p = sdp.SdpProblem()
    m = add_geometric_cascade(p, _compress(rho, vx), _compress(sigma, vs), vx.conj().T @ vs, l, "")
    p.minimize(sdp.trace(m))
    sol = sdp.solve(p)
    return float(2**l * np.log(sol.primal_value))


# -- gradients with respect to the first argument --------------------------------


def _objective_and_gradient(kind, alpha, tau, target, domain="states"):
    """Value of ``D(tau || target)`` and its gradient in ``tau``.

    Both operators are given in coordinates where ``target`` is positive
    definite; ``tau`` is PSD for ``domain="states"`` and Hermitian otherwise.
    """
    if kind == "sandwiched":
        g_op = _pos_power(target, (1 - alpha) / (2 * alpha))
        a = hermitize(g_op @ tau @ g_op)
        lam, v = _eigh(a)
        absl = np.abs(lam)
        q = float(np.sum(absl**alpha))
        inner = (v * (np.sign(lam) * absl ** (alpha - 1))) @ v.conj().T
        grad = alpha * g_op @ inner @ g_op / ((alpha - 1) * q)
        return np.log(q) / (alpha - 1), hermitize(grad)
    if kind == "umegaki":
        lam, v = _eigh(tau)
        lam = np.maximum(lam, 1e-300)
        log_tau = (v * np.log(lam)) @ v.conj().T
        log_t = _fn(target, np.log)
        val = float(np.sum(lam * np.log(lam)) - np.trace(tau @ log_t).real)
        return val, hermitize(log_tau - log_t)
    if kind in ("geometric", "bs"):
        s_isqrt = _pos_power(target, -0.5)
        t = hermitize(s_isqrt @ tau @ s_isqrt)
        if kind == "geometric":
            f = lambda x: np.maximum(x, 0.0) ** alpha
            df = lambda x: alpha * np.maximum(x, 0.0) ** (alpha - 1)
        else:
            f = lambda x: np.where(x > 0, x * np.log(np.maximum(x, 1e-300)), 0.0)
            df = lambda x: np.where(x > 0, np.log(np.maximum(x, 1e-300)) + 1, -np.inf)
        lam, v = _eigh(t)
        val = float(np.trace(target @ ((v * f(lam)) @ v.conj().T)).real)
        dval = s_isqrt @ _frechet(t, f, df, target) @ s_isqrt
        if kind == "geometric":
            return np.log(val) / (alpha - 1), hermitize(dval / ((alpha - 1) * val))
        return val, hermitize(dval)
    raise ValueError(f"unknown divergence {kind!r}")


def divergence_gradient(kind: str, tau, sigma, alpha: float | None = None):
    """``(D(tau || sigma), grad_tau D)`` for full-rank ``sigma`` and PSD ``tau``."""
    tau = as_operator(tau)
    sigma = as_operator(sigma)
    return _objective_and_gradient(kind, alpha, tau, sigma)


# -- radius ---------------------------------------------------------------------------


def _exp_state(h):
    lam, v = _eigh(h)
    w = np.exp(lam - lam.max())
    z = w.sum()
    return (v * (w / z)) @ v.conj().T, lam, v, w / z


def _dexp_pullback(g, lam, v, weights):
    """Gradient in ``H`` of ``f(exp(H)/tr exp(H))`` given ``g = grad_tau f``.

    ``weights`` are the normalized exponentials of the eigenvalues ``lam``.
    """
    tau_diag = weights
    gt = v.conj().T @ g @ v
    gt = gt - np.sum(np.diag(gt).real * tau_diag) * np.eye(len(lam))
    shift = lam.max()
    z = np.sum(np.exp(lam - shift))
    dd = divided_differences(lam - shift, np.exp, np.exp) / z
    return hermitize(v @ (dd * gt) @ v.conj().T)


def _herm_coords(h):
    r = h.shape[0]
    iu = np.triu_indices(r, 1)
    return np.concatenate([np.diag(h).real, h[iu].real, h[iu].imag])


def _herm_from(x, r):
    h = np.zeros((r, r), dtype=complex)
    h[np.diag_indices(r)] = x[:r]
    iu = np.triu_indices(r, 1)
    m = len(iu[0])
    h[iu] = x[r : r + m] + 1j * x[r + m :]
    return h + np.triu(h, 1).conj().T


def _coords_grad(g):
    """Gradient with respect to :func:`_herm_coords` of ``tr(g H)``."""
    r = g.shape[0]
    iu = np.triu_indices(r, 1)
    return np.concatenate([np.diag(g).real, 2 * g[iu].real, 2 * g[iu].imag])


def _softmax(vals, temp):
    vals = np.asarray(vals)
    top = vals.max()
    w = np.exp(temp * (vals - top))
    s = w.sum()
    return top + np.log(s) / temp, w / s


class _RadiusObjective:
    def __init__(self, kind, alpha, targets):
        self.kind, self.alpha, self.targets = kind, alpha, targets

    def parts(self, tau):
        out = [_objective_and_gradient(self.kind, self.alpha, tau, t) for t in self.targets]
        return np.array([o[0] for o in out]), [o[1] for o in out]


def _mirror_descent(obj, h0, max_iters=5000, grad_tol=1e-6):
    h = h0.copy()
    it = 0
    temps = (10.0, 100.0, 1000.0)
    per_stage = max_iters // len(temps)
    for temp in temps:
        step = 1.0
        tau, lam, v, w = _exp_state(h)
        vals, grads = obj.parts(tau)
        f, wts = _softmax(vals, temp)
        history = [f]
        for _ in range(per_stage):
            it += 1
            g = sum(wi * gi for wi, gi in zip(wts, grads))
            g = g - np.trace(g @ tau).real * np.eye(len(g))
            gnorm = float(np.linalg.norm(_dexp_pullback(g, lam, v, w)))
            if gnorm <= grad_tol:
                break
            accepted = False
            while step > 1e-12:
                h_new = h - step * g
                tau_n, lam_n, v_n, w_n = _exp_state(h_new)
                vals_n, grads_n = obj.parts(tau_n)
                f_n, wts_n = _softmax(vals_n, temp)
                if np.isfinite(f_n) and f_n <= f - 1e-4 * step * np.sum(np.abs(g) ** 2):
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            h, tau, lam, v, w = h_new, tau_n, lam_n, v_n, w_n
            vals, grads, f, wts = vals_n, grads_n, f_n, wts_n
            step = min(step * 2.0, 1e3)
            history.append(f)
            # stall guard: a soft-max at high temperature keeps a kink-sized gradient
            if len(history) > 20 and history[-21] - f <= 1e-9 * max(1.0, abs(f)):
                break
    return h, it


def _polish(obj, h0, hermitian_domain=False):
    """SLSQP on the epigraph ``min t`` s.t. ``t >= D(tau || target_x)``."""
    r = h0.shape[0]
    k = len(obj.targets)

    if hermitian_domain:
        # tau = I/r + traceless Hermitian part, parametrized directly
        def tau_of(x):
            h = _herm_from(np.concatenate([[-np.sum(x[: r - 1])], x[: r - 1], x[r - 1 :]]), r)
            return np.eye(r) / r + h

        def pull(x, g):
            full = _coords_grad(g)
            return np.concatenate([full[1:r] - full[0], full[r:]])

        tau0 = _exp_state(h0)[0] - np.eye(r) / r
        x0 = np.concatenate([_herm_coords(tau0)[1:r], _herm_coords(tau0)[r:]])
    else:
        cache = {}

        def tau_of(x):
            key = x.tobytes()
            if key not in cache:
                h = _herm_from(np.concatenate([[0.0], x[: r - 1], x[r - 1 :]]), r)
                cache.clear()
                cache[key] = (h,) + _exp_state(h)
            return cache[key][1]

        def pull(x, g):
            h, tau, lam, v, w = cache[x.tobytes()]
            full = _coords_grad(_dexp_pullback(g, lam, v, w))
            return np.concatenate([full[1:r], full[r:]])

        hc = _herm_coords(h0 - h0[0, 0].real * np.eye(r))
        x0 = np.concatenate([hc[1:r], hc[r:]])

    def evaluate(z):
        x = z[:-1]
        tau = tau_of(x)
        return obj.parts(tau)

    def cons(z):
        vals, _ = evaluate(z)
        return z[-1] - vals

    def cons_jac(z):
        x = z[:-1]
        _, grads = evaluate(z)
        jac = np.zeros((k, len(z)))
        for i, g in enumerate(grads):
            jac[i, :-1] = -pull(x, g)
        jac[:, -1] = 1.0
        return jac

    vals0, _ = obj.parts(tau_of(x0))
    z0 = np.concatenate([x0, [vals0.max()]])
    res = minimize(
        lambda z: z[-1],
        z0,
        jac=lambda z: np.eye(len(z))[-1],
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-14},
    )
    best_x = res.x[:-1] if np.all(np.isfinite(res.x)) else x0
    tau_best = tau_of(best_x)
    vals_best, _ = obj.parts(tau_best)
    if vals_best.max() > vals0.max():
        tau_best, vals_best = tau_of(x0), vals0
    return tau_best, vals_best, int(res.nit)


def radius(
    states: Sequence,
    kind: str = "umegaki",
    alpha: float | None = None,
    on_empty: str = "inf",
    max_iters: int = 5000,
    hermitian_domain: bool = False,
) -> RadiusResult:
    """``inf_tau max_x D(tau || rho_x)`` over density matrices ``tau``.

    Geometric divergences at ``alpha = 1 + 2^-l`` use one exact joint SDP;
    the other cases use mirror descent followed by an SLSQP polish on the
    epigraph. With ``hermitian_domain`` the sandwiched radius is taken over
    trace-one Hermitian centers instead.
    """
    if kind not in DIVERGENCES:
        raise ValueError(f"unknown divergence {kind!r}")
    if kind in ("sandwiched", "geometric"):
        DivergenceParams(alpha=alpha).check(kind)
    states = [as_state(r) for r in states]
    if not states:
        raise ValueError("need at least one state")
    d = states[0].shape[0]
    if any(r.shape != (d, d) for r in states):
        raise DimensionMismatch("states have different dimensions")
    if all(np.allclose(r, states[0], atol=1e-12) for r in states[1:]):
        return RadiusResult(0.0, states[0].copy(), [0.0] * len(states), 0, "identical")
    vs = intersect_supports(states)
    if vs.shape[1] == 0:
        if on_empty == "raise":
            raise SupportEmpty("states have no common support")
        return RadiusResult(np.inf, None, [np.inf] * len(states), 0, "empty-support")

    if kind == "geometric" and not hermitian_domain:
        try:
            l = cascade_level(alpha)
        except DomainError:
            l = None
        if l is not None:
            return _geometric_radius_sdp(states, vs, l)

    # each target in coordinates of its own support, tau in coordinates of vs
    if hermitian_domain and kind != "sandwiched":
        raise DomainError("the Hermitian-domain radius is defined for the sandwiched divergence")
    targets = []
    for r in states:
        vr = support_basis(r)
        c = vs.conj().T @ vr
        targets.append((c, _compress(r, vr)))
    obj = _FaceObjective(kind, alpha, targets)
    rs = vs.shape[1]
    tau0 = _compress(sum(states) / len(states), vs)
    tau0 = tau0 / np.trace(tau0).real
    lam, v = _eigh(tau0)
    h0 = (v * np.log(np.maximum(lam, 1e-12))) @ v.conj().T
    if rs == 1:
        tau = np.ones((1, 1), dtype=complex)
        vals, _ = obj.parts(tau)
        it = 0
    else:
        h, it = _mirror_descent(obj, h0, max_iters=max_iters)
        tau, vals, nit = _polish(obj, h, hermitian_domain=hermitian_domain)
        it += nit
    tau_full = vs @ tau @ vs.conj().T
    per = [float(x) for x in vals]
    method = "hermitian-slsqp" if hermitian_domain else "mirror-descent+slsqp"
    return RadiusResult(max(per), hermitize(tau_full), per, it, method)


class _FaceObjective(_RadiusObjective):
    """Divergences from ``tau`` on the common face to each target on its own support."""

    def parts(self, tau):
        out = []
        for c, t in self.targets:
            lifted = hermitize(c.conj().T @ tau @ c)
            val, g = _objective_and_gradient(self.kind, self.alpha, lifted, t)
            out.append((val, hermitize(c @ g @ c.conj().T)))
        return np.array([o[0] for o in out]), [o[1] for o in out]


def _geometric_radius_sdp(states, vs, l: int) -> RadiusResult:
    p = sdp.SdpProblem()
    rs = vs.shape[1]
    tau = p.variable("tau", rs, "psd")
    p.add_eq(sdp.trace(tau), 1.0, name="trace")
    mu = p.variable("mu", kind="real")
    for x, r in enumerate(states):
        vr = support_basis(r)
        m = add_geometric_cascade(p, tau, _compress(r, vr), vs.conj().T @ vr, l, f"x{x}_")
        p.add_ge(mu - sdp.trace(m), 0, name=f"epigraph{x}")
    p.minimize(mu)
    sol = sdp.solve(p)
    tau_c = clamp_psd(sol.blocks["tau"])
    tau_c = tau_c / np.trace(tau_c).real
    tau_full = hermitize(vs @ tau_c @ vs.conj().T)
    alpha = 1 + 2.0**-l
    per = [geometric_renyi(tau_full, r, alpha) for r in states]
    value = float(2**l * np.log(sol.primal_value))
    return RadiusResult(
        float(max(per)),
        tau_full,
        per,
        sol.iterations,
        "joint-sdp",
        {"sdp_value": value, "gap": sol.gap},
    )

"""Primal-dual interior-point method for small dense real conic programs.

Solves::

    minimize    c'x
    subject to  G x + s = h,   A x = b,   s in K

where K is a product of a nonnegative orthant and real symmetric PSD cones,
together with its dual::

    maximize    -h'z - b'y
    subject to  G'z + A'y + c = 0,   z in K.

The iteration runs on the homogeneous self-dual embedding, so infeasible or
unbounded problems end with a certificate instead of diverging. Search
directions use Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
PSD blocks are stored as full symmetric matrices and inner products are
trace inner products.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

STEP_FRACTION = 0.98


@dataclass
class ConicData:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    Gl: np.ndarray  # (ml, n)
    hl: np.ndarray  # (ml,)
    Gs: list = field(default_factory=list)  # each (n, q, q)
    hs: list = field(default_factory=list)  # each (q, q)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def degree(self) -> int:
        return self.hl.shape[0] + sum(h.shape[0] for h in self.hs)


@dataclass
class ConicResult:
    status: str
    x: np.ndarray
    y: np.ndarray
    sl: np.ndarray
    ss: list
    zl: np.ndarray
    zs: list
    pcost: float
    dcost: float
    gap: float
    pres: float
    dres: float
    iterations: int
    message: str = ""


# -- cone vector helpers: a cone vector is a tuple (lp_part, [psd blocks]) --


def _dot(u, v) -> float:
    return float(u[0] @ v[0] + sum(np.sum(a * b) for a, b in zip(u[1], v[1])))


def _norm(u) -> float:
    return float(np.sqrt(u[0] @ u[0] + sum(np.sum(a * a) for a in u[1])))


def _axpy(a, u, v):
    return (a * u[0] + v[0], [a * x + y for x, y in zip(u[1], v[1])])


def _scale(a, u):
    return (a * u[0], [a * x for x in u[1]])


def _sym(m):
    return (m + m.T) / 2


def _psd_factor(m):
    """``L`` with ``m = L L^T`` for a positive definite ``m``."""
    m = _sym(m)
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        e, q = np.linalg.eigh(m)
        if e[0] <= 0:
            raise np.linalg.LinAlgError("iterate left the cone interior") from None
        return q * np.sqrt(e)


def _nt_block(ls, lz):
    """NT factors ``R``, ``R^{-1}`` and ``lambda`` from factors of ``s`` and ``z``."""
    u, lam, vt = np.linalg.svd(lz.T @ ls)
    if lam[-1] <= 0:
        raise np.linalg.LinAlgError("degenerate scaling")
    r = (ls @ vt.T) / np.sqrt(lam)
    rinv = (u.T @ lz.T) / np.sqrt(lam)[:, None]
    return r, rinv, lam


class _Scaling:
    """Nesterov-Todd scaling W with W z = W^{-T} s = lambda."""

    def __init__(self, s, z):
        sl, ss = s
        zl, zs = z
        self.w = np.sqrt(sl / zl)
        self.lam_l = np.sqrt(sl * zl)
        self.R, self.Rinv, self.lam_s = [], [], []
        for sb, zb in zip(ss, zs):
            r, rinv, lam = _nt_block(_psd_factor(sb), _psd_factor(zb))
            self.R.append(r)
            self.Rinv.append(rinv)
            self.lam_s.append(lam)

    def updated(self, s_tilde, z_tilde) -> "_Scaling":
        """Scaling for ``s = W^T s_tilde``, ``z = W^{-1} z_tilde``.

        Working from the scaled iterates keeps the factorizations well
        conditioned even when ``s`` and ``z`` approach rank-deficient limits.
        """
        new = object.__new__(_Scaling)
        if np.any(s_tilde[0] <= 0) or np.any(z_tilde[0] <= 0):
            raise np.linalg.LinAlgError("iterate left the cone interior")
        new.w = self.w * np.sqrt(s_tilde[0] / z_tilde[0])
        new.lam_l = np.sqrt(s_tilde[0] * z_tilde[0])
        new.R, new.Rinv, new.lam_s = [], [], []
        for r, rinv, st, zt in zip(self.R, self.Rinv, s_tilde[1], z_tilde[1]):
            r_t, rinv_t, lam = _nt_block(_psd_factor(st), _psd_factor(zt))
            new.R.append(r @ r_t)
            new.Rinv.append(rinv_t @ rinv)
            new.lam_s.append(lam)
        return new

    @property
    def lam(self):
        return (self.lam_l, [np.diag(x) for x in self.lam_s])

    def apply_inv_t(self, u):
        """W^{-T} u (maps s-space to the scaled space)."""
        return (u[0] / self.w, [ri @ x @ ri.T for ri, x in zip(self.Rinv, u[1])])

    def apply_t(self, u):
        """W^T u (scaled space back to s-space)."""
        return (u[0] * self.w, [r @ x @ r.T for r, x in zip(self.R, u[1])])

    def apply_inv(self, u):
        """W^{-1} u (scaled space back to z-space)."""
        return (u[0] / self.w, [ri.T @ x @ ri for ri, x in zip(self.Rinv, u[1])])

    def lam_sqr(self):
        return (self.lam_l**2, [np.diag(x**2) for x in self.lam_s])

    def lam_solve(self, u):
        """Solve lambda o v = u for v (Jordan product)."""
        out_s = []
        for lam, x in zip(self.lam_s, u[1]):
            out_s.append(2.0 * x / (lam[:, None] + lam[None, :]))
        return (u[0] / self.lam_l, out_s)


def _jordan(u, v):
    return (u[0] * v[0], [(a @ b + b @ a) / 2 for a, b in zip(u[1], v[1])])


def _identity_like(u):
    return (np.ones_like(u[0]), [np.eye(x.shape[0]) for x in u[1]])


def _max_step(lam_l, lam_s, d) -> float:
    """Largest t with lambda + t d in the cone (inf if unbounded)."""
    t = np.inf
    dl = d[0]
    neg = dl < 0
    if np.any(neg):
        t = min(t, float(np.min(-lam_l[neg] / dl[neg])))
    for lam, x in zip(lam_s, d[1]):
        isq = 1.0 / np.sqrt(lam)
        m = _sym(x * isq[:, None] * isq[None, :])
        emin = np.linalg.eigvalsh(m)[0]
        if emin < 0:
            t = min(t, -1.0 / emin)
    return t


def _min_eig(u) -> float:
    vals = [np.min(u[0])] if u[0].size else []
    vals += [np.linalg.eigvalsh(_sym(x))[0] for x in u[1]]
    return float(min(vals)) if vals else 1.0


def solve_conic(
    data: ConicData,
    gap_tol: float = 1e-8,
    kkt_tol: float = 1e-7,
    max_iters: int = 200,
) -> ConicResult:
    c, A, b, Gl, hl = data.c, data.A, data.b, data.Gl, data.hl
    Gs, hs = data.Gs, data.hs
    n, p = c.shape[0], A.shape[0]
    deg = data.degree
    Gs_flat = [g.reshape(n, -1) for g in Gs]

    def gmul(x):
        return (Gl @ x, [(x @ gf).reshape(h.shape) for gf, h in zip(Gs_flat, hs)])

    def gtmul(u):
        out = Gl.T @ u[0]
        for gf, zb in zip(Gs_flat, u[1]):
            out = out + gf @ zb.reshape(-1)
        return out

    h = (hl, list(hs))
    resx0 = max(1.0, float(np.linalg.norm(c)))
    resy0 = max(1.0, float(np.linalg.norm(b)))
    resz0 = max(1.0, _norm(h))

    def factor(scaling: _Scaling | None):
        """Factor the reduced KKT matrix [[G'W^{-1}W^{-T}G, A'], [A, 0]]."""
        if scaling is None:
            gsl = Gl
            gss = [g for g in Gs]
        else:
            gsl = Gl / scaling.w[:, None]
            gss = [np.matmul(np.matmul(ri, g), ri.T) for ri, g in zip(scaling.Rinv, Gs)]
        H = gsl.T @ gsl
        for g in gss:
            gf = g.reshape(n, -1)
            H += gf @ gf.T
        K = np.zeros((n + p, n + p))
        K[:n, :n] = H
        K[:n, n:] = A.T
        K[n:, :n] = A
        reg = 1e-13 * max(1.0, float(np.max(np.abs(np.diag(H)))) if n else 1.0)
        Kreg = K.copy()
        Kreg[:n, :n] += reg * np.eye(n)
        Kreg[n:, n:] -= reg * np.eye(p)
        lu = sla.lu_factor(Kreg, check_finite=False)

        def gs_mul(x):
            return (gsl @ x, [np.tensordot(x, g, axes=(0, 0)) for g in gss])

        def gs_tmul(u):
            out = gsl.T @ u[0]
            for g, zb in zip(gss, u[1]):
                out = out + g.reshape(n, -1) @ zb.reshape(-1)
            return out

        def solve(bx, by, bzs):
            """Return (dx, dy, W dz) for the scaled KKT system."""
            rhs = np.concatenate([bx + gs_tmul(bzs), by])
            sol = sla.lu_solve(lu, rhs, check_finite=False)
            for _ in range(2):
                res = rhs - K @ sol
                if np.linalg.norm(res) <= 1e-15 * max(1.0, np.linalg.norm(rhs)):
                    break
                sol = sol + sla.lu_solve(lu, res, check_finite=False)
            dx, dy = sol[:n], sol[n:]
            dzs = _axpy(-1.0, bzs, gs_mul(dx))
            return dx, dy, dzs

        return solve

    # -- starting point ----------------------------------------------------
    try:
        solve0 = factor(None)
    except (np.linalg.LinAlgError, ValueError) as exc:
        return _fail(data, f"initial factorization failed: {exc}")
    zero_l = np.zeros_like(hl)
    zero_s = [np.zeros_like(x) for x in hs]
    x, _, zt = solve0(np.zeros(n), b, h)
    s = _scale(-1.0, zt)
    xd, y, z = solve0(-c, np.zeros(p), (zero_l, zero_s))
    e = _identity_like(h)
    for name in ("s", "z"):
        v = s if name == "s" else z
        t = _min_eig(v)
        nv = max(1.0, _norm(v))
        if t <= 1e-8 * nv:
            v = _axpy(1.0 + max(0.0, -t), e, v)
        if name == "s":
            s = v
        else:
            z = v
    tau, kappa = 1.0, 1.0

    status, message = "max_iters", ""
    best = None
    W = None
    it = 0
    for it in range(max_iters + 1):
        gx = gmul(x)
        rx = A.T @ y + gtmul(z) + c * tau
        ry = b * tau - A @ x
        rz = _axpy(-1.0, _axpy(1.0, gx, s), _scale(tau, h))
        cx, by_, hz = float(c @ x), float(b @ y), _dot(h, z)
        rt = -cx - by_ - hz - kappa
        sz = _dot(s, z)
        mu = (sz + tau * kappa) / (deg + 1)
        pcost = cx / tau
        dcost = -(by_ + hz) / tau
        pres = max(float(np.linalg.norm(ry)) / resy0, _norm(rz) / resz0) / tau
        dres = float(np.linalg.norm(rx)) / resx0 / tau
        gap = sz / tau**2
        scale = 1.0 + abs(pcost)
        current = (x / tau, y / tau, _scale(1 / tau, s), _scale(1 / tau, z), pcost, dcost, gap, pres, dres)
        if best is None or max(pres, dres, abs(pcost - dcost) / scale) < max(best[7], best[8], abs(best[4] - best[5]) / (1 + abs(best[4]))):
            best = current
        if (
            pres <= kkt_tol
            and dres <= kkt_tol
            and abs(pcost - dcost) <= gap_tol * scale
            and gap <= gap_tol * scale
        ):
            status = "optimal"
            best = current
            break
        # infeasibility certificates
        if by_ + hz < 0:
            pinf = float(np.linalg.norm(A.T @ y + gtmul(z))) / resx0 / (-(by_ + hz))
            if pinf <= kkt_tol:
                status, message = "infeasible", "primal infeasibility certificate found"
                k = -(by_ + hz)
                best = (x, y / k, s, _scale(1 / k, z), np.nan, np.nan, np.nan, pres, dres)
                break
        if cx < 0:
            dinf = max(
                float(np.linalg.norm(A @ x)) / resy0, _norm(_axpy(1.0, gx, s)) / resz0
            ) / (-cx)
            if dinf <= kkt_tol:
                status, message = "unbounded", "dual infeasibility certificate found"
                best = (x / -cx, y, _scale(1 / -cx, s), z, -np.inf, -np.inf, np.nan, pres, dres)
                break
        if it == max_iters:
            message = "iteration limit reached"
            break

        try:
            if W is None:
                W = _Scaling(s, z)
            solve = factor(W)
        except (np.linalg.LinAlgError, ValueError) as exc:
            message = f"numerical failure: {exc}"
            break
        lam = W.lam
        hs_ = W.apply_inv_t(h)
        x1, y1, z1 = solve(-c, b, hs_)
        d1 = float(c @ x1 + b @ y1) + _dot(hs_, z1)
        rz_s = W.apply_inv_t(rz)

        def direction(sigma, rs, rk):
            f = 1.0 - sigma
            bzs = _axpy(-1.0, W.lam_solve(rs), _scale(f, rz_s))
            x2, y2, z2 = solve(-f * rx, f * ry, bzs)
            d2 = float(c @ x2 + b @ y2) + _dot(hs_, z2)
            dtau = (-f * rt + d2 + rk / tau) / (kappa / tau - d1)
            dx = x2 + dtau * x1
            dy = y2 + dtau * y1
            dzs = _axpy(dtau, z1, z2)
            dss = _axpy(-1.0, dzs, W.lam_solve(rs))
            dkappa = (rk - kappa * dtau) / tau
            return dx, dy, dss, dzs, dtau, dkappa

        def max_alpha(dss, dzs, dtau, dkappa):
            t = min(_max_step(W.lam_l, W.lam_s, dss), _max_step(W.lam_l, W.lam_s, dzs))
            if dtau < 0:
                t = min(t, -tau / dtau)
            if dkappa < 0:
                t = min(t, -kappa / dkappa)
            return t

        try:
            # predictor
            rs_a = _scale(-1.0, W.lam_sqr())
            aff = direction(0.0, rs_a, -tau * kappa)
            alpha_a = min(1.0, max_alpha(*aff[2:]))
            sigma = max(0.0, 1.0 - alpha_a) ** 3
            # corrector
            corr = _jordan(aff[2], aff[3])
            rs_c = _axpy(-1.0, corr, _axpy(-1.0, W.lam_sqr(), _scale(sigma * mu, e)))
            rk_c = sigma * mu - tau * kappa - aff[4] * aff[5]
            dx, dy, dss, dzs, dtau, dkappa = direction(sigma, rs_c, rk_c)
            alpha = min(1.0, STEP_FRACTION * max_alpha(dss, dzs, dtau, dkappa))
        except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
            message = f"numerical failure: {exc}"
            break
        if not np.isfinite(alpha) or alpha <= 1e-12:
            message = "step length collapsed"
            break

        s_t = _axpy(alpha, dss, lam)
        z_t = _axpy(alpha, dzs, lam)
        s = W.apply_t(s_t)
        z = W.apply_inv(z_t)
        s = (s[0], [_sym(x_) for x_ in s[1]])
        z = (z[0], [_sym(x_) for x_ in z[1]])
        try:
            W = W.updated(s_t, z_t)
        except np.linalg.LinAlgError as exc:
            W = None
            message = f"numerical failure: {exc}"
        x = x + alpha * dx
        y = y + alpha * dy
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa

    xb, yb, sb, zb, pc, dc, gp, pr, dr = best
    if status == "max_iters" and max(pr, dr) <= kkt_tol and abs(pc - dc) <= gap_tol * (1.0 + abs(pc)):
        # complementarity can stall on large auxiliary blocks while the costs have converged
        status = "optimal"
        message = f"{message}; accepted on objective gap and residuals"
    return ConicResult(
        status=status,
        x=xb,
        y=yb,
        sl=sb[0],
        ss=sb[1],
        zl=zb[0],
        zs=zb[1],
        pcost=float(pc),
        dcost=float(dc),
        gap=float(gp),
        pres=float(pr),
        dres=float(dr),
        iterations=it,
        message=message,
    )


def _fail(data: ConicData, message: str) -> ConicResult:
    return ConicResult(
        status="max_iters",
        x=np.zeros(data.n),
        y=np.zeros(data.A.shape[0]),
        sl=np.zeros_like(data.hl),
        ss=[np.zeros_like(h) for h in data.hs],
        zl=np.zeros_like(data.hl),
        zs=[np.zeros_like(h) for h in data.hs],
        pcost=np.nan,
        dcost=np.nan,
        gap=np.nan,
        pres=np.inf,
        dres=np.inf,
        iterations=0,
        message=message,
    )

"""Problem container, compilation to a real conic program, and solution mapping."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

import numpy as np

from ..linalg import DimensionMismatch
from .expr import Affine, from_coords, hermitian_basis
from .ipm import ConicData, solve_conic

VARIABLE_KINDS = ("herm", "psd", "real", "nonneg")


class SolverError(RuntimeError):
    """A solve ended without an optimal point; ``solution`` holds what was found."""

    def __init__(self, message: str, solution: "SdpSolution | None" = None):
        super().__init__(message)
        self.solution = solution


class Infeasible(SolverError):
    pass


class Unbounded(SolverError):
    pass


class MaxIters(SolverError):
    pass


def realify(h) -> np.ndarray:
    """``[[Re H, -Im H], [Im H, Re H]]``; works on a trailing pair of axes."""
    h = np.asarray(h, dtype=complex)
    re, im = h.real, h.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def derealify(r) -> np.ndarray:
    """Inverse of :func:`realify` (averages the redundant copies)."""
    r = np.asarray(r, dtype=float)
    d = r.shape[-1] // 2
    a, b = r[..., :d, :d], r[..., :d, d:]
    c, e = r[..., d:, :d], r[..., d:, d:]
    return (a + e) / 2 + 1j * (c - b) / 2


def _realified_multiplier(z: np.ndarray) -> np.ndarray:
    """Complex multiplier ``Z`` with ``Re tr(Z E) = <z, realify(E)>`` for Hermitian ``E``."""
    d = z.shape[0] // 2
    z11, z12, z22 = z[:d, :d], z[:d, d:], z[d:, d:]
    return (z11 + z22) + 1j * (z12.T - z12)


@dataclass(frozen=True)
class VarLayout:
    name: str
    dim: int
    kind: str
    offset: int

    @property
    def size(self) -> int:
        return self.dim * self.dim


@dataclass(frozen=True)
class Constraint:
    name: str
    expr: Affine


@dataclass
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    blocks: dict
    gap: float
    kkt_residual: float
    iterations: int
    duals: dict = field(default_factory=dict)
    message: str = ""

    def value(self, expr: Affine) -> np.ndarray:
        coords = {name: _as_coords(v) for name, v in self.blocks.items()}
        return expr.value(coords)


def _as_coords(v) -> np.ndarray:
    if np.ndim(v) == 0:
        return np.array([float(np.real(v))])
    return np.einsum("kij,ji->k", hermitian_basis(np.shape(v)[0]), v).real


class SdpProblem:
    """Hermitian SDP built from :class:`Affine` expressions.

    ``ineq_constraints`` hold expressions required to be PSD and
    ``scalar_bounds`` hold real 1x1 expressions required to be nonnegative.
    """

    def __init__(self, sense: str = "min"):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.sense = sense
        self.variables: dict[str, VarLayout] = {}
        self.objective = Affine(np.zeros((1, 1)))
        self.eq_constraints: list[Constraint] = []
        self.ineq_constraints: list[Constraint] = []
        self.scalar_bounds: list[Constraint] = []
        self._n = 0

    # building ------------------------------------------------------------
    def variable(self, name: str, dim: int = 1, kind: str = "herm") -> Affine:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        if kind not in VARIABLE_KINDS:
            raise ValueError(f"unknown variable kind {kind!r}")
        if kind in ("real", "nonneg"):
            dim = 1
        var = VarLayout(name, int(dim), kind, self._n)
        self.variables[name] = var
        self._n += var.size
        if kind in ("real", "nonneg"):
            expr = Affine(np.zeros((1, 1)), {name: np.ones((1, 1, 1), dtype=complex)})
        else:
            expr = Affine(np.zeros((dim, dim)), {name: hermitian_basis(dim).copy()})
        if kind == "psd":
            self.add_psd(expr, name=f"{name}>=0")
        elif kind == "nonneg":
            self.add_ge(expr, 0, name=f"{name}>=0")
        return expr

    def _check(self, expr: Affine) -> Affine:
        for v in expr.variables:
            if v not in self.variables:
                raise ValueError(f"expression references undeclared variable {v!r}")
        if not expr.is_hermitian(1e-9):
            raise ValueError("constraint and objective expressions must be Hermitian")
        return expr

    def _name(self, name, prefix, seq) -> str:
        return name if name is not None else f"{prefix}{len(seq)}"

    def add_psd(self, expr, name: str | None = None) -> str:
        expr = self._check(Affine.constant(expr))
        name = self._name(name, "psd", self.ineq_constraints)
        self.ineq_constraints.append(Constraint(name, expr))
        return name

    def add_eq(self, lhs, rhs=0, name: str | None = None) -> str:
        lhs = Affine.constant(lhs)
        expr = self._check(lhs - rhs)
        name = self._name(name, "eq", self.eq_constraints)
        self.eq_constraints.append(Constraint(name, expr))
        return name

    def add_ge(self, lhs, rhs=0, name: str | None = None) -> str:
        """Scalar constraint ``lhs >= rhs``."""
        lhs = Affine.constant(lhs)
        expr = self._check(lhs - rhs)
        if expr.shape != (1, 1):
            raise DimensionMismatch("add_ge takes 1x1 expressions; use add_psd for matrices")
        name = self._name(name, "ge", self.scalar_bounds)
        self.scalar_bounds.append(Constraint(name, expr))
        return name

    def add_le(self, lhs, rhs=0, name: str | None = None) -> str:
        """Scalar constraint ``lhs <= rhs``."""
        if isinstance(rhs, Affine):
            return self.add_ge(rhs - lhs, 0, name)
        return self.add_ge(-Affine.constant(lhs) + rhs, 0, name)

    def minimize(self, expr) -> None:
        self.sense = "min"
        self.objective = self._objective(expr)

    def maximize(self, expr) -> None:
        self.sense = "max"
        self.objective = self._objective(expr)

    def _objective(self, expr) -> Affine:
        expr = Affine.constant(expr)
        if expr.shape != (1, 1):
            raise DimensionMismatch("objective must be a 1x1 expression")
        return self._check(expr)

    # compilation -----------------------------------------------------------
    def _row(self, expr: Affine) -> tuple[np.ndarray, complex]:
        """Coefficient rows of a 1x1 or matrix expression over all coordinates."""
        m = expr.shape[0]
        out = np.zeros((m, m, self._n), dtype=complex)
        for name, t in expr.terms.items():
            var = self.variables[name]
            out[:, :, var.offset : var.offset + var.size] = np.moveaxis(t, 0, -1)
        return out, expr.const

    def compile(self) -> "CompiledProblem":
        n = self._n
        coef, const = self._row(self.objective)
        c = coef[0, 0].real.copy()
        c0 = float(const[0, 0].real)
        if self.sense == "max":
            c, c0 = -c, -c0

        rows, rhs, eq_slices = [], [], []
        for con in self.eq_constraints:
            coef, const = self._row(con.expr)
            m = con.expr.shape[0]
            basis = hermitian_basis(m)
            # coordinate k of E(x) is tr(B_k E(x)), real for Hermitian E
            a = np.einsum("kij,jin->kn", basis, coef).real
            bk = -np.einsum("kij,ji->k", basis, const).real
            eq_slices.append((len(rhs), len(rhs) + m * m, m))
            rows.append(a)
            rhs.append(bk)
        A = np.concatenate(rows, axis=0) if rows else np.zeros((0, n))
        b = np.concatenate(rhs) if rhs else np.zeros(0)
        A_red, b_red, U, consistent = _reduce_rows(A, b)

        gl_rows, hl = [], []
        for con in self.scalar_bounds:
            coef, const = self._row(con.expr)
            gl_rows.append(-coef[0, 0].real)
            hl.append(float(const[0, 0].real))
        Gl = np.array(gl_rows).reshape(len(gl_rows), n)
        hl = np.array(hl, dtype=float)

        Gs, hs = [], []
        for con in self.ineq_constraints:
            coef, const = self._row(con.expr)
            Gs.append(-realify(np.moveaxis(coef, -1, 0)))
            hs.append(realify(const))
        data = ConicData(c=c, A=A_red, b=b_red, Gl=Gl, hl=hl, Gs=Gs, hs=hs)
        return CompiledProblem(self, data, c0, U, eq_slices, consistent, A, b)

    def dump(self, fh: IO[str]) -> None:
        """Write the realified problem in SDPA sparse format (see README)."""
        self.compile().dump(fh)


def _reduce_rows(A: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    """Drop linearly dependent equality rows; report whether ``Ax = b`` is consistent."""
    if A.shape[0] == 0:
        return A, b, np.zeros((0, 0)), True
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    U = u[:, :r]
    resid = b - U @ (U.T @ b)
    consistent = bool(np.linalg.norm(resid) <= 1e-9 * max(1.0, np.linalg.norm(b)))
    return s[:r, None] * vt[:r], U.T @ b, U, consistent


@dataclass
class CompiledProblem:
    problem: SdpProblem
    data: ConicData
    objective_offset: float
    row_map: np.ndarray
    eq_slices: list
    consistent: bool
    A_full: np.ndarray
    b_full: np.ndarray

    def dump(self, fh: IO[str]) -> None:
        d = self.data
        n = d.n
        ml = d.hl.shape[0]
        p = d.A.shape[0]
        # equalities become two diagonal inequalities, scalar bounds one each
        lp_size = ml + 2 * p
        sizes = [h.shape[0] for h in d.hs]
        blocks = ([-lp_size] if lp_size else []) + sizes
        fh.write('"realified conic program: minimize c.x s.t. sum_i x_i F_i - F_0 >= 0\n')
        fh.write(f"{n}\n{len(blocks)}\n")
        fh.write(" ".join(str(s) for s in blocks) + "\n")
        fh.write(" ".join(_fmt(v) for v in d.c) + "\n")
        lp_f = np.zeros((n + 1, lp_size))
        if lp_size:
            # F_0 = -h, F_i = -G_i so that sum x_i F_i - F_0 = h - Gx
            lp_f[0, :ml] = -d.hl
            lp_f[1:, :ml] = -d.Gl.T
            lp_f[0, ml : ml + p] = d.b
            lp_f[1:, ml : ml + p] = d.A.T
            lp_f[0, ml + p :] = -d.b
            lp_f[1:, ml + p :] = -d.A.T
        off = 1 if lp_size else 0
        for mat in range(n + 1):
            if lp_size:
                for i in np.flatnonzero(lp_f[mat]):
                    fh.write(f"{mat} 1 {i + 1} {i + 1} {_fmt(lp_f[mat, i])}\n")
            for bi, (g, h) in enumerate(zip(d.Gs, d.hs)):
                f = -h if mat == 0 else -g[mat - 1]
                ii, jj = np.nonzero(np.triu(f))
                for i, j in zip(ii, jj):
                    fh.write(f"{mat} {bi + 1 + off} {i + 1} {j + 1} {_fmt(f[i, j])}\n")


def _fmt(v: float) -> str:
    return repr(float(v))


def solve(
    p: SdpProblem,
    gap_tol: float = 1e-8,
    kkt_tol: float = 1e-7,
    max_iters: int = 200,
    check: bool = True,
) -> SdpSolution:
    """Solve ``p``; with ``check`` a non-optimal status raises a :class:`SolverError`."""
    cp = p.compile()
    if not cp.consistent:
        sol = SdpSolution("infeasible", np.nan, np.nan, {}, np.nan, np.inf, 0,
                          message="equality constraints are inconsistent")
        if check:
            raise Infeasible(sol.message, sol)
        return sol
    res = solve_conic(cp.data, gap_tol=gap_tol, kkt_tol=kkt_tol, max_iters=max_iters)
    sign = -1.0 if p.sense == "max" else 1.0
    blocks = {}
    for name, var in p.variables.items():
        x = res.x[var.offset : var.offset + var.size]
        blocks[name] = float(x[0]) if var.kind in ("real", "nonneg") else from_coords(x, var.dim)
    duals = {}
    for con, z in zip(p.ineq_constraints, res.zs):
        duals[con.name] = _realified_multiplier(z)
    for con, z in zip(p.scalar_bounds, res.zl):
        duals[con.name] = float(z)
    y_full = cp.row_map @ res.y if cp.row_map.size else np.zeros(0)
    for con, (lo, hi, m) in zip(p.eq_constraints, cp.eq_slices):
        duals[con.name] = from_coords(y_full[lo:hi], m) if m > 1 else float(y_full[lo])
    primal = sign * (res.pcost + cp.objective_offset)
    dual = sign * (res.dcost + cp.objective_offset)
    gap = abs(res.pcost - res.dcost) / (1.0 + abs(res.pcost)) if np.isfinite(res.pcost) else np.nan
    sol = SdpSolution(
        status=res.status,
        primal_value=float(primal),
        dual_value=float(dual),
        blocks=blocks,
        gap=float(gap),
        kkt_residual=float(max(res.pres, res.dres)),
        iterations=res.iterations,
        duals=duals,
        message=res.message,
    )
    if check and sol.status != "optimal":
        exc = {"infeasible": Infeasible, "unbounded": Unbounded}.get(sol.status, MaxIters)
        raise exc(f"solver status {sol.status}: {sol.message}", sol)
    return sol


def slater_check(p: SdpProblem, tol: float = 1e-7) -> bool:
    """True when a phase-one solve finds a point strictly inside every inequality."""
    q = SdpProblem("max")
    for name, var in p.variables.items():
        kind = "herm" if var.kind in ("herm", "psd") else "real"
        q.variable(name, var.dim, kind)
    t = q.variable("__slack__", kind="real")
    for con in p.ineq_constraints:
        m = con.expr.shape[0]
        q.add_psd(con.expr - kron_scalar(t, m))
    for con in p.scalar_bounds:
        q.add_ge(con.expr - t)
    for con in p.eq_constraints:
        q.add_eq(con.expr)
    q.add_le(t, 1.0)
    q.maximize(t)
    try:
        sol = solve(q, check=False)
    except Exception:
        return False
    if sol.status == "unbounded":
        return True
    if sol.status not in ("optimal", "max_iters"):
        return False
    return bool(np.isfinite(sol.primal_value) and sol.primal_value > tol)


def kron_scalar(t: Affine, m: int) -> Affine:
    """``t * I_m`` for a 1x1 expression ``t``."""
    return t._map(lambda a: a * np.eye(m) if a.ndim == 2 else a[:, :1, :1] * np.eye(m)[None])

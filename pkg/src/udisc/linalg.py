"""Dense complex-Hermitian linear algebra.

Operators are plain ``numpy`` arrays. The helpers here validate them,
diagonalize them and apply scalar functions on their support, which is what
every divergence formula in the package is built from.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

HERMITICITY_TOL = 1e-10
STATE_TOL = 1e-9
SUPPORT_TOL = 1e-9


class NonHermitian(ValueError):
    pass


class DomainError(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_operator(h, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Return ``h`` as a square complex array, checking hermiticity."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {h.shape}")
    err = np.max(np.abs(h - h.conj().T))
    if err > tol * max(1.0, np.max(np.abs(h))):
        raise NonHermitian(f"hermiticity violated by {err:.3e}")
    return h


def hermitize(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return (h + h.conj().T) / 2


def as_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD and unit trace within ``tol``."""
    rho = as_operator(rho)
    if abs(np.trace(rho).real - 1.0) > tol:
        raise DomainError(f"trace {np.trace(rho).real!r} differs from 1")
    lam = np.linalg.eigvalsh(hermitize(rho))
    if lam[0] < -tol:
        raise DomainError(f"negative eigenvalue {lam[0]:.3e} in state")
    return rho


def as_trace_one(h, tol: float = STATE_TOL) -> np.ndarray:
    h = as_operator(h)
    if abs(np.trace(h).real - 1.0) > tol:
        raise DomainError(f"trace {np.trace(h).real!r} differs from 1")
    return h


def eig(h, tol: float = HERMITICITY_TOL) -> Spectrum:
    """Eigendecomposition with eigenvalues sorted in descending order."""
    h = hermitize(as_operator(h, tol))
    lam, vec = np.linalg.eigh(h)
    return Spectrum(lam[::-1].copy(), vec[:, ::-1].copy())


def operator_norm(h) -> float:
    h = np.asarray(h, dtype=complex)
    if h.size == 0:
        return 0.0
    return float(np.linalg.norm(h, 2))


def _support_cut(lam: np.ndarray, support_tol: float) -> float:
    scale = np.max(np.abs(lam)) if lam.size else 0.0
    return support_tol * max(1.0, scale)


def matrix_function_on_support(
    h, f: Callable[[np.ndarray], np.ndarray], support_tol: float = SUPPORT_TOL
) -> np.ndarray:
    """Apply ``f`` to the eigenvalues of ``h`` that lie off its numerical kernel.

    Eigenvalues with ``|lam| <= support_tol * max(1, ||h||)`` count as zero
    and are mapped to zero whatever ``f`` is, so ``f = 1/x`` gives the
    pseudo-inverse and ``f = log`` the logarithm restricted to the support.
    """
    decomp = eig(h)
    lam, v = decomp.eigenvalues, decomp.eigenvectors
    keep = np.abs(lam) > _support_cut(lam, support_tol)
    out = np.zeros_like(lam)
    if np.any(keep):
        with np.errstate(all="ignore"):
            vals = np.asarray(f(lam[keep]), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = lam[keep][~np.isfinite(vals)]
            raise DomainError(f"function undefined at eigenvalue(s) {bad}")
        out[keep] = vals
    return (v * out) @ v.conj().T


def psd_power(h, p: float, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    """``h**p`` on the support of a PSD ``h``; slightly negative eigenvalues are clamped."""
    return matrix_function_on_support(clamp_psd(h, support_tol), lambda x: x**p, support_tol)


def psd_log(h, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    return matrix_function_on_support(clamp_psd(h, support_tol), np.log, support_tol)


def clamp_psd(h, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Zero out eigenvalues in ``[-tol * max(1, ||h||), 0)`` of a nominally PSD operator."""
    decomp = eig(h)
    lam = decomp.eigenvalues.copy()
    cut = _support_cut(lam, tol)
    if lam[-1] < -cut:
        raise DomainError(f"operator has eigenvalue {lam[-1]:.3e}, not PSD")
    lam[lam < 0] = 0.0
    v = decomp.eigenvectors
    return (v * lam) @ v.conj().T


def support_basis(a, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the support (range) of Hermitian ``a``."""
    decomp = eig(a)
    lam = decomp.eigenvalues
    keep = np.abs(lam) > _support_cut(lam, tol)
    return decomp.eigenvectors[:, keep]


def support_projector(a, tol: float = SUPPORT_TOL) -> np.ndarray:
    v = support_basis(a, tol)
    return v @ v.conj().T


def support_contains(a, b, tol: float = SUPPORT_TOL) -> bool:
    """True iff ``supp(b)`` lies inside ``supp(a)`` for PSD ``a``.

    Tested as ``||P_ker(a) b P_ker(a)|| <= tol * ||b||``; for PSD ``b`` this is
    equivalent to the support inclusion.
    """
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    p_ker = np.eye(a.shape[0]) - support_projector(a, tol)
    nb = operator_norm(b)
    if nb == 0.0:
        return True
    leak = p_ker @ b @ p_ker
    # off-diagonal leakage only matters for indefinite b
    cross = p_ker @ b @ (np.eye(a.shape[0]) - p_ker)
    return max(operator_norm(leak), operator_norm(cross)) <= tol * nb


def intersect_supports(ops: Sequence[np.ndarray], tol: float = SUPPORT_TOL) -> np.ndarray:
    """Orthonormal basis of the intersection of the supports of PSD operators."""
    d = np.asarray(ops[0]).shape[0]
    kernel_sum = np.zeros((d, d), dtype=complex)
    for a in ops:
        kernel_sum += np.eye(d) - support_projector(a, tol)
    lam, vec = np.linalg.eigh(hermitize(kernel_sum))
    return vec[:, lam < 1e-8]


def tensor(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def _normalize_keep(keep, n: int) -> tuple[int, ...]:
    if isinstance(keep, str):
        names = "ABCDEFGH"
        keep = [names.index(k) for k in keep]
    elif isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = tuple(sorted(set(keep)))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatch(f"keep={keep} out of range for {n} subsystems")
    return keep


def partial_trace(h, dims: Sequence[int], keep="A") -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``keep`` may be subsystem indices or letters (``"A"`` is the first
    factor). Works for any operator on the tensor product, Hermitian or not.
    """
    h = np.asarray(h, dtype=complex)
    dims = [int(x) for x in dims]
    total = int(np.prod(dims))
    if h.shape != (total, total):
        raise DimensionMismatch(f"operator shape {h.shape} does not match dims {dims}")
    n = len(dims)
    keep = _normalize_keep(keep, n)
    t = h.reshape(dims + dims)
    # trace pairs from the back so remaining axis numbers stay valid
    for k in reversed(range(n)):
        if k in keep:
            continue
        m = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + m)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def schatten_norm(h, alpha: float) -> float:
    """``(sum_i s_i**alpha)**(1/alpha)`` over singular values; ``alpha=inf`` is the operator norm."""
    if alpha < 1:
        raise DomainError("Schatten norms need alpha >= 1")
    s = np.linalg.svd(np.asarray(h, dtype=complex), compute_uv=False)
    if np.isinf(alpha):
        return float(s.max()) if s.size else 0.0
    smax = s.max() if s.size else 0.0
    if smax == 0.0:
        return 0.0
    return float(smax * np.sum((s / smax) ** alpha) ** (1.0 / alpha))


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def max_entangled(d: int, normalized: bool = False) -> np.ndarray:
    """``|Phi><Phi|`` with ``|Phi> = sum_i |ii>``; trace ``d`` unless normalized."""
    phi = np.eye(d, dtype=complex).reshape(-1)
    out = np.outer(phi, phi.conj())
    return out / d if normalized else out


def divided_differences(lam: np.ndarray, f, df) -> np.ndarray:
    """First divided differences ``(f(a)-f(b))/(a-b)`` with ``df`` on the diagonal."""
    a = lam[:, None]
    b = lam[None, :]
    fa, fb = f(a), f(b)
    diff = a - b
    close = np.abs(diff) <= 1e-10 * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    with np.errstate(all="ignore"):
        out = np.where(close, df((a + b) / 2), (fa - fb) / np.where(close, 1.0, diff))
    return out

"""Affine matrix expressions over real variable coordinates.

A variable is a Hermitian matrix (or a real scalar) parametrized by real
coordinates in an orthonormal Hermitian basis. An :class:`Affine` stores a
constant matrix plus, per variable, one coefficient matrix per coordinate, so
every linear operation used to build the SDPs (products with constants,
Kronecker products, partial traces, block assembly) is applied to the stacked
coefficient arrays directly.
"""
from __future__ import annotations

from functools import lru_cache
from numbers import Number
from typing import Sequence

import numpy as np

from ..linalg import DimensionMismatch, _normalize_keep, partial_trace as _ptrace


@lru_cache(maxsize=None)
def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of d x d Hermitian matrices, shape ``(d*d, d, d)``.

    Order: diagonal units, then for each ``i < j`` the real symmetric and the
    imaginary antisymmetric element, each scaled by ``1/sqrt(2)``.
    """
    out = np.zeros((d * d, d, d), dtype=complex)
    k = 0
    for i in range(d):
        out[k, i, i] = 1.0
        k += 1
    r = 1 / np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            out[k, i, j] = out[k, j, i] = r
            k += 1
            out[k, i, j] = -1j * r
            out[k, j, i] = 1j * r
            k += 1
    out.setflags(write=False)
    return out


def to_coords(h: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in :func:`hermitian_basis`."""
    h = np.asarray(h, dtype=complex)
    basis = hermitian_basis(h.shape[0])
    return np.einsum("kij,ji->k", basis, h).real


def from_coords(x: np.ndarray, d: int) -> np.ndarray:
    return np.einsum("k,kij->ij", np.asarray(x, dtype=float), hermitian_basis(d))


class Affine:
    """``const + sum_v sum_k x[v][k] * terms[v][k]`` with complex matrices."""

    __array_ufunc__ = None  # make ndarray ops defer to the reflected methods

    def __init__(self, const, terms: dict | None = None):
        self.const = np.atleast_2d(np.asarray(const, dtype=complex))
        self.terms = dict(terms or {})
        for name, t in self.terms.items():
            if t.shape[1:] != self.const.shape:
                raise DimensionMismatch(f"term {name!r} has shape {t.shape[1:]}, expected {self.const.shape}")

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value) -> "Affine":
        if isinstance(value, Affine):
            return value
        return cls(value)

    @property
    def shape(self) -> tuple[int, int]:
        return self.const.shape

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.terms)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        if self.shape[0] != self.shape[1]:
            return False
        ok = np.allclose(self.const, self.const.conj().T, atol=tol)
        for t in self.terms.values():
            ok = ok and np.allclose(t, np.conj(np.swapaxes(t, 1, 2)), atol=tol)
        return bool(ok)

    def value(self, coords: dict[str, np.ndarray]) -> np.ndarray:
        out = self.const.copy()
        for name, t in self.terms.items():
            out += np.einsum("k,kij->ij", coords[name], t)
        return out

    # algebra ---------------------------------------------------------------
    def _map(self, fn) -> "Affine":
        const = fn(self.const)
        terms = {name: fn(t) for name, t in self.terms.items()}
        return Affine(const, terms)

    def __add__(self, other) -> "Affine":
        other = _lift(other, self.shape)
        terms = dict(self.terms)
        for name, t in other.terms.items():
            terms[name] = terms[name] + t if name in terms else t
        return Affine(self.const + other.const, terms)

    __radd__ = __add__

    def __neg__(self) -> "Affine":
        return self._map(lambda a: -a)

    def __sub__(self, other) -> "Affine":
        return self + (-_lift(other, self.shape))

    def __rsub__(self, other) -> "Affine":
        return _lift(other, self.shape) + (-self)

    def __mul__(self, scalar) -> "Affine":
        if not isinstance(scalar, Number):
            raise TypeError("Affine can only be scaled by numbers; use @ for products")
        return self._map(lambda a: a * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Affine":
        return self * (1.0 / scalar)

    def __matmul__(self, other) -> "Affine":
        if isinstance(other, Affine):
            raise TypeError("products of two affine expressions are not affine")
        b = np.asarray(other, dtype=complex)
        return self._map(lambda a: a @ b)

    def __rmatmul__(self, other) -> "Affine":
        b = np.asarray(other, dtype=complex)
        return self._map(lambda a: b @ a)

    @property
    def H(self) -> "Affine":
        return self._map(lambda a: np.conj(np.swapaxes(a, -1, -2)))

    def trace(self) -> "Affine":
        return self._map(lambda a: np.trace(a, axis1=-2, axis2=-1)[..., None, None])

    def real_scalar(self) -> "Affine":
        """Keep the real part of a 1x1 expression."""
        if self.shape != (1, 1):
            raise DimensionMismatch("real_scalar needs a 1x1 expression")
        return self._map(lambda a: a.real.astype(complex))

    def partial_trace(self, dims: Sequence[int], keep) -> "Affine":
        return self._map(lambda a: _ptrace_stack(a, dims, keep))


def _ptrace_stack(a: np.ndarray, dims: Sequence[int], keep) -> np.ndarray:
    if a.ndim == 2:
        return _ptrace(a, dims, keep)
    dims = [int(x) for x in dims]
    n = len(dims)
    keep = _normalize_keep(keep, n)
    t = a.reshape([a.shape[0]] + dims + dims)
    for k in reversed(range(n)):
        if k in keep:
            continue
        m = (t.ndim - 1) // 2
        t = np.trace(t, axis1=1 + k, axis2=1 + k + m)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(a.shape[0], dk, dk)


def _lift(other, shape) -> Affine:
    if isinstance(other, Affine):
        if other.shape != shape:
            raise DimensionMismatch(f"shape {other.shape} vs {shape}")
        return other
    if isinstance(other, Number):
        if other == 0:
            return Affine(np.zeros(shape, dtype=complex))
        if shape[0] != shape[1]:
            raise DimensionMismatch("scalar lifting needs a square shape")
        return Affine(other * np.eye(shape[0], dtype=complex))
    arr = np.asarray(other, dtype=complex)
    if arr.shape != shape:
        raise DimensionMismatch(f"shape {arr.shape} vs {shape}")
    return Affine(arr)


def kron(a, b) -> Affine:
    """Kronecker product where at most one factor is an :class:`Affine`."""
    if isinstance(a, Affine) and isinstance(b, Affine):
        raise TypeError("kron of two affine expressions is not affine")
    if isinstance(a, Affine):
        bb = np.asarray(b, dtype=complex)
        return a._map(lambda x: _kron_last(x, bb, left=False))
    if isinstance(b, Affine):
        aa = np.asarray(a, dtype=complex)
        return b._map(lambda x: _kron_last(x, aa, left=True))
    return Affine(np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)))


def _kron_last(x: np.ndarray, c: np.ndarray, left: bool) -> np.ndarray:
    if x.ndim == 2:
        return np.kron(c, x) if left else np.kron(x, c)
    if left:
        out = np.einsum("ab,kij->kaibj", c, x)
        return out.reshape(x.shape[0], c.shape[0] * x.shape[1], c.shape[1] * x.shape[2])
    out = np.einsum("kij,ab->kiajb", x, c)
    return out.reshape(x.shape[0], x.shape[1] * c.shape[0], x.shape[2] * c.shape[1])


def block(rows: Sequence[Sequence]) -> Affine:
    """Assemble a block matrix from Affine / ndarray / ``0`` entries."""
    rows = [list(r) for r in rows]
    heights = []
    for r in rows:
        h = {(_shape_of(e)[0]) for e in r if _shape_of(e) is not None}
        if len(h) != 1:
            raise DimensionMismatch("inconsistent or undetermined block row heights")
        heights.append(h.pop())
    widths = []
    for j in range(len(rows[0])):
        w = {(_shape_of(r[j])[1]) for r in rows if _shape_of(r[j]) is not None}
        if len(w) != 1:
            raise DimensionMismatch("inconsistent or undetermined block column widths")
        widths.append(w.pop())
    m, n = sum(heights), sum(widths)
    const = np.zeros((m, n), dtype=complex)
    terms: dict[str, np.ndarray] = {}
    r0 = 0
    for i, r in enumerate(rows):
        c0 = 0
        for j, e in enumerate(r):
            sl = (slice(r0, r0 + heights[i]), slice(c0, c0 + widths[j]))
            if isinstance(e, Affine):
                const[sl] = e.const
                for name, t in e.terms.items():
                    if name not in terms:
                        terms[name] = np.zeros((t.shape[0], m, n), dtype=complex)
                    terms[name][(slice(None),) + sl] += t
            elif not (isinstance(e, Number) and e == 0):
                const[sl] = np.asarray(e, dtype=complex)
            c0 += widths[j]
        r0 += heights[i]
    return Affine(const, terms)


def _shape_of(e):
    if isinstance(e, Affine):
        return e.shape
    if isinstance(e, Number):
        return None
    return np.asarray(e).shape


def trace(e) -> Affine:
    return Affine.constant(e).trace()


def inner(c: np.ndarray, e: Affine) -> Affine:
    """``tr(c @ e)`` as a 1x1 expression."""
    return (np.asarray(c, dtype=complex) @ e).trace()

"""Transfer matrices of canonical systems on piecewise-constant meshes.

On a cell of width ``dx`` where the coefficient matrix is a constant
symmetric ``M`` the equation ``Y' = -J M Y`` has the exact solution

    exp(-J M dx) = cos(w) I - dx sinc(w) J M,   w**2 = det(M) dx**2,

so no ODE integration is needed.  With ``M = z H`` this propagates
``J Y' = z H Y``, with ``M = -Q`` it propagates ``J Y' + Q Y = 0`` and
with ``M = z H - Q`` the general system ``J Y' + Q Y = z H Y``.

Products are accumulated with a separate log-scale so that matrices
whose entries overflow double precision still carry exact ratios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import Hamiltonian, MeshPolicy, Potential, cell_averages

__all__ = [
    "J",
    "TransferMatrix",
    "cell_exponentials",
    "reduce_product",
    "step_exponential",
    "fundamental_matrix",
    "fundamental_matrix_general",
    "zero_energy_matrix",
    "mesh_nodes",
]

J = np.array([[0.0, -1.0], [1.0, 0.0]])

_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class TransferMatrix:
    """A 2x2 matrix stored as ``entries * exp(log_scale)``.

    ``entries`` has shape ``(..., 2, 2)`` and ``log_scale`` the matching
    batch shape.  Ratios of entries are exact even when the full matrix
    overflows.
    """

    entries: np.ndarray
    log_scale: np.ndarray

    def matrix(self) -> np.ndarray:
        """The matrix itself; overflows to ``inf`` when it really is that large."""
        return self.entries * np.exp(np.asarray(self.log_scale))[..., None, None]

    @property
    def theta(self) -> np.ndarray:
        return self.entries[..., :, 0]

    @property
    def phi(self) -> np.ndarray:
        return self.entries[..., :, 1]

    def det(self) -> np.ndarray:
        e = self.entries
        d = e[..., 0, 0] * e[..., 1, 1] - e[..., 0, 1] * e[..., 1, 0]
        return d * np.exp(2 * np.asarray(self.log_scale))

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        ent, ls = _normalize(self.entries @ other.entries)
        return TransferMatrix(ent, ls + self.log_scale + other.log_scale)


def _normalize(m: np.ndarray):
    s = np.max(np.abs(m), axis=(-2, -1))
    s = np.where(s > 0, s, 1.0)
    return m / s[..., None, None], np.log(s)


def cell_exponentials(M: np.ndarray, dx: np.ndarray):
    """``exp(-J M dx)`` for symmetric cells ``M = (a, b, c)`` along the last axis.

    Parameters
    ----------
    M : array_like, shape (..., 3)
        Complex entries ``a, b, c`` of ``[[a, b], [b, c]]``.
    dx : array_like
        Cell widths, broadcast against ``M[..., 0]``.

    Returns
    -------
    entries : ndarray, shape (..., 2, 2)
    log_scale : ndarray
        The exponentials equal ``entries * exp(log_scale)``.
    """
    M = np.asarray(M, dtype=complex)
    dx = np.asarray(dx, dtype=float)
    a, b, c = M[..., 0] * dx, M[..., 1] * dx, M[..., 2] * dx
    w = np.sqrt(a * c - b * b)
    v = np.abs(w.imag)
    small = np.abs(w) < _SERIES_CUTOFF
    ws = np.where(small, 1.0, w)
    e1 = np.exp(1j * ws - v)
    e2 = np.exp(-1j * ws - v)
    cos_s = 0.5 * (e1 + e2)
    sinc_s = (e1 - e2) / (2j * ws)
    w2 = w * w
    cos_s = np.where(small, 1 - w2 / 2 + w2 * w2 / 24, cos_s)
    sinc_s = np.where(small, 1 - w2 / 6 + w2 * w2 / 120, sinc_s)
    v = np.where(small, 0.0, v)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = cos_s + sinc_s * b
    out[..., 0, 1] = sinc_s * c
    out[..., 1, 0] = -sinc_s * a
    out[..., 1, 1] = cos_s - sinc_s * b
    ent, ls = _normalize(out)
    return ent, ls + v


def reduce_product(entries: np.ndarray, log_scale: np.ndarray, axis: int = -3) -> TransferMatrix:
    """Ordered product ``E[n-1] @ ... @ E[0]`` along ``axis`` by pairwise reduction."""
    e = np.moveaxis(entries, axis, 0)
    ls = np.moveaxis(np.asarray(log_scale, dtype=float), axis if axis >= 0 else axis + 2, 0)
    if e.shape[0] == 0:
        shape = e.shape[1:-2]
        return TransferMatrix(np.broadcast_to(np.eye(2, dtype=complex), shape + (2, 2)).copy(), np.zeros(shape))
    while e.shape[0] > 1:
        n = e.shape[0]
        if n % 2:
            tail_e, tail_ls = e[-1:], ls[-1:]
            e, ls = e[:-1], ls[:-1]
        prod, s = _normalize(e[1::2] @ e[0::2])
        ls_new = ls[1::2] + ls[0::2] + s
        if n % 2:
            prod = np.concatenate([prod, tail_e])
            ls_new = np.concatenate([ls_new, tail_ls])
        e, ls = prod, ls_new
    return TransferMatrix(e[0], ls[0])


def step_exponential(H0, z, dx) -> TransferMatrix:
    """Transfer matrix ``exp(-z J H0 dx)`` over one cell with constant ``H0``.

    ``H0`` is either a 2x2 symmetric matrix or the triple ``(a, b, c)``.
    ``z`` may be an array; the result is batched over it.
    """
    cell = _as_cell(H0)
    z = np.asarray(z, dtype=complex)
    ent, ls = cell_exponentials(z[..., None] * cell, dx)
    return TransferMatrix(ent, ls)


def _as_cell(H0) -> np.ndarray:
    H0 = np.asarray(H0)
    if H0.shape == (2, 2):
        if H0[0, 1] != H0[1, 0]:
            raise ValueError("cell matrix must be symmetric")
        return np.array([H0[0, 0], H0[0, 1], H0[1, 1]])
    if H0.shape != (3,):
        raise ValueError("cell must be a 2x2 symmetric matrix or a triple (a, b, c)")
    return H0


def mesh_nodes(H: Hamiltonian, x: float, policy: MeshPolicy | None = None) -> np.ndarray:
    """Nodes on ``[0, x]``: the policy mesh plus intrinsic breakpoints of ``H``."""
    policy = policy or MeshPolicy()
    if policy.kind == "uniform":
        nodes = MeshPolicy("uniform", n_cells=policy.n_cells).nodes(x)
    else:
        lo = policy.x_min if policy.x_min is not None else x * 2.0**-40
        nodes = MeshPolicy("geometric", policy.cells_per_octave, x_min=min(lo, x)).nodes(x)
    bp = H.breakpoints()
    return np.union1d(nodes, bp[(bp > 0) & (bp < x)])


def fundamental_matrix(H: Hamiltonian, z, x: float, policy: MeshPolicy | None = None) -> TransferMatrix:
    """Fundamental matrix ``U(z, x)`` with ``U(z, 0) = I``.

    The columns are ``(theta_1, theta_2)`` and ``(phi_1, phi_2)``.  ``H`` is
    replaced by its exact cell averages on the mesh from ``policy``; for
    piecewise-constant ``H`` aligned with the mesh the result is exact up
    to rounding.
    """
    if not 0 <= x < H.L and not (x == H.L and math.isfinite(x)):
        raise ValueError(f"x = {x} outside [0, {H.L}]")
    z = np.asarray(z, dtype=complex)
    if x == 0:
        return reduce_product(np.empty((0,) + z.shape + (2, 2), complex), np.empty((0,) + z.shape))
    nodes = mesh_nodes(H, x, policy)
    cells = cell_averages(H, nodes)
    dx = np.diff(nodes)
    M = z[..., None, None] * cells  # (..., n, 3)
    ent, ls = cell_exponentials(M, dx)
    return reduce_product(ent, ls)


def fundamental_matrix_general(cells_H, cells_Q, nodes, z) -> TransferMatrix:
    """Fundamental matrix of ``J Y' + Q Y = z H Y`` with piecewise-constant ``H, Q``.

    ``cells_H`` and ``cells_Q`` are ``(n, 3)`` arrays of ``(a, b, c)`` on the
    cells between consecutive ``nodes``.
    """
    z = np.asarray(z, dtype=complex)
    M = z[..., None, None] * np.asarray(cells_H) - np.asarray(cells_Q)
    ent, ls = cell_exponentials(M, np.diff(nodes))
    return reduce_product(ent, ls)


def zero_energy_matrix(Q, x: float) -> TransferMatrix:
    """Solution ``U(0, x)`` of ``J Y' + Q Y = 0`` with ``U(0, 0) = I``.

    ``Q`` is a :class:`~cansys.hamiltonian.Potential`, a symmetric 2x2
    matrix or a triple ``(a, b, c)``.  For constant ``Q``: ``Q = q I``
    gives the plane rotation by angle ``q x``, ``Q = diag(q, -q)`` a
    hyperbolic rotation and ``Q = [[0, q], [q, 0]]`` the squeeze
    ``diag(exp(-q x), exp(q x))``.  The entries are real.
    """
    if not isinstance(Q, Potential):
        Q = Potential.constant(_as_cell(np.asarray(Q, dtype=float)))
    bp = Q.breakpoints
    nodes = np.append(bp[bp < x], x)
    ent, ls = cell_exponentials(-Q.cells[: len(nodes) - 1], np.diff(nodes))
    U = reduce_product(ent, ls)
    return TransferMatrix(U.entries.real, U.log_scale)

"""Weyl-Titchmarsh m-functions: numerical evaluation and closed-form models.

The m-function is computed from the fundamental matrix through the
truncated Moebius values

    m_xi(z, x) = -(theta_1 xi + theta_2) / (phi_1 xi + phi_2)

at the boundary parameter ``xi = -i``.  For ``Im z > 0`` the lower
half-plane of boundary parameters is mapped onto the nested Weyl disk at
``x`` (the pole ``-phi_2/phi_1`` lies in the upper half-plane), so this
value and ``m`` itself both lie in the disk and the disk diameter bounds
the truncation error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ._parallel import parallel_map
from .hamiltonian import Hamiltonian, clamp_psd
from .propagator import TransferMatrix, cell_exponentials, reduce_product

__all__ = [
    "DomainError",
    "NonConvergence",
    "TruncationPolicy",
    "QUADRATURE_POLICY",
    "MFunctionSample",
    "ConstantZeta",
    "Alpha",
    "Step",
    "DiracKappa",
    "ModelFamily",
    "m_function",
    "m_values",
    "model_m",
    "d_nu",
    "constant_from_m",
    "hypergeometric_0F1",
    "model_solutions_alpha",
    "kappa_reduce",
    "dirac_to_schrodinger_m",
    "upper_root",
]


class DomainError(ValueError):
    """Argument outside the domain where the quantity is defined."""


class NonConvergence(RuntimeError):
    """Truncated m-function did not settle; carries the last estimate."""

    def __init__(self, message: str, sample: "MFunctionSample | None" = None):
        super().__init__(message)
        self.sample = sample


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls for :func:`m_function`.

    Attributes
    ----------
    rtol, atol : float
        Stop once ``radius <= rtol * |m| + atol``.
    k_max : int
        Number of doublings of the truncation point.
    cells_per_octave : int
        Geometric mesh density.
    w_max : float
        Upper bound for ``|z| * int tr H`` over a single cell, enforced by
        subdividing cells of Hamiltonians that are not piecewise constant.
    start : float
        The first cell ``[0, x_min]`` is chosen with ``|z| * eta(x_min) = start``.
    order : int
        2 uses cell averages only, 4 adds the first-moment Magnus correction.
    max_cells : int
        Work bound per truncation step (cells times active points).  Steps
        above it are split; the schedule stops unconverged once a step
        cannot be split further or the total work exceeds ten times the
        bound.
    discretization_check : bool
        For Hamiltonians that are not piecewise constant, repeat the solve
        on a mesh of half the density and add the difference to the
        radius, so that the radius bounds mesh error as well as truncation.
    refinements : int
        How many times the mesh density may be doubled for points whose
        radius, mesh error included, is still above the tolerance.  A point
        is dropped from refinement once two doublings fail to halve its gap.
    """

    rtol: float = 1e-8
    atol: float = 1e-12
    k_max: int = 60
    cells_per_octave: int = 24
    w_max: float = 0.5
    start: float = 1e-7
    order: int = 4
    max_cells: int = 4_000_000
    discretization_check: bool = True
    refinements: int = 4

    def tolerance(self, value) -> np.ndarray:
        return self.rtol * np.abs(value) + self.atol


#: m-values feeding quadratures (Stieltjes inversion): their own error is
#: far below 1e-6, so a tighter m is wasted work
QUADRATURE_POLICY = TruncationPolicy(rtol=1e-6)


@dataclass(frozen=True)
class MFunctionSample:
    z: complex
    value: complex
    radius: float
    x_trunc: float
    converged: bool = True


def _check_z(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise DomainError("the m-function is only defined off the real axis")
    return z


# ---------------------------------------------------------------------------
# numerical m-function

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_ROUNDING = 1e-14


def _is_piecewise_constant(H: Hamiltonian) -> bool:
    return bool(getattr(H, "piecewise_constant", False))


def _cell_data(H: Hamiltonian, nodes: np.ndarray, order: int):
    """Cell integrals ``S = int H`` and Magnus correction matrices ``K``.

    ``K = J [J G, J S]`` with ``G = (1/dx) int (s - mid) H(s) ds`` so that the
    fourth-order Magnus exponent of a cell is ``-J (z S + z**2 K)``.
    """
    A, B, C = H.primitives(nodes)
    P = np.stack([A, B, C], axis=-1)
    dx = np.diff(nodes)
    # primitives given as differences (strings, reparametrisations) carry
    # absolute rounding errors of a few ulps of their size
    noise = 16 * np.finfo(float).eps * np.abs(P).sum(axis=1)
    S = clamp_psd(np.diff(P, axis=0) / dx[:, None], (noise[1:] + noise[:-1]) / dx) * dx[:, None]
    if order == 2 or _is_piecewise_constant(H):
        return S, None
    left = nodes[:-1]
    pts = left[:, None] + 0.5 * dx[:, None] * (_GL_X[None, :] + 1.0)
    Aq, Bq, Cq = H.primitives(pts)
    Pq = np.stack([Aq, Bq, Cq], axis=-1) - P[:-1, None, :]
    integral = 0.5 * dx[:, None] * np.einsum("q,nqk->nk", _GL_W, Pq)
    G = 0.5 * (P[1:] - P[:-1]) - integral / dx[:, None]
    # commutator [J G, J S] for symmetric G, S, then multiply by J
    ga, gb, gc = G[:, 0], G[:, 1], G[:, 2]
    sa, sb, sc = S[:, 0], S[:, 1], S[:, 2]
    JG = np.array([[-gb, -gc], [ga, gb]])
    JS = np.array([[-sb, -sc], [sa, sb]])
    comm = np.einsum("ijn,jkn->ikn", JG, JS) - np.einsum("ijn,jkn->ikn", JS, JG)
    Kmat = np.einsum("ij,jkn->ikn", np.array([[0.0, -1.0], [1.0, 0.0]]), comm)
    K = np.stack([Kmat[0, 0], Kmat[0, 1], Kmat[1, 1]], axis=-1)
    return S, K


def _segment_transfer(H: Hamiltonian, nodes: np.ndarray, z: np.ndarray, order: int, Q=None) -> TransferMatrix:
    S, K = _cell_data(H, nodes, 2 if Q is not None else order)
    M = z[:, None, None] * S[None]
    if K is not None:
        M = M + (z * z)[:, None, None] * K[None]
    if Q is not None:
        M = M - np.diff(Q.primitives(nodes), axis=0)[None]
    ent, ls = cell_exponentials(M, 1.0)
    return reduce_product(ent, ls)


def _refine(H: Hamiltonian, nodes: np.ndarray, zmax: float, policy: TruncationPolicy, Q=None) -> np.ndarray:
    bp = H.breakpoints()
    if Q is not None:
        bp = np.union1d(bp, Q.breakpoints)
    nodes = np.union1d(nodes, bp[(bp > nodes[0]) & (bp < nodes[-1])])
    if _is_piecewise_constant(H):
        return nodes
    # Commutators of H at different points, which drive the local error,
    # are bounded by the square root of the determinant of the cell
    # integral; cells where H keeps a fixed rank-one direction need no
    # subdivision.
    A, B, C = H.primitives(nodes)
    dA, dB, dC = np.diff(A), np.diff(B), np.diff(C)
    w = zmax * np.sqrt(np.maximum(dA * dC - dB * dB, 0.0))
    if Q is not None:
        # the potential is piecewise constant; keep |Q| dx small so that
        # the midpoint (order 2) cells stay accurate
        w = np.maximum(w, 4 * Q.norm_bound() * np.diff(nodes))
    k = np.maximum(1, np.ceil(w / policy.w_max)).astype(int)
    if np.all(k == 1):
        return nodes
    left = np.repeat(nodes[:-1], k)
    width = np.repeat(np.diff(nodes) / k, k)
    start = np.cumsum(k) - k
    offset = np.arange(k.sum()) - np.repeat(start, k)
    return np.append(left + offset * width, nodes[-1])


def _first_point(H: Hamiltonian, zabs: float, target: float) -> float:
    """Largest power of two ``x < L`` with ``zabs * eta(x) <= target`` (at least 2**-200)."""
    j = np.arange(-200, 201, dtype=float)
    x = 2.0**j
    x = x[x < (H.L / 2 if math.isfinite(H.L) else np.inf)]
    with np.errstate(all="ignore"):
        eta = H.eta(x)
    ok = np.nonzero(zabs * eta <= target)[0]
    if len(ok) == 0:
        return float(x[0])
    return float(x[ok[-1]])


def _checkpoints(H: Hamiltonian, x0: float, k_max: int):
    x, k = x0, 0
    L = H.L
    while k <= k_max:
        yield x
        k += 1
        if math.isfinite(L) and 2 * x >= L / 2:
            nxt = L - (L - x) / 2 if x >= L / 2 else L / 2
            if nxt <= x:
                return
            x = nxt
        else:
            x = 2 * x


def _geometric(lo: float, hi: float, per_octave: int) -> np.ndarray:
    n = max(1, int(math.ceil(math.log2(hi / lo) * per_octave)))
    out = np.exp(np.linspace(math.log(lo), math.log(hi), n + 1))
    out[0], out[-1] = lo, hi
    return out


def _moebius(U: np.ndarray, xi: complex) -> np.ndarray:
    return -(U[..., 0, 0] * xi + U[..., 1, 0]) / (U[..., 0, 1] * xi + U[..., 1, 1])


def _disk(U: TransferMatrix):
    """Estimate of m and an error bound from the Weyl disk at the current truncation.

    The disk is the image of the lower half-plane of boundary parameters;
    since ``det U = 1`` its radius is ``1 / (2 |Im(conj(phi_1) phi_2)|)``
    in unnormalised entries.  The value ``m_xi`` at ``xi = -i`` lies in the
    disk, so the returned diameter bounds its distance to ``m``.
    """
    e = U.entries
    val = _moebius(e, -1j)
    c, d = e[..., 0, 1], e[..., 1, 1]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        diam = np.exp(-2.0 * U.log_scale) / np.abs(np.imag(np.conj(c) * d))
    return val, diam


def _solve_group(H: Hamiltonian, z: np.ndarray, policy: TruncationPolicy, Q=None):
    """Run the doubling schedule for ``z`` (all in the upper half-plane)."""
    n = len(z)
    zabs = np.abs(z)
    zmax = float(zabs.max())
    value = np.full(n, np.nan + 0j)
    radius = np.full(n, np.inf)
    xt = np.zeros(n)
    done = np.zeros(n, dtype=bool)
    x_min = _first_point(H, zmax, policy.start)
    x0 = max(_first_point(H, zmax, 1.0), x_min)
    active = np.arange(n)
    U = None
    x_prev = 0.0
    work = 0
    for target in _checkpoints(H, x0, policy.k_max):
        # split a checkpoint interval whose mesh would exceed the per-step
        # work bound; the disk often closes part way through such a stretch
        while x_prev < target and len(active):
            x = target
            while True:
                if x_prev == 0.0:
                    nodes = np.concatenate(([0.0], _geometric(x_min, x, policy.cells_per_octave))) if x > x_min else np.array([0.0, x])
                else:
                    nodes = _geometric(x_prev, x, policy.cells_per_octave)
                nodes = _refine(H, nodes, float(zabs[active].max()), policy, Q)
                cost = (len(nodes) - 1) * len(active)
                if cost <= policy.max_cells or x_prev == 0.0 or x <= x_prev * (1 + 1e-3):
                    break
                x = math.sqrt(x_prev * x)
            work += cost
            if cost > policy.max_cells or work > 10 * policy.max_cells:
                return value, radius, xt, done
            seg = _segment_transfer(H, nodes, z[active], policy.order, Q)
            U = seg if U is None else seg @ U
            val, rad = _disk(U)
            ok = np.isfinite(rad) & (rad <= policy.tolerance(val))
            value[active], radius[active], xt[active] = val, rad, x
            done[active[ok]] = True
            keep = ~ok
            active = active[keep]
            U = TransferMatrix(U.entries[keep], U.log_scale[keep])
            x_prev = x
        if len(active) == 0:
            break
    return value, radius, xt, done


def _solve_points(H: Hamiltonian, zu: np.ndarray, policy: TruncationPolicy, Q=None):
    """Solve at upper half-plane points, grouped by octave of ``|z|`` so that one mesh suits a group."""
    key = np.floor(np.log2(np.abs(zu))).astype(int)
    groups = [np.nonzero(key == k)[0] for k in np.unique(key)]
    results = parallel_map(lambda idx: _solve_group(H, zu[idx], policy, Q), groups)
    value = np.empty(len(zu), complex)
    radius = np.empty(len(zu))
    xt = np.empty(len(zu))
    conv = np.empty(len(zu), bool)
    for idx, (v, r, x, d) in zip(groups, results):
        value[idx], radius[idx], xt[idx], conv[idx] = v, r, x, d
    return value, radius, xt, conv


def _gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    gap = np.abs(a - b)
    return np.where(np.isfinite(gap), gap, 0.0)


def m_values(
    H: Hamiltonian,
    z,
    policy: TruncationPolicy | None = None,
    *,
    strict: bool = True,
    Q=None,
):
    """Vectorised m-function.

    Parameters
    ----------
    H : Hamiltonian
    z : array_like of complex
        Evaluation points off the real axis.  Points in the lower
        half-plane are obtained by reflection.
    policy : TruncationPolicy, optional
    strict : bool
        Raise :class:`NonConvergence` if any point fails to converge.
    Q : Potential, optional
        Real symmetric potential of the system ``J Y' + Q Y = z H Y``.
        Its cells are propagated with cell averages (second order).

    Returns
    -------
    value, radius, x_trunc, converged : ndarray
        Same shape as ``z``.
    """
    policy = policy or TruncationPolicy()
    z = _check_z(z)
    shape = z.shape
    zf = z.ravel()
    lower = zf.imag < 0
    zu = np.where(lower, np.conj(zf), zf)
    value, radius, xt, conv = _solve_points(H, zu, policy, Q)
    if policy.discretization_check and (Q is not None or not _is_piecewise_constant(H)):
        # compare with the mesh of half the density; where the gap is above
        # the tolerance, double the density and compare with the previous mesh
        fine = policy
        rough = replace(policy, cells_per_octave=max(1, policy.cells_per_octave // 2), w_max=2 * policy.w_max)
        gap = _gap(value, _solve_points(H, zu, rough, Q)[0])
        radius = radius + gap
        # points whose gap did not halve over two doublings are given up;
        # oscillating coefficients can make single steps irregular
        shrinking = np.ones(len(zu), bool)
        older = np.full(len(zu), np.inf)
        for _ in range(policy.refinements):
            redo = np.flatnonzero(conv & shrinking & (radius > policy.tolerance(value)))
            if redo.size == 0:
                break
            fine = replace(fine, cells_per_octave=2 * fine.cells_per_octave, w_max=fine.w_max / 2)
            v, r, x, d = _solve_points(H, zu[redo], fine, Q)
            new_gap = _gap(v, value[redo])
            shrinking[redo] = new_gap <= 0.5 * older[redo]
            older[redo] = gap[redo]
            gap[redo] = new_gap
            radius[redo] = r + new_gap
            value[redo], xt[redo], conv[redo] = v, x, d
    # rounding floor: the Moebius values carry relative errors near 1e-15
    radius = np.maximum(radius, _ROUNDING * np.abs(value))
    conv &= radius <= policy.tolerance(value)
    value = np.where(lower, np.conj(value), value)
    if strict and not conv.all():
        bad = int(np.nonzero(~conv)[0][0])
        sample = MFunctionSample(complex(zf[bad]), complex(value[bad]), float(radius[bad]), float(xt[bad]), False)
        raise NonConvergence(
            f"m-function did not converge at z = {zf[bad]}: radius {radius[bad]:.3g} at x = {xt[bad]:.3g}",
            sample,
        )
    return value.reshape(shape), radius.reshape(shape), xt.reshape(shape), conv.reshape(shape)


def m_function(H: Hamiltonian, z: complex, policy: TruncationPolicy | None = None) -> MFunctionSample:
    """m-function of ``H`` at a single nonreal ``z``.

    Raises
    ------
    DomainError
        If ``z`` is real.
    NonConvergence
        If the radius is still above tolerance after ``k_max`` doublings;
        the exception carries the last sample.
    """
    v, r, x, _ = m_values(H, np.array([z]), policy)
    return MFunctionSample(complex(z), complex(v[0]), float(r[0]), float(x[0]))


def sampler(H: Hamiltonian, policy: TruncationPolicy | None = None) -> Callable:
    """Vectorised callable ``z -> m(z)`` for quadratures; the default policy is :data:`QUADRATURE_POLICY`."""
    policy = policy or QUADRATURE_POLICY

    def m(z):
        return m_values(H, z, policy)[0]

    return m


# ---------------------------------------------------------------------------
# closed-form models


def d_nu(nu: float) -> float:
    """``(1-nu)**nu Gamma(1-nu) / (nu**(1-nu) Gamma(nu))`` for ``0 < nu < 1``."""
    if not 0 < nu < 1:
        raise DomainError(f"d_nu needs 0 < nu < 1, got {nu}")
    return math.exp(nu * math.log1p(-nu) + math.lgamma(1 - nu) - (1 - nu) * math.log(nu) - math.lgamma(nu))


@dataclass(frozen=True)
class ConstantZeta:
    """m-function identically equal to ``zeta0`` in the upper half-plane."""

    zeta0: complex

    def __post_init__(self):
        if complex(self.zeta0).imag < 0:
            raise DomainError("zeta0 must lie in the closed upper half-plane")

    @classmethod
    def from_cell(cls, a0: float, b0: float, c0: float) -> "ConstantZeta":
        """Constant value of the m-function of ``H = [[a0, b0], [b0, c0]]``."""
        if c0 <= 0:
            raise DomainError("c0 must be positive")
        h0 = math.sqrt(max(a0 * c0 - b0 * b0, 0.0))
        return cls(complex(-b0, h0) / c0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.full(z.shape, complex(self.zeta0))

    def rho(self, t):
        return complex(self.zeta0).imag * np.asarray(t, dtype=float) / math.pi


@dataclass(frozen=True)
class Alpha:
    """Power-law model ``m_alpha``.  ``d`` overrides the default constant."""

    alpha: float
    d: float | None = None

    @property
    def nu(self) -> float:
        return 1.0 / (2.0 + abs(self.alpha))

    @property
    def constant(self) -> float:
        if self.d is not None:
            return self.d
        if self.alpha >= 0:
            return d_nu(self.nu)
        return d_nu((1 + abs(self.alpha)) * self.nu)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        nu, d = self.nu, self.constant
        if self.alpha >= 0:
            return -d * np.exp(-1j * math.pi * nu) * z ** (-self.alpha * nu)
        return d * np.exp(1j * math.pi * nu) * z ** (abs(self.alpha) * nu)

    def rho(self, t):
        t = np.asarray(t, dtype=float)
        a, nu, d = abs(self.alpha), self.nu, self.constant
        if self.alpha > 0:
            coef = (2 + a) / 2 * math.sin(math.pi * nu) * d
            p = 2 * nu
        elif self.alpha == 0:
            coef, p = d, 1.0
        else:
            coef = (2 + a) / (2 + 2 * a) * math.sin(math.pi * nu) * d
            p = (2 + 2 * a) * nu
        return np.sign(t) * coef * np.abs(t) ** p / math.pi


@dataclass(frozen=True)
class Step:
    """m-function ``-1/z`` of the step Hamiltonian."""

    def __call__(self, z):
        return -1.0 / np.asarray(z, dtype=complex)

    def rho(self, t):
        t = np.asarray(t, dtype=float)
        return (t > 0).astype(float)


@dataclass(frozen=True)
class DiracKappa:
    """Unperturbed radial model ``-(-z**2)**(k + 1/2) / (z cos(pi kappa))``
    with ``k = kappa`` for ``kappa > -1/2`` and ``k = |kappa|`` otherwise."""

    kappa: float

    def __post_init__(self):
        if float(self.kappa + 0.5).is_integer():
            raise DomainError("kappa + 1/2 must not be an integer")

    @property
    def power(self) -> float:
        return self.kappa + 0.5 if self.kappa > -0.5 else abs(self.kappa) + 0.5

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return -((-z * z) ** self.power) / (z * math.cos(math.pi * self.kappa))

    def rho(self, t):
        t = np.asarray(t, dtype=float)
        p = 2 * self.power
        return np.sign(t) * np.abs(t) ** p / (math.pi * p)


ModelFamily = ConstantZeta | Alpha | Step | DiracKappa


def model_m(family, z):
    """Closed-form m-function of a model family.

    Fractional powers use the principal branch.  Values in the lower
    half-plane follow from ``m(conj z) = conj m(z)``.
    """
    z = _check_z(z)
    zu = np.where(z.imag < 0, np.conj(z), z)
    v = family(zu)
    v = np.where(z.imag < 0, np.conj(v), v)
    return complex(v) if v.ndim == 0 else v


def constant_from_m(zeta0: complex) -> tuple[float, float, float]:
    """Trace-normed constant Hamiltonian ``(a0, b0, c0)`` whose m-function is ``zeta0``."""
    zeta0 = complex(zeta0)
    if zeta0.imag < 0:
        raise DomainError("zeta0 must lie in the closed upper half-plane")
    n = abs(zeta0) ** 2 + 1
    return abs(zeta0) ** 2 / n, -zeta0.real / n, 1 / n


def hypergeometric_0F1(c: float, w, *, rtol: float = 1e-17, max_terms: int = 10_000):
    """``0F1(c; w) = sum_k Gamma(c) / Gamma(k + c) w**k / k!`` by direct summation."""
    if c <= 0 and float(c).is_integer():
        raise DomainError("c must not be a nonpositive integer")
    w = np.asarray(w, dtype=complex)
    total = np.ones_like(w)
    term = np.ones_like(w)
    for k in range(max_terms):
        term = term * w / ((k + c) * (k + 1))
        total = total + term
        if np.all(np.abs(term) <= rtol * np.abs(total)) and k + 1 > 0:
            return complex(total) if total.ndim == 0 else total
    raise DomainError(f"0F1 series did not settle within {max_terms} terms; |w| too large")


def model_solutions_alpha(alpha: float, zeta, x, *, derivatives: bool = False):
    """Entire solutions ``(theta, phi)`` of ``-y'' = zeta p_alpha y`` for ``alpha >= 0``.

    ``theta(0) = 1, theta'(0) = 0`` and ``phi(0) = 0, phi'(0) = 1``.  With
    ``derivatives=True`` the x-derivatives are appended.
    """
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    nu = 1.0 / (2.0 + alpha)
    zeta = complex(zeta)
    x = float(x)
    k = (nu * nu - nu) * zeta
    w = k * x ** (1 / nu)
    theta = hypergeometric_0F1(1 - nu, w)
    phi = x * hypergeometric_0F1(1 + nu, w)
    if not derivatives:
        return theta, phi
    dw = (k / nu) * x ** (1 / nu - 1)
    dtheta = dw * hypergeometric_0F1(2 - nu, w) / (1 - nu)
    dphi = hypergeometric_0F1(1 + nu, w) + x * dw * hypergeometric_0F1(2 + nu, w) / (1 + nu)
    return theta, phi, dtheta, dphi


def kappa_reduce(M0: Callable, kappa: float, z):
    """``z**(2 floor(kappa + 1/2)) M0(z)``: Weyl function for ``kappa`` from that of
    ``kappa - floor(kappa + 1/2)``."""
    if float(kappa + 0.5).is_integer():
        raise DomainError("kappa + 1/2 must not be an integer")
    n = math.floor(kappa + 0.5)
    z = np.asarray(z, dtype=complex)
    return z ** (2 * n) * M0(z)


def upper_root(zeta):
    """Square root of ``zeta`` lying in the upper half-plane."""
    zeta = np.asarray(zeta, dtype=complex)
    if np.any((zeta.imag == 0) & (zeta.real >= 0)):
        raise DomainError("zeta on [0, inf) has no square root in the open upper half-plane")
    return 1j * np.sqrt(-zeta)


def dirac_to_schrodinger_m(m: Callable, zeta):
    """``m_q(zeta) = z m(z)`` with ``z`` the root of ``zeta`` in the upper half-plane."""
    z = upper_root(zeta)
    out = z * np.asarray(m(z))
    return complex(out) if np.ndim(out) == 0 else out

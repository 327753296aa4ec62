"""Spectral functions: Stieltjes inversion, model spectral functions and
the Tauberian comparison of ``m`` with a model along rays.

Spectral functions are normalised left-continuous with ``rho(0) = 0``, so
an atom at the origin belongs to ``(0, inf)``: for the step model
``rho(t) = 1`` for ``t > 0`` and ``0`` for ``t <= 0``.  Model spectral
functions are those of symmetric measures and are odd in ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .weyl import Step

__all__ = [
    "SpectralFunction",
    "stieltjes_invert",
    "model_rho",
    "smoothed_integral",
    "atom_at_zero",
    "richardson",
    "TauberianReport",
    "tauberian_compare",
    "DEFAULT_EPS",
]

#: relative smoothing levels; the absolute level at ``t`` is ``e * (1 + |t|)``
DEFAULT_EPS = (1e-1, 3e-2, 1e-2)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass
class SpectralFunction:
    """Tabulated spectral function.

    ``breakpoints`` is increasing and contains 0 with ``values`` 0 there;
    evaluation interpolates linearly between table points.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    atoms: list[tuple[float, float]] = field(default_factory=list)
    error: np.ndarray | None = None
    clamped: int = 0
    eps: tuple = DEFAULT_EPS

    def __call__(self, t):
        return np.interp(t, self.breakpoints, self.values)

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))


def model_rho(family, t):
    """Closed-form spectral function of a model family (odd in ``t``)."""
    out = family.rho(np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _panels(t: float, eps: float) -> np.ndarray:
    """Panel edges on ``[0, |t|]``: width at most ``2 eps`` near the origin and
    at most a quarter of the distance to it further out."""
    T = abs(t)
    edges = [0.0]
    s = 0.0
    h0 = min(eps / 8, T)
    while s < T:
        h = max(min(2 * eps, max(h0, s)), s / 4) if s > 0 else h0
        s = min(T, s + h)
        edges.append(s)
    return np.array(edges)


def smoothed_integral(m: Callable, t, eps) -> np.ndarray:
    """``(1/pi) int_0^t Im m(s + i eps) ds`` for arrays ``t`` and matching ``eps``.

    All quadrature nodes are handed to ``m`` in a single call.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    eps = np.broadcast_to(np.asarray(eps, dtype=float), t.shape)
    nodes, weights, owner = [], [], []
    for k, (tk, ek) in enumerate(zip(t, eps)):
        if tk == 0:
            continue
        edges = _panels(tk, ek) * math.copysign(1.0, tk)
        a, b = edges[:-1, None], edges[1:, None]
        x = 0.5 * (a + b) + 0.5 * (b - a) * _GL_X[None, :]
        w = 0.5 * (b - a) * _GL_W[None, :]
        nodes.append((x + 1j * ek).ravel())
        weights.append(w.ravel())
        owner.append(np.full(x.size, k))
    out = np.zeros(len(t))
    if nodes:
        z = np.concatenate(nodes)
        vals = np.imag(np.asarray(m(z)))
        np.add.at(out, np.concatenate(owner), np.concatenate(weights) * vals / math.pi)
    return out


def richardson(eps, values) -> tuple[np.ndarray, np.ndarray]:
    """Extrapolate ``values[j]`` (last axis) at ``eps[j]`` to ``eps = 0``.

    Returns the linear extrapolation through the two smallest levels and,
    as an error estimate, its distance to the quadratic one through all
    levels (zero when fewer than three levels are given).
    """
    eps = np.asarray(eps, dtype=float)
    v = np.asarray(values, dtype=float)
    order = np.argsort(eps)[::-1]
    eps, v = eps[order], v[..., order]
    if len(eps) == 1:
        return v[..., 0], np.full(v.shape[:-1], np.inf)
    e1, e2 = eps[-2], eps[-1]
    lin = v[..., -1] + (v[..., -1] - v[..., -2]) * e2 / (e1 - e2)
    if len(eps) < 3:
        return lin, np.zeros_like(lin)
    # Neville tableau at 0 for the quadratic through all points
    p = [v[..., j] for j in range(len(eps))]
    n = len(eps)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (eps[i + k] * p[i] - eps[i] * p[i + 1]) / (eps[i + k] - eps[i])
    return lin, np.abs(lin - p[0])


def atom_at_zero(m: Callable, levels=(1e-2, 1e-4, 1e-6), rtol: float = 0.1) -> float:
    """Mass of an atom at 0, ``lim eps Im m(i eps)``.

    The sequence at ``levels`` must have settled within ``rtol`` for an
    atom to be reported; a sequence tending to zero gives 0.
    """
    levels = np.asarray(levels, dtype=float)
    v = levels * np.imag(np.asarray(m(1j * levels)))
    last, prev = v[-1], v[-2]
    if last > 0 and abs(last - prev) <= rtol * last:
        return float(last)
    return 0.0


def stieltjes_invert(
    m: Callable,
    t_grid,
    eps_schedule=DEFAULT_EPS,
    *,
    relative: bool = True,
    atom_levels=(1e-2, 1e-4, 1e-6),
) -> SpectralFunction:
    """Spectral function from a Herglotz function by Stieltjes inversion.

    Parameters
    ----------
    m : callable
        Vectorised Herglotz function on the upper half-plane.
    t_grid : array_like
        Increasing evaluation points; 0 is added if missing.
    eps_schedule : sequence of float
        Decreasing smoothing levels.  With ``relative=True`` the level at
        ``t`` is ``e * (1 + |t|)``.
    atom_levels : sequence of float
        Levels for :func:`atom_at_zero`.

    Returns
    -------
    SpectralFunction
        Values extrapolated linearly to ``eps = 0`` from the two smallest
        levels, with the atom at 0 added and negative increments clamped.
    """
    t = np.union1d(np.asarray(t_grid, dtype=float), [0.0])
    eps_schedule = tuple(float(e) for e in eps_schedule)
    if any(e <= 0 for e in eps_schedule) or list(eps_schedule) != sorted(eps_schedule, reverse=True):
        raise ValueError("eps_schedule must be decreasing positives")
    scale = (1 + np.abs(t)) if relative else np.ones_like(t)
    tt = np.tile(t, len(eps_schedule))
    ee = np.concatenate([e * scale for e in eps_schedule])
    I = smoothed_integral(m, tt, ee).reshape(len(eps_schedule), len(t)).T
    lin, err = richardson(np.array(eps_schedule), I)
    mu0 = atom_at_zero(m, atom_levels)
    rho = np.where(t == 0, 0.0, lin + mu0 / 2)
    # enforce monotonicity away from 0 in both directions
    i0 = int(np.searchsorted(t, 0.0))
    fixed = rho.copy()
    fixed[i0:] = np.maximum.accumulate(np.maximum(fixed[i0:], 0.0))
    fixed[: i0 + 1] = np.minimum.accumulate(np.minimum(fixed[: i0 + 1], 0.0)[::-1])[::-1]
    fixed[i0] = 0.0
    clamped = int(np.count_nonzero(np.abs(fixed - rho) > 0))
    atoms = [(0.0, mu0)] if mu0 > 0 else []
    inc = np.diff(fixed)
    for j in range(1, len(inc) - 1):
        if t[j] != 0 and t[j + 1] != 0 and inc[j] > 10 * max(inc[j - 1], inc[j + 1], 1e-300):
            atoms.append((float(0.5 * (t[j] + t[j + 1])), float(inc[j])))
    return SpectralFunction(t, fixed, atoms=atoms, error=err, clamped=clamped, eps=eps_schedule)


@dataclass
class TauberianReport:
    t: np.ndarray
    ratio_plus: np.ndarray
    ratio_minus: np.ndarray
    jump_form: bool
    f_over_r_decreasing: bool
    tol: float
    passed: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "t": self.t.tolist(),
            "ratio_plus": self.ratio_plus.tolist(),
            "ratio_minus": self.ratio_minus.tolist(),
            "jump_form": self.jump_form,
            "f_over_r_decreasing": self.f_over_r_decreasing,
            "tol": self.tol,
            "passed": self.passed,
            "notes": self.notes,
        }


def tauberian_compare(rho: Callable, f: Callable, model, t_ladder, tol: float = 0.05) -> TauberianReport:
    """Compare ``rho(+-t)`` with ``t f(t) rho_model(+-1)`` along ``t_ladder``.

    When the model spectral function jumps at 0 the difference form
    ``rho(t) - rho(-t)`` against ``t f(t) (rho_model(1) - rho_model(-1))``
    is used instead, and both ratio columns hold that single ratio.
    """
    t = np.asarray(t_ladder, dtype=float)
    ft = np.asarray([f(x) for x in t], dtype=float)
    notes = []
    dec = bool(np.all(np.diff(ft / t) <= 1e-12 * np.abs(ft[:-1] / t[:-1])))
    if not dec:
        notes.append("f(r)/r is not decreasing on the ladder; theorem hypothesis violated")
    # an atom at 0 keeps rho(0+) away from 0 at every scale; a power law does not
    tiny, small = model_rho(model, 1e-300), model_rho(model, 1e-150)
    jump = isinstance(model, Step) or (tiny > 0 and tiny >= 0.5 * small)
    rp, rm = model_rho(model, 1.0), model_rho(model, -1.0)
    if jump:
        ratio = (rho(t) - rho(-t)) / (t * ft * (rp - rm))
        plus = minus = np.asarray(ratio, dtype=float)
    else:
        plus = np.asarray(rho(t), dtype=float) / (t * ft * rp)
        minus = np.asarray(rho(-t), dtype=float) / (t * ft * rm) if rm != 0 else np.full(len(t), np.nan)
    tail = [plus[-1]] + ([] if np.isnan(minus[-1]) else [minus[-1]])
    passed = bool(all(abs(r - 1) <= tol for r in tail))
    return TauberianReport(t, plus, minus, jump, dec, tol, passed, notes)


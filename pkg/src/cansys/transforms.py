"""Structure-preserving reductions between spectral problems.

* trace normalisation ``H(x) -> H(xi(x)) / tr H(xi(x))``,
* the scaling family ``r2 (r3 a(r1 x), b(r1 x), c(r1 x)/r3)``,
* Krein strings and generalised indefinite strings to canonical systems,
* the gauge transform removing a potential ``Q`` from ``J Y' + Q Y = z H Y``.

All reductions act on primitive integrals, so piecewise-constant inputs
give piecewise-constant outputs with the same number of cells.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .hamiltonian import (
    Constant,
    Hamiltonian,
    MeshPolicy,
    PiecewiseConstant,
    Potential,
    PowerLawAlpha,
    SampledPrimitive,
    cell_averages,
    validate,
)
from .propagator import cell_exponentials, zero_energy_matrix

__all__ = [
    "MonotoneMap",
    "invert_increasing",
    "generalized_inverse",
    "TraceNormalized",
    "trace_normalize",
    "Scaled",
    "scale",
    "Flipped",
    "flip",
    "StringData",
    "IndefiniteStringData",
    "StringHamiltonian",
    "string_to_canonical",
    "indefinite_string_to_canonical",
    "gauge_transform",
    "gauge_density",
    "w_closed_form",
]


# ---------------------------------------------------------------------------
# monotone maps


def invert_increasing(fn: Callable, y, *, convention: str = "min", upper: float = math.inf, iters: int = 200):
    """Generalised inverse of a nondecreasing ``fn`` on ``(0, upper)``.

    ``convention="min"`` returns ``inf {x : fn(x) >= y}`` and ``"sup"``
    returns ``sup {x : fn(x) <= y}``; they differ only on plateaus of
    ``fn``.  The root search runs on ``log x`` (Anderson-Bjorck regula
falsi with a bisection safeguard, so jumps and plateaus are safe), is
vectorised, and stops at full double precision or after ``iters``
steps.  Targets
    above ``fn(upper-)`` give ``upper``; targets at or below ``fn(0+)``
    give 0.
    """
    y = np.asarray(y, dtype=float)
    shape = y.shape
    y = y.ravel()
    if convention == "min":
        below = lambda v, t: v < t  # noqa: E731 - x lies left of the answer
    elif convention == "sup":
        below = lambda v, t: v <= t  # noqa: E731
    else:
        raise ValueError("convention must be 'min' or 'sup'")
    cap = upper if math.isfinite(upper) else 2.0**1000
    # start at x = y (most maps here grow like x) and expand the bracket
    # with squaring steps until below(fn(lo)) holds and below(fn(hi)) fails
    guess = np.where(np.isfinite(y) & (y > 0), y, 1.0)
    lo = np.clip(guess, 1e-300, cap / 2)
    hi = lo.copy()
    with np.errstate(all="ignore"):
        flo = fn(lo)
    fhi = flo.copy()
    step = np.full(y.shape, 2.0)
    for _ in range(64):
        bad = np.flatnonzero(~below(flo, y) & (lo > 1e-300))
        if bad.size == 0:
            break
        hi[bad], fhi[bad] = lo[bad], flo[bad]
        lo[bad] = np.maximum(lo[bad] / step[bad], 1e-300)
        step[bad] = np.minimum(step[bad] ** 2, 1e100)
        with np.errstate(all="ignore"):
            flo[bad] = fn(lo[bad])
    step[:] = 2.0
    for _ in range(64):
        bad = np.flatnonzero(below(fhi, y) & (hi < cap))
        if bad.size == 0:
            break
        lo[bad], flo[bad] = hi[bad], fhi[bad]
        with np.errstate(over="ignore"):
            hi[bad] = np.minimum(hi[bad] * step[bad], cap)
        step[bad] = np.minimum(step[bad] ** 2, 1e100)
        with np.errstate(all="ignore"):
            fhi[bad] = fn(hi[bad])
    zero = ~below(flo, y)
    top = below(fhi, y)
    a, b = np.log(lo), np.log(hi)
    ga, gb = flo - y, fhi - y
    # Anderson-Bjorck regula falsi on log x; a bisection is forced whenever
    # two steps have not halved the bracket, so jumps cost at most a
    # constant factor over plain bisection
    tol = 2 * np.finfo(float).eps * np.maximum(np.maximum(np.abs(a), np.abs(b)), 1.0)
    side = np.zeros(y.shape, dtype=np.int8)
    check = b - a
    for j in range(iters):
        live = np.flatnonzero(b - a > 2 * tol)
        if live.size == 0:
            break
        la, lb, lga, lgb, lt = a[live], b[live], ga[live], gb[live], tol[live]
        width = lb - la
        with np.errstate(all="ignore"):
            u = la - lga * width / (lgb - lga)
        u = np.where(np.isfinite(u), np.clip(u, la + lt, lb - lt), 0.5 * (la + lb))
        if j % 2 == 1:
            stalled = width > 0.5 * check[live]
            u = np.where(stalled, 0.5 * (la + lb), u)
            check[live] = width
        with np.errstate(all="ignore"):
            fu = fn(np.exp(u))
        gu = fu - y[live]
        left = below(fu, y[live])
        ls = side[live]
        with np.errstate(all="ignore"):
            # same end replaced twice in a row: damp the retained end
            mb = np.where(left & (ls == 1), 1 - gu / lga, 1.0)
            ma = np.where(~left & (ls == -1), 1 - gu / lgb, 1.0)
        lgb = lgb * np.where(mb > 0, mb, 0.5)
        lga = lga * np.where(ma > 0, ma, 0.5)
        a[live] = np.where(left, u, la)
        ga[live] = np.where(left, gu, lga)
        b[live] = np.where(left, lb, u)
        gb[live] = np.where(left, lgb, gu)
        side[live] = np.where(left, 1, -1)
    x = np.exp(b) if convention == "min" else np.exp(a)
    x = np.where(zero, 0.0, x)
    x = np.where(top, upper if math.isfinite(upper) else np.inf, x)
    return x.reshape(shape)


@dataclass
class MonotoneMap:
    """A nondecreasing map ``s(x)`` with its generalised inverse ``x(s)``."""

    forward: Callable
    inverse: Callable
    convention: str = "min"
    x_table: np.ndarray | None = None
    s_table: np.ndarray | None = None


def generalized_inverse(x_table, s_table, convention: str = "min") -> MonotoneMap:
    """Inverse of the piecewise-linear nondecreasing table ``s(x)``.

    A jump of ``s`` is encoded by repeating an ``x`` value.  On a plateau
    of ``s`` the ``min`` convention returns the left end and the ``sup``
    convention the right end; inside a jump both return the jump point.
    Beyond the table the last segment is continued linearly.
    """
    x = np.asarray(x_table, dtype=float)
    s = np.asarray(s_table, dtype=float)
    if x.size == 0:
        raise ValueError("empty table")
    if x.shape != s.shape or np.any(np.diff(x) < 0) or np.any(np.diff(s) < 0):
        raise ValueError("tables must be nondecreasing and of equal length")
    if convention not in ("min", "sup"):
        raise ValueError("convention must be 'min' or 'sup'")

    def _interp(q, i, j):
        ds = s[j] - s[i]
        t = np.where(ds > 0, (q - s[i]) / np.where(ds > 0, ds, 1.0), 0.0)
        return x[i] + t * (x[j] - x[i])

    def inverse(q):
        q = np.asarray(q, dtype=float)
        n = len(s)
        if n == 1:
            return np.full(q.shape, x[0])
        if convention == "min":
            idx = np.searchsorted(s, q, side="left")
            exact = (idx < n) & (s[np.minimum(idx, n - 1)] == q)
            i = np.clip(idx - 1, 0, n - 2)
        else:
            idx = np.searchsorted(s, q, side="right") - 1
            exact = (idx >= 0) & (s[np.clip(idx, 0, n - 1)] == q)
            i = np.clip(idx, 0, n - 2)
        out = _interp(q, i, i + 1)
        out = np.where(exact, x[np.clip(idx, 0, n - 1)], out)
        return out

    def forward(p):
        return np.interp(p, x, s)

    return MonotoneMap(forward, inverse, convention, x, s)


# ---------------------------------------------------------------------------
# trace normalisation and scaling


@dataclass(frozen=True)
class TraceNormalized(Hamiltonian):
    """``H(xi(y)) / tr H(xi(y))`` where ``xi`` inverts ``eta = int tr H``."""

    base: Hamiltonian
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form = "TraceNormalized"

    @property
    def piecewise_constant(self) -> bool:
        return bool(self.base.piecewise_constant)

    def xi(self, y):
        return invert_increasing(self.base.eta, y, upper=self.base.L)

    def primitives(self, y):
        return self.base.primitives(self.xi(y))

    def eta(self, y):
        return np.asarray(y, dtype=float)

    def breakpoints(self):
        return np.asarray(self.base.eta(self.base.breakpoints()))

    def _trace_divergent(self):
        return True


def trace_normalize(H: Hamiltonian):
    """Trace-normed reparametrisation of ``H`` and the map ``eta``.

    Returns
    -------
    Ht : Hamiltonian
        Piecewise-constant and sampled inputs give exact descriptors of the
        same kind; other forms are wrapped in :class:`TraceNormalized`.
    eta : MonotoneMap
        ``eta(x) = int_0^x tr H`` with inverse ``xi``.

    Raises
    ------
    ValueError
        If the trace integral is known to be finite.
    """
    rep = validate(H)
    if rep.limit_point is False:
        raise ValueError("finite trace integral: H is limit circle at L")
    eta = MonotoneMap(H.eta, lambda y: invert_increasing(H.eta, y, upper=H.L), "min")
    if isinstance(H, Constant):
        t = H.a0 + H.c0
        return Constant(H.a0 / t, H.b0 / t, H.c0 / t, meta={"source": "trace_normalize"}), eta
    if isinstance(H, PiecewiseConstant):
        tr = H.cells[:, 0] + H.cells[:, 2]
        bp = H.eta(H.breakpoints_)
        return PiecewiseConstant(bp, H.cells / tr[:, None], meta={"source": "trace_normalize"}), eta
    if isinstance(H, SampledPrimitive):
        y = H.A + H.C
        keep = np.concatenate(([True], np.diff(y) > 0))
        return SampledPrimitive(y[keep], H.A[keep], H.B[keep], H.C[keep], meta={"source": "trace_normalize"}), eta
    return TraceNormalized(H), eta


@dataclass(frozen=True)
class Scaled(Hamiltonian):
    """Scaled Hamiltonian ``r2 (r3 a(r1 x), b(r1 x), c(r1 x)/r3)`` on ``[0, L/r1)``."""

    base: Hamiltonian
    r1: float
    r2: float
    r3: float
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form = "Scaled"

    @property
    def piecewise_constant(self) -> bool:
        return bool(self.base.piecewise_constant)

    def primitives(self, x):
        A, B, C = self.base.primitives(self.r1 * np.asarray(x, dtype=float))
        k = self.r2 / self.r1
        return k * self.r3 * A, k * B, k * C / self.r3

    def breakpoints(self):
        return np.asarray(self.base.breakpoints()) / self.r1

    def _trace_divergent(self):
        return self.base._trace_divergent()


def scale(H: Hamiltonian, r1: float, r2: float, r3: float) -> Hamiltonian:
    """Scaled Hamiltonian; its m-function is ``r3 m((r2/r1) z)``.

    The relation is stored in ``meta["m_relation"]``.
    """
    if min(r1, r2, r3) <= 0:
        raise ValueError("scaling factors must be positive")
    L = H.L / r1
    meta = {"m_relation": {"factor": r3, "argument_scale": r2 / r1}, "source": H.form}
    k = r2 / r1
    if isinstance(H, Constant):
        return Constant(r2 * r3 * H.a0, r2 * H.b0, r2 * H.c0 / r3, L=L, meta=meta)
    if isinstance(H, PiecewiseConstant):
        cells = H.cells * np.array([r2 * r3, r2, r2 / r3])
        return PiecewiseConstant(H.breakpoints_ / r1, cells, L=L, meta=meta)
    if isinstance(H, SampledPrimitive):
        return SampledPrimitive(H.grid / r1, k * r3 * H.A, k * H.B, k * H.C / r3, L=L, meta=meta)
    return Scaled(H, r1, r2, r3, L=L, meta=meta)


@dataclass(frozen=True)
class Flipped(Hamiltonian):
    """``-J H J``: the entries ``(a, b, c)`` become ``(c, -b, a)``.

    Its m-function is ``-1/m``.
    """

    base: Hamiltonian
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form = "Flipped"

    @property
    def piecewise_constant(self) -> bool:
        return bool(self.base.piecewise_constant)

    def primitives(self, x):
        A, B, C = self.base.primitives(x)
        return C, -B, A

    def breakpoints(self):
        return self.base.breakpoints()

    def _trace_divergent(self):
        return self.base._trace_divergent()


def flip(H: Hamiltonian) -> Hamiltonian:
    """Hamiltonian ``-J H J`` with m-function ``-1/m(z)`` (recorded in ``meta``)."""
    meta = {"m_relation": "m_flip(z) = -1/m(z)", "source": H.form}
    if isinstance(H, Constant):
        return Constant(H.c0, 0.0 - H.b0, H.a0, L=H.L, meta=meta)
    if isinstance(H, PiecewiseConstant):
        return PiecewiseConstant(H.breakpoints_, H.cells[:, ::-1] * np.array([1, -1, 1]), L=H.L, meta=meta)
    if isinstance(H, PowerLawAlpha):
        return PowerLawAlpha(0.0 - H.alpha, L=H.L, meta=meta)
    return Flipped(H, L=H.L, meta=meta)


# ---------------------------------------------------------------------------
# strings


def w_closed_form(spec: dict):
    """Closed-form coefficient from a tag.

    Returns ``(w, W1, W2)``: the function, its antiderivative and the
    antiderivative of its square, all vanishing at 0 (``W1``, ``W2``).

    Tags: ``{"tag": "power", "coef": k, "exponent": p}`` for ``k x**p``;
    ``{"tag": "affine", "c": c, "slope": k}`` for ``c + k x``;
    ``{"tag": "constant", "c": c}``.
    """
    tag = spec["tag"]
    if tag == "power":
        k, p = float(spec.get("coef", 1.0)), float(spec["exponent"])
        return (
            lambda x: k * np.asarray(x, dtype=float) ** p,
            lambda x: k * np.asarray(x, dtype=float) ** (p + 1) / (p + 1),
            lambda x: k * k * np.asarray(x, dtype=float) ** (2 * p + 1) / (2 * p + 1),
        )
    if tag in ("affine", "constant"):
        c, k = float(spec.get("c", 0.0)), float(spec.get("slope", 0.0))

        def W2(x):
            x = np.asarray(x, dtype=float)
            return c * c * x + c * k * x**2 + k * k * x**3 / 3

        return (
            lambda x: c + k * np.asarray(x, dtype=float),
            lambda x: c * np.asarray(x, dtype=float) + 0.5 * k * np.asarray(x, dtype=float) ** 2,
            W2,
        )
    raise ValueError(f"unknown coefficient tag {tag!r}")


def _read_table(path, columns):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [np.array([float(r[c]) for r in rows]) for c in columns]


@dataclass(frozen=True)
class StringData:
    """Krein string with mass distribution ``w(x) = omega([0, x))``.

    Either ``w`` is a callable (absolutely continuous part) plus point
    masses ``atoms = ((x_k, m_k), ...)``, or ``table = (x, w)`` holds
    samples of the full distribution function with jumps encoded by a
    repeated ``x``.
    """

    w: Callable | None = None
    atoms: tuple = ()
    L: float = math.inf
    table: tuple | None = None
    tag: dict | None = None

    @classmethod
    def closed_form(cls, spec: dict, atoms=(), L=math.inf) -> "StringData":
        return cls(w_closed_form(spec)[0], tuple(atoms), L, None, dict(spec))

    def s_of_x(self, x):
        x = np.asarray(x, dtype=float)
        out = x + (self.w(x) if self.w is not None else 0.0)
        for xk, mk in self.atoms:
            out = out + mk * (x > xk)
        return out

    @classmethod
    def from_json(cls, obj: dict, base: Path | None = None) -> "StringData":
        L = obj.get("L", "inf")
        L = math.inf if L == "inf" else float(L)
        atoms = tuple((float(a), float(m)) for a, m in obj.get("atoms", []))
        wspec = obj["w"]
        if "csv" in wspec:
            path = Path(wspec["csv"])
            if base is not None and not path.is_absolute():
                path = base / path
            return cls(None, atoms, L, tuple(_read_table(path, ("x", "w"))))
        return cls.closed_form(wspec, atoms, L)


@dataclass(frozen=True)
class IndefiniteStringData:
    """Generalised indefinite string ``(w, upsilon)`` on ``[0, L)``.

    ``W1`` and ``W2`` are antiderivatives of ``w`` and ``w**2`` vanishing
    at 0; ``upsilon`` lists atoms ``(x_k, m_k)``.  A sampled ``table =
    (x, w)`` is read as piecewise constant with value ``w[j]`` on
    ``[x[j], x[j+1])``; ``upsilon_table = (x, U)`` adds a sampled
    distribution function of the absolutely continuous part of upsilon.
    """

    w: Callable | None = None
    W1: Callable | None = None
    W2: Callable | None = None
    upsilon: tuple = ()
    L: float = math.inf
    table: tuple | None = None
    upsilon_table: tuple | None = None
    upsilon_fn: Callable | None = None
    tag: dict | None = None

    @classmethod
    def closed_form(cls, spec: dict, upsilon=(), L=math.inf, upsilon_spec: dict | None = None) -> "IndefiniteStringData":
        """String from a coefficient tag; ``upsilon_spec`` is a tag for the
        continuous distribution function of upsilon (vanishing at 0)."""
        w, W1, W2 = w_closed_form(spec)
        U = w_closed_form(upsilon_spec)[0] if upsilon_spec else None
        return cls(w, W1, W2, tuple(upsilon), L, None, None, U, dict(spec))

    def _upsilon(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for xk, mk in self.upsilon:
            out = out + mk * (x > xk)
        if self.upsilon_table is not None:
            ux, uv = self.upsilon_table
            out = out + np.interp(x, ux, uv)
        if self.upsilon_fn is not None:
            out = out + self.upsilon_fn(x)
        return out

    def s_of_x(self, x):
        x = np.asarray(x, dtype=float)
        return x + self.W2(x) + self._upsilon(x)

    @classmethod
    def from_json(cls, obj: dict, base: Path | None = None) -> "IndefiniteStringData":
        L = obj.get("L", "inf")
        L = math.inf if L == "inf" else float(L)
        ups = obj.get("upsilon", {})
        atoms = tuple((float(a), float(m)) for a, m in ups.get("atoms", []))
        utable = None
        if "csv" in ups:
            path = Path(ups["csv"])
            if base is not None and not path.is_absolute():
                path = base / path
            utable = tuple(_read_table(path, ("x", "upsilon")))
        wspec = obj["w"]
        if "csv" in wspec:
            path = Path(wspec["csv"])
            if base is not None and not path.is_absolute():
                path = base / path
            return cls(None, None, None, atoms, L, tuple(_read_table(path, ("x", "w"))), utable)
        w, W1, W2 = w_closed_form(wspec)
        U = w_closed_form(ups["distribution"])[0] if "distribution" in ups else None
        return cls(w, W1, W2, atoms, L, None, utable, U, dict(wspec))


@dataclass(frozen=True)
class StringHamiltonian(Hamiltonian):
    """Canonical system of a string: ``A = s - x(s)``, ``B = W1(x(s))``, ``C = x(s)``.

    ``x(s)`` is the generalised inverse of ``s_of_x`` under ``convention``;
    it is constant on the image of a jump of ``s``.
    """

    s_of_x: Callable
    W1: Callable | None
    x_end: float = math.inf
    convention: str = "min"
    jumps: tuple = ()
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form = "StringHamiltonian"

    def x_of_s(self, s):
        s = np.asarray(s, dtype=float)
        return invert_increasing(self.s_of_x, s, convention=self.convention, upper=self.x_end)

    def primitives(self, s):
        s = np.asarray(s, dtype=float)
        x = self.x_of_s(s)
        B = self.W1(x) if self.W1 is not None else np.zeros_like(s)
        return s - x, np.asarray(B, dtype=float) * np.ones_like(s), x

    def eta(self, s):
        return np.asarray(s, dtype=float)

    def breakpoints(self):
        pts = []
        for xk in self.jumps:
            lo = float(self.s_of_x(xk))
            hi = float(self.s_of_x(np.nextafter(xk, np.inf)))
            pts += [lo, hi]
        if math.isfinite(self.x_end):
            pts.append(float(self.s_of_x(np.nextafter(self.x_end, 0))))
        return np.array(sorted(p for p in pts if p > 0))

    def _trace_divergent(self):
        return True

    def sample(self, x_grid) -> SampledPrimitive:
        """Sampled-primitive descriptor on the image of ``x_grid``."""
        x = np.asarray(x_grid, dtype=float)
        for xk in self.jumps:
            x = np.append(x, [xk, np.nextafter(xk, np.inf)])
        x = np.unique(x)
        s = self.s_of_x(x)
        keep = np.concatenate(([True], np.diff(s) > 0))
        x, s = x[keep], s[keep]
        B = self.W1(x) if self.W1 is not None else np.zeros_like(x)
        return SampledPrimitive(s, s - x, B, x, meta=dict(self.meta))


def _table_string(x, s, B, meta) -> SampledPrimitive:
    keep = np.concatenate(([True], np.diff(s) > 0))
    x, s, B = x[keep], s[keep], B[keep]
    if s[0] != 0:
        raise ValueError("string table must start at x = 0 with zero mass")
    return SampledPrimitive(s, s - x, B, x, meta=meta)


def _linear_slope(tag: dict | None):
    if not tag:
        return None
    if tag["tag"] == "power" and float(tag["exponent"]) == 1.0:
        return float(tag.get("coef", 1.0))
    if tag["tag"] in ("affine", "constant") and float(tag.get("c", 0.0)) == 0.0:
        return float(tag.get("slope", 0.0))
    return None


def _constant_value(tag: dict | None):
    if not tag:
        return None
    if tag["tag"] in ("affine", "constant") and float(tag.get("slope", 0.0)) == 0.0:
        return float(tag.get("c", 0.0))
    if tag["tag"] == "power" and float(tag["exponent"]) == 0.0:
        return float(tag.get("coef", 1.0))
    return None


def string_to_canonical(S: StringData) -> Hamiltonian:
    """Trace-normed diagonal Hamiltonian ``diag(1 - x'(s), x'(s))`` of a Krein string.

    ``x`` is the generalised inverse of ``s(x) = x + w(x)`` with the ``min``
    convention.  The m-functions satisfy ``z m(z) = m_D(z**2)``, recorded
    in ``meta``.
    """
    meta = {"m_relation": "z m(z) = m_D(z^2)", "source": "string"}
    slope = _linear_slope(S.tag)
    if slope is not None and not S.atoms:
        # w = k x gives s = (1 + k) x and a constant Hamiltonian
        return Constant(slope / (1 + slope), 0.0, 1 / (1 + slope), L=S.L * (1 + slope), meta=meta)
    if S.table is not None:
        x, w = (np.asarray(v, dtype=float) for v in S.table)
        if np.any(np.diff(w) < 0) or np.any(np.diff(x) < 0):
            raise ValueError("mass distribution table must be nondecreasing")
        return _table_string(x, x + w, np.zeros_like(x), meta)
    jumps = tuple(xk for xk, _ in S.atoms)
    return StringHamiltonian(S.s_of_x, None, S.L, "min", jumps, meta=meta)


def indefinite_string_to_canonical(S: IndefiniteStringData) -> Hamiltonian:
    """Hamiltonian of a generalised indefinite string.

    ``H(s) = [[1 - x', x' w(x)], [x' w(x), x']]`` with ``x`` the ``sup``
    generalised inverse of ``s(x) = x + int_0^x w**2 + upsilon([0, x))``.
    The Weyl function of the string is ``M(z) = -m(-z)`` (stored in
    ``meta``).
    """
    meta = {"m_relation": "M(z) = -m(-z)", "source": "indefinite_string"}
    c = _constant_value(S.tag)
    if c is not None and not S.upsilon and S.upsilon_table is None and S.upsilon_fn is None:
        # w = c gives s = (1 + c**2) x and a constant (rank one) Hamiltonian
        n = 1 + c * c
        return Constant(c * c / n, c / n, 1 / n, L=S.L * n, meta=meta)
    if S.table is not None:
        x, w = (np.asarray(v, dtype=float) for v in S.table)
        if np.any(np.diff(x) <= 0):
            raise ValueError("x table must be strictly increasing")
        dx = np.diff(x)
        W1 = np.concatenate(([0.0], np.cumsum(w[:-1] * dx)))
        W2 = np.concatenate(([0.0], np.cumsum(w[:-1] ** 2 * dx)))
        ups = S._upsilon(x)
        # atoms sit between the two copies of their grid point
        xs, ss, bs = [], [], []
        for j in range(len(x)):
            at = sum(mk for xk, mk in S.upsilon if xk == x[j])
            base = x[j] + W2[j] + ups[j]
            xs.append(x[j]), ss.append(base), bs.append(W1[j])
            if at > 0:
                xs.append(x[j]), ss.append(base + at), bs.append(W1[j])
        H = _table_string(np.array(xs), np.array(ss), np.array(bs), meta)
        _check_indefinite_psd(H)
        return H
    jumps = tuple(xk for xk, _ in S.upsilon)
    return StringHamiltonian(S.s_of_x, S.W1, S.L, "sup", jumps, meta=meta)


def _check_indefinite_psd(H: SampledPrimitive) -> None:
    dA, dB, dC = np.diff(H.A), np.diff(H.B), np.diff(H.C)
    gap = dA * dC - dB * dB
    scale = (dA + dC) ** 2
    if np.any(gap < -1e-10 * scale):
        raise ValueError("sampled indefinite string gives a Hamiltonian that is not PSD")


# ---------------------------------------------------------------------------
# gauge transform

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def _exp_JQ(q: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``exp(J Q s)`` for constant symmetric ``q = (a, b, c)``; shape ``s.shape + (2, 2)``."""
    ent, ls = cell_exponentials(-np.broadcast_to(q, s.shape + (3,)), s)
    return (ent * np.exp(ls)[..., None, None]).real


def _sym(v) -> np.ndarray:
    return np.array([[v[0], v[1]], [v[1], v[2]]])


def gauge_transform(
    H: Hamiltonian,
    Q: Potential,
    mesh: MeshPolicy | None = None,
    *,
    x_max: float | None = None,
    q_step: float = 0.5,
) -> SampledPrimitive:
    """Primitives of ``U0(x)^T H(x) U0(x)`` with ``U0`` solving ``J Y' + Q Y = 0``.

    ``H`` enters through its exact cell averages on the mesh (refined so
    that ``|Q| dx <= q_step`` on every cell); the conjugation inside a cell
    is integrated by 8-point Gauss-Legendre.  The result lives on
    ``[0, x_max]`` and is continued with its last cell beyond.  The
    m-function of ``(H, Q)`` equals that of the result (``meta``).
    """
    if not isinstance(Q, Potential):
        Q = Potential.constant(Q)
    mesh = mesh or MeshPolicy(kind="geometric", cells_per_octave=16)
    top = x_max or mesh.x_max or (1.0 if math.isinf(H.L) else H.L / 2)
    nodes = mesh.nodes(top)
    extra = np.concatenate([H.breakpoints(), Q.breakpoints])
    nodes = np.union1d(nodes, extra[(extra > 0) & (extra < top)])
    qn = np.abs(Q.at(nodes[:-1])).max(axis=1) * 2
    k = np.maximum(1, np.ceil(qn * np.diff(nodes) / q_step)).astype(int)
    if np.any(k > 1):
        nodes = np.concatenate([np.linspace(a, b, kk + 1)[:-1] for a, b, kk in zip(nodes[:-1], nodes[1:], k)] + [[top]])
    cells = cell_averages(H, nodes)
    dx = np.diff(nodes)
    U = np.eye(2)
    out = np.zeros((len(nodes), 3))
    for j in range(len(dx)):
        q = Q.at(nodes[j])
        s = 0.5 * dx[j] * (_GL8_X + 1.0)
        E = _exp_JQ(q, s) @ U  # U0 at the quadrature points
        Hj = _sym(cells[j])
        M = np.einsum("qji,jk,qkl->qil", E, Hj, E)
        I = 0.5 * dx[j] * np.einsum("q,qil->il", _GL8_W, M)
        out[j + 1] = out[j] + [I[0, 0], I[0, 1], I[1, 1]]
        U = _exp_JQ(q, np.array(dx[j]))[()] @ U
    meta = {"m_relation": "m(H, Q) = m(result)", "source": "gauge", "x_max": top}
    return SampledPrimitive(nodes, out[:, 0], out[:, 1], out[:, 2], L=H.L, meta=meta)


def gauge_density(H_cell, Q: Potential, x) -> np.ndarray:
    """Pointwise transformed density ``U0(x)^T H U0(x)`` for constant ``H_cell = (a, b, c)``."""
    if not isinstance(Q, Potential):
        Q = Potential.constant(Q)
    U = zero_energy_matrix(Q, float(x)).matrix()
    return U.T @ _sym(H_cell) @ U

"""Hamiltonians of 2x2 canonical systems ``J Y' = z H Y`` on ``[0, L)``.

A Hamiltonian is stored through its primitive integrals

    A(x) = int_0^x a,   B(x) = int_0^x b,   C(x) = int_0^x c,

because every asymptotic statement about the m-function is phrased in
terms of them, and because exact cell averages of ``H`` are simple
differences of primitives.  Densities are derived on demand and never
stored.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, ClassVar

import numpy as np

__all__ = [
    "Hamiltonian",
    "Constant",
    "PowerLawAlpha",
    "StepExample",
    "DiagonalPower",
    "PiecewiseConstant",
    "SampledPrimitive",
    "Primitive",
    "PrimitiveIntegrals",
    "ValidationReport",
    "MeshPolicy",
    "validate",
    "primitive_integrals",
    "discretize",
    "cell_averages",
    "geometric_nodes",
    "dirac_constant",
    "from_json",
    "load",
    "Potential",
    "clamp_psd",
    "PSD_RTOL",
]

#: relative tolerance on ``det H`` before a cell is clamped to the PSD cone
PSD_RTOL = 1e-12


def dirac_constant(kappa: float) -> float:
    """Normalisation constant ``sqrt(pi) / (2**kappa * Gamma(kappa + 1/2))``."""
    return math.sqrt(math.pi) / (2.0**kappa * math.gamma(kappa + 0.5))


def _as_length(L) -> float:
    if isinstance(L, str):
        if L.lower() in ("inf", "infinity", "+inf"):
            return math.inf
        L = float(L)
    L = float(L)
    if not L > 0:
        raise ValueError(f"domain length must be positive, got {L}")
    return L


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PrimitiveIntegrals:
    """Values ``A(x), B(x), C(x)`` at a single point."""

    x: float
    A: float
    B: float
    C: float

    def cauchy_schwarz_gap(self) -> float:
        return self.A * self.C - self.B**2


@dataclass
class ValidationReport:
    valid: bool
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    #: True if ``int_0^L tr H = inf`` is established, False if finite, None if unknown
    limit_point: bool | None = None

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "limit_point": self.limit_point,
            "violations": list(self.violations),
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class MeshPolicy:
    """Breakpoint placement for :func:`discretize`.

    ``kind="geometric"`` puts one cell on ``[0, x_min]`` and then
    ``cells_per_octave`` cells per doubling up to ``x_max``; this is the
    grading needed for Hamiltonians with power-law singularities at 0.
    ``kind="uniform"`` uses ``n_cells`` equal cells on ``[0, x_max]``.
    """

    kind: str = "geometric"
    cells_per_octave: int = 48
    n_cells: int = 256
    x_min: float | None = None
    x_max: float | None = None

    def nodes(self, x_max: float | None = None) -> np.ndarray:
        top = self.x_max if x_max is None else x_max
        if top is None or not top > 0:
            raise ValueError("mesh policy needs a positive x_max")
        if self.kind == "uniform":
            if self.n_cells < 1:
                raise ValueError("mesh policy produces zero cells")
            return np.linspace(0.0, top, self.n_cells + 1)
        if self.kind != "geometric":
            raise ValueError(f"unknown mesh kind {self.kind!r}")
        if self.cells_per_octave < 1:
            raise ValueError("mesh policy produces zero cells")
        lo = self.x_min if self.x_min is not None else top * 2.0**-30
        return np.concatenate(([0.0], geometric_nodes(min(lo, top), top, self.cells_per_octave)))


def geometric_nodes(lo: float, hi: float, per_octave: int) -> np.ndarray:
    """Geometric nodes from ``lo`` to ``hi`` inclusive, ``per_octave`` per doubling."""
    if hi <= lo:
        return np.array([hi])
    n = max(1, int(math.ceil(math.log2(hi / lo) * per_octave)))
    nodes = np.exp(np.linspace(math.log(lo), math.log(hi), n + 1))
    nodes[0], nodes[-1] = lo, hi
    return nodes


class Hamiltonian:
    """Base class of all Hamiltonian descriptors.

    Subclasses are immutable and implement :meth:`primitives`, which must
    accept arrays and return ``(A, B, C)`` evaluated pointwise.
    """

    form: ClassVar[str] = ""
    #: True when the density is constant between consecutive breakpoints
    piecewise_constant: ClassVar[bool] = False
    L: float
    meta: dict

    # -- interface ---------------------------------------------------------
    def primitives(self, x):
        raise NotImplementedError

    def breakpoints(self) -> np.ndarray:
        """Points in ``(0, L)`` where the density may jump."""
        return np.empty(0)

    def params(self) -> dict:
        raise TypeError(f"{type(self).__name__} has no JSON representation")

    def _check(self, report: ValidationReport) -> None:
        pass

    def _trace_divergent(self) -> bool | None:
        return None

    # -- derived -----------------------------------------------------------
    def eta(self, x):
        """Trace integral ``int_0^x tr H``."""
        A, _, C = self.primitives(x)
        return A + C

    def to_json(self) -> dict:
        return {"form": self.form, "params": self.params(), "L": _length_json(self.L)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _length_json(L: float):
    return "inf" if math.isinf(L) else L


def _check_cell(a, b, c, label, report: ValidationReport) -> None:
    if a < 0 or c < 0:
        report.violations.append(f"{label}: negative diagonal entry (a={a:g}, c={c:g})")
        return
    det = a * c - b * b
    if det < -PSD_RTOL * (a + c) ** 2:
        report.violations.append(f"{label}: not positive semidefinite, det = {det:g} < 0")
    if a == 0 and b == 0 and c == 0:
        report.violations.append(f"{label}: H vanishes identically")


@dataclass(frozen=True)
class Constant(Hamiltonian):
    a0: float
    b0: float
    c0: float
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form: ClassVar[str] = "Constant"
    piecewise_constant: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "L", _as_length(self.L))

    def primitives(self, x):
        x = np.asarray(x, dtype=float)
        return self.a0 * x, self.b0 * x, self.c0 * x

    def params(self):
        return {"a0": self.a0, "b0": self.b0, "c0": self.c0}

    def _check(self, report):
        _check_cell(self.a0, self.b0, self.c0, "H", report)
        if self.b0 == 0 and self.c0 == 0:
            report.violations.append("excluded case: b = c = 0 almost everywhere")

    def _trace_divergent(self):
        return math.isinf(self.L) and self.a0 + self.c0 > 0


def _p(alpha: float, x):
    """Primitive of ``p_alpha``."""
    return x ** (1.0 + alpha) if alpha >= 0 else x


@dataclass(frozen=True)
class PowerLawAlpha(Hamiltonian):
    """``H = diag(p_alpha, p_{-alpha})`` with ``p_alpha = (1+alpha) x**alpha`` for
    ``alpha >= 0`` and ``1`` otherwise."""

    alpha: float
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form: ClassVar[str] = "PowerLawAlpha"

    @property
    def piecewise_constant(self) -> bool:
        return self.alpha == 0

    def __post_init__(self):
        object.__setattr__(self, "L", _as_length(self.L))

    def primitives(self, x):
        x = np.asarray(x, dtype=float)
        return _p(self.alpha, x), np.zeros_like(x), _p(-self.alpha, x)

    def params(self):
        return {"alpha": self.alpha}

    def _check(self, report):
        if not math.isfinite(self.alpha):
            report.violations.append("alpha must be finite")

    def _trace_divergent(self):
        return math.isinf(self.L)


@dataclass(frozen=True)
class StepExample(Hamiltonian):
    """``H = diag(1_[1,inf), 1_[0,1))``; its m-function is ``-1/z``."""

    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form: ClassVar[str] = "StepExample"
    piecewise_constant: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "L", _as_length(self.L))

    def primitives(self, x):
        x = np.asarray(x, dtype=float)
        return np.maximum(x - 1.0, 0.0), np.zeros_like(x), np.minimum(x, 1.0)

    def breakpoints(self):
        return np.array([1.0]) if self.L > 1 else np.empty(0)

    def params(self):
        return {}

    def _trace_divergent(self):
        return math.isinf(self.L)


@dataclass(frozen=True)
class DiagonalPower(Hamiltonian):
    """Radial model ``H = diag(scale**-2 x**(-2 kappa), scale**2 x**(2 kappa))``.

    This is ``U(0,x)^* U(0,x)`` for the unperturbed radial Dirac operator
    when ``scale`` is :func:`dirac_constant` ``(kappa)`` (the default).
    """

    kappa: float
    scale: float | None = None
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form: ClassVar[str] = "DiagonalPower"

    def __post_init__(self):
        object.__setattr__(self, "L", _as_length(self.L))
        if self.scale is None:
            object.__setattr__(self, "scale", dirac_constant(self.kappa))

    def primitives(self, x):
        x = np.asarray(x, dtype=float)
        k, s = self.kappa, self.scale
        A = x ** (1 - 2 * k) / ((1 - 2 * k) * s * s)
        C = s * s * x ** (1 + 2 * k) / (1 + 2 * k)
        return A, np.zeros_like(x), C

    def params(self):
        return {"kappa": self.kappa, "scale": self.scale}

    def _check(self, report):
        if not abs(self.kappa) < 0.5:
            report.violations.append(
                f"kappa = {self.kappa:g}: entries x**(+-2 kappa) are not integrable at 0 unless |kappa| < 1/2"
            )
        if not self.scale > 0:
            report.violations.append("scale must be positive")

    def _trace_divergent(self):
        return math.isinf(self.L)


@dataclass(frozen=True)
class PiecewiseConstant(Hamiltonian):
    """Cell ``j`` covers ``[breakpoints[j], breakpoints[j+1])``; the last cell
    extends to ``L``.  ``breakpoints[0]`` must be 0."""

    breakpoints_: np.ndarray
    cells: np.ndarray
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form: ClassVar[str] = "PiecewiseConstant"
    piecewise_constant: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "L", _as_length(self.L))
        bp = _frozen(self.breakpoints_)
        cells = _frozen(np.reshape(self.cells, (-1, 3)))
        if bp.ndim != 1 or len(bp) != len(cells) or len(bp) == 0:
            raise ValueError("need one breakpoint per cell")
        if bp[0] != 0 or np.any(np.diff(bp) <= 0) or bp[-1] >= self.L:
            raise ValueError("breakpoints must start at 0, increase strictly and stay below L")
        object.__setattr__(self, "breakpoints_", bp)
        object.__setattr__(self, "cells", cells)
        right = np.append(bp[1:], self.L)
        widths = right[:-1] - bp[:-1]
        cum = np.zeros((len(bp), 3))
        cum[1:] = np.cumsum(cells[:-1] * widths[:, None], axis=0)
        object.__setattr__(self, "_cum", cum)

    def primitives(self, x):
        x = np.asarray(x, dtype=float)
        j = np.clip(np.searchsorted(self.breakpoints_, x, side="right") - 1, 0, len(self.cells) - 1)
        dx = x - self.breakpoints_[j]
        out = self._cum[j] + self.cells[j] * dx[..., None]
        return out[..., 0], out[..., 1], out[..., 2]

    def breakpoints(self):
        return np.asarray(self.breakpoints_[1:])

    def params(self):
        return {"breakpoints": self.breakpoints_.tolist(), "cells": self.cells.tolist()}

    def _check(self, report):
        for j, (a, b, c) in enumerate(self.cells):
            _check_cell(a, b, c, f"cell {j}", report)
        if np.all(self.cells[:, 1] == 0) and np.all(self.cells[:, 2] == 0):
            report.violations.append("excluded case: b = c = 0 almost everywhere")

    def _trace_divergent(self):
        if math.isinf(self.L):
            return bool(self.cells[-1, 0] + self.cells[-1, 2] > 0)
        return False


@dataclass(frozen=True)
class SampledPrimitive(Hamiltonian):
    """Primitive integrals tabulated on ``grid``.

    Between grid points the primitives are interpolated linearly (constant
    densities per cell); beyond the last grid point the last cell's
    densities are continued up to ``L``.  A grid not starting at 0 gets an
    implicit first cell ``[0, grid[0]]``.
    """

    grid: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    L: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)
    form: ClassVar[str] = "SampledPrimitive"
    piecewise_constant: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "L", _as_length(self.L))
        g, A, B, C = (np.asarray(v, dtype=float) for v in (self.grid, self.A, self.B, self.C))
        if not (g.shape == A.shape == B.shape == C.shape) or g.ndim != 1 or len(g) == 0:
            raise ValueError("grid, A, B, C must be 1-d arrays of equal length")
        if g[0] < 0 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be nonnegative and strictly increasing")
        if g[0] > 0:
            g, A, B, C = (np.concatenate(([0.0], v)) for v in (g, A, B, C))
        elif A[0] != 0 or B[0] != 0 or C[0] != 0:
            raise ValueError("primitives must vanish at x = 0")
        if len(g) < 2:
            raise ValueError("need at least one cell")
        for name, v in zip(("grid", "A", "B", "C"), (g, A, B, C)):
            object.__setattr__(self, name, _frozen(v))
        dg = g[-1] - g[-2]
        tail = np.array([A[-1] - A[-2], B[-1] - B[-2], C[-1] - C[-2]]) / dg
        object.__setattr__(self, "_tail", tail)

    def primitives(self, x):
        x = np.asarray(x, dtype=float)
        g = self.grid
        out = []
        for v, slope in zip((self.A, self.B, self.C), self._tail):
            inner = np.interp(x, g, v)
            out.append(np.where(x > g[-1], v[-1] + slope * (x - g[-1]), inner))
        return tuple(out)

    def breakpoints(self):
        g = self.grid[1:]
        return np.asarray(g[g < self.L])

    def params(self):
        return {
            "grid": self.grid.tolist(),
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
        }

    def _check(self, report):
        dA, dB, dC = np.diff(self.A), np.diff(self.B), np.diff(self.C)
        scale = np.maximum(np.abs(dA) + np.abs(dC), 1e-300)
        if np.any(dA < -PSD_RTOL * scale):
            report.violations.append("A is not nondecreasing")
        if np.any(dC < -PSD_RTOL * scale):
            report.violations.append("C is not nondecreasing")
        if not all(np.all(np.isfinite(v)) for v in (self.grid, self.A, self.B, self.C)):
            report.violations.append("primitives are not finite")
            return
        gap = np.clip(dA, 0, None) * np.clip(dC, 0, None) - dB * dB
        bad = np.nonzero(gap < -PSD_RTOL * scale**2)[0]
        if len(bad):
            report.violations.append(
                f"|B increment| exceeds sqrt(dA dC) in {len(bad)} cell(s), first at grid index {bad[0]}"
            )
        zero = (dA == 0) & (dB == 0) & (dC == 0)
        if np.any(zero):
            report.violations.append(f"H vanishes identically on {int(zero.sum())} cell(s)")
        if np.all(dB == 0) and np.all(dC == 0):
            report.violations.append("excluded case: b = c = 0 almost everywhere")
        report.warnings.append("unverifiable: limit-point condition cannot be certified from finite sampled data")

    @classmethod
    def from_functions(cls, A: Callable, B: Callable, C: Callable, grid, L=math.inf, **meta):
        grid = np.asarray(grid, dtype=float)
        return cls(grid, A(grid), B(grid), C(grid), L=L, meta=meta)

    @classmethod
    def from_csv(cls, path, L=math.inf):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        cols = {k: np.array([float(r[k]) for r in rows]) for k in ("x", "A", "B", "C")}
        return cls(cols["x"], cols["A"], cols["B"], cols["C"], L=L)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "A", "B", "C"])
            for row in zip(self.grid, self.A, self.B, self.C):
                w.writerow([f"{v:.17g}" for v in row])


@dataclass(frozen=True)
class Primitive(Hamiltonian):
    """Hamiltonian given by closed-form primitive callables (not serialisable).

    ``breaks`` lists known density discontinuities.  Used for analytic
    test Hamiltonians whose primitives are known but which fit none of the
    named families.
    """

    A_: Callable
    B_: Callable
    C_: Callable
    L: float = math.inf
    breaks: tuple = ()
    divergent: bool | None = None
    meta: dict = field(default_factory=dict, compare=False)
    form: ClassVar[str] = "Primitive"

    def __post_init__(self):
        object.__setattr__(self, "L", _as_length(self.L))

    def primitives(self, x):
        x = np.asarray(x, dtype=float)
        return (
            np.asarray(self.A_(x), dtype=float) * np.ones_like(x),
            np.asarray(self.B_(x), dtype=float) * np.ones_like(x),
            np.asarray(self.C_(x), dtype=float) * np.ones_like(x),
        )

    def breakpoints(self):
        return np.array(sorted(b for b in self.breaks if 0 < b < self.L), dtype=float)

    def _check(self, report):
        top = 1e6 if math.isinf(self.L) else self.L
        probe = SampledPrimitive.from_functions(self.A_, self.B_, self.C_, geometric_nodes(top * 1e-12, top, 8))
        sub = ValidationReport(True)
        probe._check(sub)
        report.violations.extend(f"sampled check: {v}" for v in sub.violations)

    def _trace_divergent(self):
        return self.divergent


# ---------------------------------------------------------------------------
def validate(H: Hamiltonian) -> ValidationReport:
    """Check the structural hypotheses on ``H``; never raises."""
    report = ValidationReport(True)
    try:
        H._check(report)
        div = H._trace_divergent()
    except Exception as exc:  # malformed parameters end up here
        report.violations.append(f"could not evaluate descriptor: {exc}")
        div = None
    report.limit_point = div
    if div is False:
        report.violations.append("limit-circle: trace integral finite")
    elif div is None and not any(w.startswith("unverifiable") for w in report.warnings):
        report.warnings.append("unverifiable: divergence of the trace integral not established")
    report.valid = not report.violations
    return report


def primitive_integrals(H: Hamiltonian, x: float) -> PrimitiveIntegrals:
    if not (0 <= x < H.L):
        raise ValueError(f"x = {x} outside [0, {H.L})")
    A, B, C = (float(v) for v in H.primitives(x))
    return PrimitiveIntegrals(x, A, B, C)


def cell_averages(H: Hamiltonian, nodes) -> np.ndarray:
    """Exact averages ``(a, b, c)`` of ``H`` over consecutive ``nodes``.

    The result is clamped to the PSD cone when ``det`` is negative within
    :data:`PSD_RTOL`; larger violations raise ``ValueError``.
    """
    nodes = np.asarray(nodes, dtype=float)
    A, B, C = H.primitives(nodes)
    w = np.diff(nodes)
    cells = np.stack([np.diff(A), np.diff(B), np.diff(C)], axis=-1) / w[:, None]
    # differences of primitives lose entries far below the primitives themselves
    scale = np.max(np.abs([A, B, C]), axis=0)
    noise = 4 * np.finfo(float).eps * np.maximum(scale[1:], scale[:-1]) / w
    return clamp_psd(cells, noise)


def clamp_psd(cells: np.ndarray, noise=0.0) -> np.ndarray:
    """Project cell averages that are PSD up to rounding onto the PSD cone.

    ``noise`` is an absolute rounding allowance per entry (scalar or one
    value per cell), for averages formed from differences of large
    primitives.  Larger violations raise ``ValueError``.
    """
    cells = np.array(cells, dtype=float)
    a, b, c = cells[:, 0], cells[:, 1], cells[:, 2]
    tr = np.abs(a) + np.abs(c)
    noise = np.asarray(noise, dtype=float)
    slack = PSD_RTOL * tr + noise
    if not (np.all(a >= -slack) and np.all(c >= -slack)):
        raise ValueError("negative diagonal in cell average")
    a = np.clip(a, 0, None)
    c = np.clip(c, 0, None)
    det = a * c - b * b
    tol = PSD_RTOL * tr**2 + 2 * noise * (tr + np.abs(b) + noise) + 1e-300
    if not np.all(det >= -tol - 4 * np.finfo(float).eps * (b * b)):
        raise ValueError("cell average is not positive semidefinite")
    b = np.where(det < 0, np.sign(b) * np.sqrt(a * c), b)
    return np.stack([a, b, c], axis=-1)


def discretize(H: Hamiltonian, policy: MeshPolicy | None = None) -> PiecewiseConstant:
    """Piecewise-constant Hamiltonian with the same primitives at every node.

    Intrinsic breakpoints of ``H`` inside the mesh window are added to the
    nodes.  The last cell continues to ``L`` with the average of ``H`` over
    ``[x_max, min(2 x_max, L)]``.
    """
    policy = policy or MeshPolicy()
    x_max = policy.x_max
    if x_max is None:
        x_max = 1.0 if math.isinf(H.L) else H.L / 2
    if x_max >= H.L:
        raise ValueError("mesh must end below L")
    nodes = policy.nodes(x_max)
    extra = H.breakpoints()
    nodes = np.union1d(nodes, extra[(extra > 0) & (extra < x_max)])
    tail_end = min(2 * x_max, H.L)
    cells = cell_averages(H, np.append(nodes, tail_end))
    return PiecewiseConstant(nodes, cells, L=H.L, meta={"source": H.form})


# ---------------------------------------------------------------------------
_FORMS = {
    "Constant": lambda p, L: Constant(p["a0"], p["b0"], p["c0"], L=L),
    "PowerLawAlpha": lambda p, L: PowerLawAlpha(p["alpha"], L=L),
    "StepExample": lambda p, L: StepExample(L=L),
    "DiagonalPower": lambda p, L: DiagonalPower(p["kappa"], p.get("scale"), L=L),
    "PiecewiseConstant": lambda p, L: PiecewiseConstant(p["breakpoints"], p["cells"], L=L),
}


def from_json(obj: dict, base: Path | None = None) -> Hamiltonian:
    """Build a descriptor from ``{"form": ..., "params": {...}, "L": number|"inf"}``.

    ``SampledPrimitive`` accepts either inline arrays ``grid, A, B, C`` or
    ``{"csv": path}`` with columns ``x,A,B,C`` (relative to ``base``).
    """
    form = obj["form"]
    params = obj.get("params", {})
    L = _as_length(obj.get("L", "inf"))
    if form == "SampledPrimitive":
        if "csv" in params:
            path = Path(params["csv"])
            if base is not None and not path.is_absolute():
                path = base / path
            return SampledPrimitive.from_csv(path, L=L)
        return SampledPrimitive(params["grid"], params["A"], params["B"], params["C"], L=L)
    try:
        build = _FORMS[form]
    except KeyError:
        raise ValueError(f"unknown Hamiltonian form {form!r}") from None
    return build(params, L)


def load(path) -> Hamiltonian:
    path = Path(path)
    return from_json(json.loads(path.read_text()), base=path.parent)


@dataclass(frozen=True)
class Potential:
    """Piecewise-constant symmetric field ``Q`` (no sign condition).

    Cell ``j`` with entries ``(a, b, c)`` covers ``[breakpoints[j], breakpoints[j+1])``,
    the last cell extends to infinity.
    """

    breakpoints: np.ndarray
    cells: np.ndarray

    def __post_init__(self):
        bp = _frozen(self.breakpoints)
        cells = _frozen(np.reshape(self.cells, (-1, 3)))
        if len(bp) != len(cells) or bp[0] != 0 or np.any(np.diff(bp) <= 0):
            raise ValueError("potential needs increasing breakpoints starting at 0, one per cell")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def constant(cls, Q) -> "Potential":
        Q = np.asarray(Q, dtype=float)
        if Q.shape == (2, 2):
            if Q[0, 1] != Q[1, 0]:
                raise ValueError("Q must be symmetric")
            Q = np.array([Q[0, 0], Q[0, 1], Q[1, 1]])
        return cls(np.array([0.0]), Q.reshape(1, 3))

    def at(self, x) -> np.ndarray:
        j = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, len(self.cells) - 1)
        return self.cells[j]

    def primitives(self, x) -> np.ndarray:
        """``int_0^x Q`` with entries ``(a, b, c)`` along the last axis."""
        x = np.asarray(x, dtype=float)
        bp = self.breakpoints
        cum = np.zeros((len(bp), 3))
        cum[1:] = np.cumsum(self.cells[:-1] * np.diff(bp)[:, None], axis=0)
        j = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, len(self.cells) - 1)
        return cum[j] + self.cells[j] * (x - bp[j])[..., None]

    def norm_bound(self) -> float:
        """Largest entry modulus over all cells."""
        return float(np.abs(self.cells).max())

    def to_json(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "cells": self.cells.tolist()}

    @classmethod
    def from_json(cls, obj) -> "Potential":
        return cls(obj["breakpoints"], obj["cells"])

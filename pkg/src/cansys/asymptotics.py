"""Regular variation tools and numerical checks of high-energy asymptotics.

The checks are ladder based: a claimed relation ``ratio(r, mu) -> 1`` is
tabulated on a geometric ladder of ``r`` for a fixed set of probe points
``mu`` and passes when the last two rungs are within tolerance and the
deviation does not grow at the last rung.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .hamiltonian import Hamiltonian
from .transforms import (
    StringData,
    indefinite_string_to_canonical,
    invert_increasing,
    string_to_canonical,
)
from .weyl import Alpha, TruncationPolicy, constant_from_m, d_nu, m_values, upper_root

__all__ = [
    "RVProfile",
    "rv_index_estimate",
    "f_scale",
    "g_scale",
    "hamiltonian_scales",
    "karamata_generate",
    "KARAMATA_EPS",
    "InverseCheckReport",
    "asymptotic_inverse_check",
    "VerificationReport",
    "verify",
    "THEOREMS",
    "PROBES",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1
PROBES = (1j, 2j, 1 + 1j, -1 + 2j)
THEOREMS = ("const_limit", "alpha_positive", "alpha_negative", "rapid", "general_Q", "string", "indefinite_string")


# ---------------------------------------------------------------------------
# regular variation


@dataclass
class RVProfile:
    """Estimated index of regular variation.

    ``index`` is ``inf`` for rapid variation.  ``ladder`` and ``samples``
    hold the evaluated points and values; ``local`` the slopes of
    ``log F`` between consecutive ladder points (read towards the side).
    """

    index: float
    spread: float
    side: str
    ladder: np.ndarray
    samples: np.ndarray
    local: np.ndarray

    def to_dict(self) -> dict:
        return {
            "index": self.index if math.isfinite(self.index) else "inf",
            "spread": self.spread,
            "side": self.side,
            "ladder": self.ladder.tolist(),
            "samples": self.samples.tolist(),
            "local_slopes": self.local.tolist(),
        }


def _default_ladder(side: str) -> np.ndarray:
    k = np.arange(0, 13) / 2.0
    return 10.0 ** -k[::-1] if side == "at_zero" else 10.0**k


def _fit(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.polyfit(u, v, 1)[0])


def rv_index_estimate(F: Callable, side: str = "at_infinity", ladder=None) -> RVProfile:
    """Index of regular variation of ``F`` at 0 or at infinity.

    The index is the least-squares slope of ``log F`` against ``log x`` on
    the half of the geometric ladder closest to the side.  The spread is
    the larger of the range of local slopes on that half and the change of
    the fit when the ladder is shifted by half a step.  A spread above 0.5
    with local slopes growing monotonically in modulus is reported as rapid
    variation (``index = inf``).

    At 0 the index follows the convention that ``F`` is regularly varying
    with index ``a`` when ``1/F(1/x)`` is at infinity, so ``x**a`` has
    index ``a`` on both sides.

    Raises
    ------
    ValueError
        If a sample is not positive.
    """
    if side not in ("at_zero", "at_infinity"):
        raise ValueError("side must be 'at_zero' or 'at_infinity'")
    x = np.sort(np.asarray(ladder if ladder is not None else _default_ladder(side), dtype=float))
    if len(x) < 4 or np.any(x <= 0):
        raise ValueError("ladder needs at least 4 positive points")
    step = math.sqrt(x[1] / x[0])
    vals = np.asarray(F(x), dtype=float)
    shifted = np.asarray(F(x * step if side == "at_infinity" else x / step), dtype=float)
    if np.any(~(vals > 0)) or np.any(~(shifted > 0)):
        raise ValueError("F must be positive on the ladder")
    u, v, vs = np.log(x), np.log(vals), np.log(shifted)
    us = u + (math.log(step) if side == "at_infinity" else -math.log(step))
    half = slice(len(x) // 2, None) if side == "at_infinity" else slice(0, len(x) - len(x) // 2)
    idx = _fit(u[half], v[half])
    idx_shift = _fit(us[half], vs[half])
    local = np.diff(v[half]) / np.diff(u[half])
    if side == "at_zero":
        local = local[::-1]
    spread = float(max(np.ptp(local), abs(idx - idx_shift)))
    growing = np.all(np.diff(np.abs(local)) > 0)
    if spread > 0.5 and growing and abs(local[-1]) > 2 * max(abs(local[0]), 0.5):
        idx = math.inf if local[-1] > 0 else -math.inf
    return RVProfile(idx, spread, side, x, vals, local)


def _solve_scale(P: Callable, trace: Callable | None, r) -> np.ndarray:
    """``r * eta(x)`` with ``x`` solving ``eta(x) P(x) = r**-2`` (``eta(x) = x`` by default)."""
    r = np.asarray(r, dtype=float)
    eta = trace if trace is not None else (lambda x: np.asarray(x, dtype=float))

    def lhs(x):
        with np.errstate(all="ignore"):
            return np.log(eta(x)) + np.log(P(x))

    x = invert_increasing(lhs, -2.0 * np.log(r), iters=200)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("scale equation has no root on the search bracket")
    # x * P(x) must be increasing around each root
    lo, hi = lhs(x * (1 - 1e-6)), lhs(x * (1 + 1e-6))
    if np.any(~(hi > lo)):
        raise ValueError("x -> x P(x) is not increasing near the root")
    return r * eta(x)


def f_scale(A: Callable, trace: Callable | None = None) -> Callable:
    """Scale function ``f(r) = r F(r**2)``, ``F`` the inverse of ``x -> 1/(x A(x))``.

    For a Hamiltonian that is not trace normed pass ``trace = eta``; the
    function is then computed for its trace-normed reparametrisation, i.e.
    from ``eta(x) A(x) = r**-2`` with ``f = r eta(x)``.  Equivalently
    ``r f(r) A~(f(r)/r) = 1`` with ``A~ = A o eta^-1``.
    """

    def f(r):
        return _solve_scale(A, trace, r)

    return f


def g_scale(C: Callable, trace: Callable | None = None) -> Callable:
    """Scale function ``g(r) = r G(r**2)``, ``G`` the inverse of ``x -> 1/(x C(x))``."""

    def g(r):
        return _solve_scale(C, trace, r)

    return g


def hamiltonian_scales(H: Hamiltonian) -> tuple[Callable, Callable]:
    """``(f, g)`` of the trace-normed reparametrisation of ``H``."""
    A = lambda x: H.primitives(x)[0]  # noqa: E731
    C = lambda x: H.primitives(x)[2]  # noqa: E731
    return f_scale(A, H.eta), g_scale(C, H.eta)


def _eps_arctan(x0: float, x: float) -> float:
    # in u = log t the integrand atan(exp(-u)) decays exponentially
    return quad(lambda u: math.atan(math.exp(-u)), math.log(x0), math.log(x), limit=200)[0]


#: decaying functions ``eps`` and their integrals ``int_{x0}^x eps(t)/t dt``
KARAMATA_EPS = {
    "zero": lambda x0, x: np.zeros_like(x),
    "inv_log": lambda x0, x: np.log(np.log(x) / math.log(x0)),
    "inv_log_sq": lambda x0, x: 1.0 / math.log(x0) - 1.0 / np.log(x),
    "arctan": lambda x0, x: np.vectorize(lambda v: _eps_arctan(x0, v))(x),
}


def karamata_generate(eta_limit: float = 0.0, eps: str = "zero", x0: float = math.e) -> Callable:
    """Slowly varying function ``exp(eta_limit + int_{x0}^x eps(t)/t dt)``.

    ``eps`` names a decaying function from :data:`KARAMATA_EPS`:
    ``1/log t``, ``1/log(t)**2``, ``pi/2 - arctan t`` or zero.  The result
    is defined for ``x > 1``.
    """
    try:
        integral = KARAMATA_EPS[eps]
    except KeyError:
        raise ValueError(f"unknown eps {eps!r}; choose from {sorted(KARAMATA_EPS)}") from None

    def L(x):
        x = np.asarray(x, dtype=float)
        return np.exp(eta_limit + integral(x0, x))

    return L


@dataclass
class InverseCheckReport:
    x: np.ndarray
    ratio: np.ndarray
    y: np.ndarray
    inverse_ratio: np.ndarray
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "ratio": self.ratio.tolist(),
            "y": self.y.tolist(),
            "inverse_ratio": self.inverse_ratio.tolist(),
            "tol": self.tol,
            "passed": self.passed,
        }


def asymptotic_inverse_check(F0: Callable, F: Callable, ladder, tol: float = 0.05) -> InverseCheckReport:
    """Compare ``F/F0`` and the ratio of the inverses ``f/f0`` along ``ladder``.

    ``ladder`` is ordered towards the limit (increasing for infinity,
    decreasing for 0).  The inverses are evaluated at ``y = F0(x)`` by
    bisection.  Passes when both ratios are within ``tol`` of 1 at the last
    point.
    """
    x = np.asarray(ladder, dtype=float)
    f0x, fx = np.asarray(F0(x), dtype=float), np.asarray(F(x), dtype=float)
    ratio = fx / f0x
    y = f0x
    inv0 = invert_increasing(F0, y, iters=200)
    inv = invert_increasing(F, y, iters=200)
    inverse_ratio = inv / inv0
    passed = bool(abs(ratio[-1] - 1) <= tol and abs(inverse_ratio[-1] - 1) <= tol)
    return InverseCheckReport(x, ratio, y, inverse_ratio, tol, passed)


# ---------------------------------------------------------------------------
# theorem verification


@dataclass
class VerificationReport:
    """Ratio table of a theorem check.

    ``ratios`` has one row per ladder rung and one column per probe;
    ``status`` is ``"pass"``, ``"fail"`` or ``"inconclusive"`` (an
    m-function evaluation did not converge).
    """

    theorem_id: str
    scenario: str
    ladder: np.ndarray
    probes: tuple
    ratios: np.ndarray
    tol: float
    status: str
    diagnostics: dict = field(default_factory=dict)
    radii: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.ratios - 1)

    def rows(self):
        """Rows ``(r, mu, ratio, |ratio - 1|)`` ordered by ``(r, mu)``."""
        for i, r in enumerate(self.ladder):
            for j, mu in enumerate(self.probes):
                yield float(r), complex(mu), complex(self.ratios[i, j]), float(abs(self.ratios[i, j] - 1))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "theorem_id": self.theorem_id,
            "scenario": self.scenario,
            "tol": self.tol,
            "status": self.status,
            "rows": [
                {"r": r, "mu": [mu.real, mu.imag], "ratio": [q.real, q.imag], "deviation": d}
                for r, mu, q, d in self.rows()
            ],
            "diagnostics": _jsonable(self.diagnostics),
        }

    def table(self) -> str:
        lines = [f"{self.theorem_id} on {self.scenario}: {self.status.upper()} (tol {self.tol:g})"]
        lines.append(f"{'r':>12} {'mu':>16} {'Re ratio':>14} {'Im ratio':>14} {'|ratio-1|':>12}")
        for r, mu, q, d in self.rows():
            lines.append(f"{r:12.4e} {str(mu):>16} {q.real:14.6e} {q.imag:14.6e} {d:12.4e}")
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, float)):
        v = float(obj) + 0.0
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def default_ladder(rungs: int = 8, start: float = 10.0, factor: float = 10.0) -> np.ndarray:
    return start * factor ** np.arange(rungs)


def _judge(dev: np.ndarray, tol: float) -> str:
    worst = dev.max(axis=1)
    if len(worst) < 2:
        return "pass" if worst[-1] <= tol else "fail"
    ok = worst[-1] <= tol and worst[-2] <= tol and worst[-1] <= worst[-2] + 0.1 * tol
    return "pass" if ok else "fail"


def _m_table(H: Hamiltonian, z: np.ndarray, policy, Q=None):
    v, r, _, conv = m_values(H, z, policy, strict=False, Q=Q)
    return v, r, conv


def _hyp_ratio(num: np.ndarray, den: np.ndarray) -> dict:
    q = np.abs(num) / np.maximum(den, 1e-300)
    return {"values": q, "decaying": bool(np.all(np.diff(q) <= 1e-12 * q[:-1] + 1e-15))}


def _xi(H: Hamiltonian, y):
    return invert_increasing(H.eta, y, upper=H.L)


def verify(
    theorem_id: str,
    scenario,
    ladder=None,
    tol: float | None = None,
    probes=PROBES,
    policy: TruncationPolicy | None = None,
) -> VerificationReport:
    """Tabulate the normalised ratio of a high-energy theorem on a scenario.

    Parameters
    ----------
    theorem_id : str
        One of :data:`THEOREMS`.
    scenario : Scenario or str
        Problem data and claimed limit (see :mod:`cansys.scenarios`).
    ladder : array_like, optional
        Geometric ladder of ``r``; default 8 rungs, factor 10, from 10.
    tol : float, optional
        Default 2% for closed-form scenarios and 5% otherwise.
    policy : TruncationPolicy, optional
        Default asks for m-values with relative error ``1e-3 * tol``.

    Returns
    -------
    VerificationReport
        Ratios per ``(r, mu)``.  Each ratio tends to 1 under the theorem:

        * ``const_limit``, ``general_Q``: ``m(r mu) / zeta0``;
        * ``alpha_positive``: ``f(r) m(r mu) / m_alpha(mu)``;
        * ``alpha_negative``: ``m(r mu) / (g(r) m_alpha(mu))``;
        * ``rapid``: ``-mu f(r) m(r mu)`` (or ``m(r mu) / (mu g(r))``);
        * ``string``: ``f~(r) m_D(r mu) / (-C d (-mu)**nu)``;
        * ``indefinite_string``: ``M(r mu) / zeta0`` or
          ``-M(r mu) m_alpha(r mu) / D``.
    """
    from . import scenarios as _sc

    if theorem_id not in THEOREMS:
        raise ValueError(f"unknown theorem_id {theorem_id!r}; choose from {', '.join(THEOREMS)}")
    sc = _sc.get(scenario) if isinstance(scenario, str) else scenario
    r = np.asarray(ladder if ladder is not None else default_ladder(), dtype=float)
    mu = np.asarray(probes, dtype=complex)
    tol = tol if tol is not None else (0.02 if sc.closed_form else 0.05)
    # numerical error budget: well below anything that could move a verdict
    policy = policy or TruncationPolicy(rtol=1e-3 * tol, atol=1e-12)
    diag: dict = {"probes_note": "probes form a compact set off the real axis; closed sectors are not sampled separately"}
    R, MU = np.meshgrid(r, mu, indexing="ij")
    branch = _BRANCHES[theorem_id]
    ratios, radii, conv, extra = branch(sc, R, MU, policy)
    diag.update(extra)
    if not np.all(conv):
        bad = np.argwhere(~conv)
        diag["nonconvergent"] = [[float(R[i, j]), complex(MU[i, j])] for i, j in bad]
        status = "inconclusive"
    else:
        status = _judge(np.abs(ratios - 1), tol)
    return VerificationReport(theorem_id, sc.name, r, tuple(complex(m) for m in mu), ratios, tol, status, diag, radii)


def _need_H(sc) -> Hamiltonian:
    if sc.H is None:
        raise ValueError(f"scenario {sc.name!r} has no Hamiltonian")
    return sc.H


def _cesaro(H: Hamiltonian, x) -> np.ndarray:
    A, B, C = H.primitives(np.asarray(x, dtype=float))
    e = H.eta(x)
    return np.stack([A / e, B / e, C / e], axis=-1)


def _branch_const(sc, R, MU, policy, Q=None):
    H = _need_H(sc)
    zeta0 = complex(sc.claim["zeta0"])
    v, rad, conv = _m_table(H, R * MU, policy, Q=Q)
    ratios = v / zeta0 if zeta0 != 0 else 1 + v
    H0 = np.array(constant_from_m(zeta0))
    x = 1.0 / R[:, 0]
    means = _cesaro(H, _xi(H, x))
    extra = {
        "cesaro_x": x,
        "cesaro_means": means,
        "cesaro_limit": H0,
        "cesaro_error": np.abs(means - H0).max(axis=1),
    }
    return ratios, rad, conv, extra


def _branch_general_q(sc, R, MU, policy):
    from .hamiltonian import MeshPolicy
    from .transforms import gauge_transform

    if sc.Q is None:
        raise ValueError(f"scenario {sc.name!r} has no potential")
    ratios, rad, conv, extra = _branch_const(sc, R, MU, policy, Q=sc.Q)
    H = sc.H
    x = 1.0 / R[:, 0]
    top = float(x.max())
    G = gauge_transform(H, sc.Q, MeshPolicy(cells_per_octave=32, x_min=float(x.min()) / 64), x_max=top)
    extra["gauge_cesaro_means"] = _cesaro(G, x)
    extra["gauge_cesaro_gap"] = np.abs(extra["gauge_cesaro_means"] - _cesaro(H, x)).max(axis=1)
    return ratios, rad, conv, extra


def _branch_alpha(sc, R, MU, policy, positive: bool):
    H = _need_H(sc)
    alpha = float(sc.claim["alpha"])
    if positive != (alpha > 0):
        raise ValueError(f"scenario {sc.name!r} claims alpha = {alpha}, wrong sign for this theorem")
    model = Alpha(alpha)
    f, g = hamiltonian_scales(H)
    r = R[:, 0]
    v, rad, conv = _m_table(H, R * MU, policy)
    mm = model(MU)
    if positive:
        s = f(r)
        ratios = v * s[:, None] / mm
        P, Pname = (lambda x: H.primitives(x)[0]), "A"
    else:
        s = g(r)
        ratios = v / (s[:, None] * mm)
        P, Pname = (lambda x: H.primitives(x)[2]), "C"
    # hypotheses on the trace-normed primitives, sampled at x = F(r^2) = s / r
    x = s / r
    xi = _xi(H, x)
    Pt = P(xi)
    Bt = H.primitives(xi)[1]
    extra = {"scale": s, "scale_name": "f" if positive else "g", "x": x}
    Pt_fun = lambda y: P(_xi(H, y))  # noqa: E731
    try:
        prof = rv_index_estimate(Pt_fun, "at_zero", np.sort(x))
        extra[f"rv_index_{Pname}"] = prof.index
        extra[f"rv_spread_{Pname}"] = prof.spread
    except ValueError as exc:
        extra[f"rv_index_{Pname}"] = f"unavailable: {exc}"
    extra["expected_index"] = 1 + abs(alpha)
    extra["B_over_sqrt_xP"] = _hyp_ratio(Bt, np.sqrt(x * Pt))
    if sc.reference is not None:
        extra["reference_ratio"] = v / sc.reference(R * MU)
    return ratios, rad, conv, extra


def _branch_rapid(sc, R, MU, policy):
    H = _need_H(sc)
    which = sc.claim.get("which", "A")
    f, g = hamiltonian_scales(H)
    r = R[:, 0]
    v, rad, conv = _m_table(H, R * MU, policy)
    if which == "A":
        s = f(r)
        ratios = -MU * s[:, None] * v
        P = lambda x: H.primitives(x)[0]  # noqa: E731
    else:
        s = g(r)
        ratios = v / (MU * s[:, None])
        P = lambda x: H.primitives(x)[2]  # noqa: E731
    x = s / r
    extra = {"scale": s, "x": x}
    try:
        prof = rv_index_estimate(lambda y: P(_xi(H, y)), "at_zero", np.sort(x))
        extra["rv_index"] = prof.index
        extra["rv_spread"] = prof.spread
    except ValueError as exc:
        extra["rv_index"] = f"unavailable: {exc}"
    return ratios, rad, conv, extra


def _string_ftilde(S: StringData, r) -> np.ndarray:
    """Generalised inverse of ``x -> 1/(x w(x))`` at ``r``: ``x`` with ``x w(x) = 1/r``."""

    def xw(x):
        return x * (S.s_of_x(x) - x)

    return invert_increasing(xw, 1.0 / np.asarray(r, dtype=float), upper=S.L, iters=200)


def _branch_string(sc, R, MU, policy):
    S = sc.string
    if S is None:
        raise ValueError(f"scenario {sc.name!r} has no string")
    alpha = float(sc.claim["alpha"])
    Cc = float(sc.claim.get("C", 1.0))
    nu = 1.0 / (2.0 + alpha)
    H = string_to_canonical(S)
    zeta = R * MU
    z = upper_root(zeta)
    v, rad, conv = _m_table(H, z, policy)
    mD = z * v
    ft = _string_ftilde(S, R[:, 0])
    d = d_nu(nu) if 0 < nu < 1 else 1.0
    model = -d * (-MU) ** nu
    ratios = mD * ft[:, None] / model
    extra = {
        "f_tilde": ft,
        "f_tilde_closed_form": (Cc ** (2 + alpha) * R[:, 0]) ** (-nu),
        "kac_constant_ratio": mD / (-Cc * d * (-zeta) ** nu),
    }
    return ratios, np.abs(z) * rad, conv, extra


def _branch_indefinite(sc, R, MU, policy):
    S = sc.indefinite
    if S is None:
        raise ValueError(f"scenario {sc.name!r} has no indefinite string")
    H = indefinite_string_to_canonical(S)
    z = R * MU
    # M(z) = -m(-z), with m(-z) = conj m(-conj z) evaluated in the upper half-plane
    v, rad, conv = _m_table(H, -np.conj(z), policy)
    M = -np.conj(v)
    x = 1.0 / R[:, 0]
    s = S.s_of_x(x)
    W1 = S.W1(x) if S.W1 is not None else np.zeros_like(x)
    extra = {"x": x}
    if "zeta0" in sc.claim:
        zeta0 = complex(sc.claim["zeta0"])
        a0 = 1 - x / s
        b0 = -(1 - a0) * W1 / x
        c0 = 1 - a0
        h0 = np.sqrt(np.maximum(a0 * c0 - b0 * b0, 0.0))
        extra["a0"], extra["b0"] = a0, b0
        extra["zeta0_from_string"] = (-b0 + 1j * h0) / c0
        ratios = M / zeta0 if zeta0 != 0 else 1 + M
    else:
        alpha, D = float(sc.claim["alpha"]), float(sc.claim["D"])
        ratios = -M * Alpha(alpha)(z) / D
        extra["s_ratio"] = s / (D ** ((2 + alpha) / (1 + alpha)) * x ** (1 / (1 + alpha)))
        extra["W1_over_power"] = _hyp_ratio(W1, x ** ((2 + alpha) / (2 + 2 * alpha)))
    return ratios, rad, conv, extra


_BRANCHES = {
    "const_limit": _branch_const,
    "general_Q": _branch_general_q,
    "alpha_positive": lambda sc, R, MU, p: _branch_alpha(sc, R, MU, p, True),
    "alpha_negative": lambda sc, R, MU, p: _branch_alpha(sc, R, MU, p, False),
    "rapid": _branch_rapid,
    "string": _branch_string,
    "indefinite_string": _branch_indefinite,
}

"""Named test problems for the asymptotic verifiers.

Each scenario carries the problem data (a Hamiltonian, possibly with a
potential, or a string) and the limit object the corresponding theorem
predicts.  The registry is what ``cansys verify --scenario NAME`` uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import sici

from .hamiltonian import (
    Constant,
    DiagonalPower,
    Hamiltonian,
    Potential,
    PowerLawAlpha,
    Primitive,
    StepExample,
)
from .transforms import IndefiniteStringData, StringData, flip
from .weyl import constant_from_m

__all__ = ["Scenario", "SCENARIOS", "get", "names"]


@dataclass(frozen=True)
class Scenario:
    """Problem data plus the predicted limit.

    ``claim`` keys by theorem: ``zeta0`` (constant limits), ``alpha``
    (power laws), ``which`` ("A" or "C", rapid variation), ``D`` (power
    law of an indefinite string).  ``reference`` is an optional closed-form
    asymptote ``z -> m`` reported alongside the ratio table.
    """

    name: str
    description: str
    H: Hamiltonian | None = None
    Q: Potential | None = None
    string: StringData | None = None
    indefinite: IndefiniteStringData | None = None
    claim: dict = field(default_factory=dict)
    closed_form: bool = False
    theorem: str = ""
    reference: Callable | None = None


def _cos_inv_primitive(x):
    """``int_0^x cos(1/t) dt = x cos(1/x) + Si(1/x) - pi/2``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = 1.0 / x
        si, _ = sici(u)
        out = x * np.cos(u) + si - math.pi / 2
    return np.where(x > 0, out, 0.0)


def _cesaro_perturbed() -> Hamiltonian:
    # (1 + sqrt x) H0 + 0.05 cos(1/x) sigma_1 with H0 the constant of zeta0 = 1 + i
    a0, b0, c0 = constant_from_m(1 + 1j)
    grow = lambda x: np.asarray(x, dtype=float) + 2.0 / 3.0 * np.asarray(x, dtype=float) ** 1.5  # noqa: E731
    return Primitive(
        lambda x: a0 * grow(x),
        lambda x: b0 * grow(x) + 0.05 * _cos_inv_primitive(x),
        lambda x: c0 * grow(x),
        divergent=True,
    )


def _exp_profile(p: float) -> Hamiltonian:
    """``H = diag(A', 1)`` with ``A(x) = exp(1 - x**-p)``."""

    def A(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x > 0, np.exp(1.0 - np.maximum(x, 1e-300) ** -p), 0.0)

    return Primitive(A, lambda x: np.zeros_like(np.asarray(x, dtype=float)), lambda x: np.asarray(x, dtype=float), divergent=True)


def _oscillating() -> Hamiltonian:
    # A = x**2 (2 + sin log x) is not regularly varying at 0
    def A(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, x * x * (2 + np.sin(np.log(np.maximum(x, 1e-300)))), 0.0)

    return Primitive(A, lambda x: np.zeros_like(np.asarray(x, dtype=float)), lambda x: np.asarray(x, dtype=float), divergent=True)


def _radial_reference(kappa: float) -> Callable:
    p = kappa + 0.5

    def ref(z):
        z = np.asarray(z, dtype=complex)
        return -((-z * z) ** p) / (z * math.sin(math.pi * p))

    return ref


def _build() -> dict[str, Scenario]:
    out = [
        Scenario("constant", "identity-type constant Hamiltonian diag(1/2, 1/2)", H=Constant(0.5, 0.0, 0.5),
                 claim={"zeta0": 1j}, closed_form=True, theorem="const_limit"),
        Scenario("cesaro_perturbed", "(1 + sqrt x) H0 + 0.05 cos(1/x) sigma_1 with m(H0) = 1 + i",
                 H=_cesaro_perturbed(), claim={"zeta0": 1 + 1j}, theorem="const_limit"),
        Scenario("alpha1", "H_alpha with alpha = 1", H=PowerLawAlpha(1.0), claim={"alpha": 1.0},
                 closed_form=True, theorem="alpha_positive"),
        Scenario("alpha2", "H_alpha with alpha = 2", H=PowerLawAlpha(2.0), claim={"alpha": 2.0},
                 closed_form=True, theorem="alpha_positive"),
        Scenario("alpha_neg1", "H_alpha with alpha = -1", H=PowerLawAlpha(-1.0), claim={"alpha": -1.0},
                 closed_form=True, theorem="alpha_negative"),
        Scenario("alpha1_flipped", "-J H_1 J, the flip of H_alpha with alpha = 1", H=flip(PowerLawAlpha(1.0)),
                 claim={"alpha": -1.0}, closed_form=True, theorem="alpha_negative"),
        Scenario("oscillating_A", "diag(a, 1) with A(x) = x^2 (2 + sin log x); not regularly varying",
                 H=_oscillating(), claim={"alpha": 1.0}, theorem="alpha_positive"),
        Scenario("radial_kappa", "radial model DiagonalPower with kappa = 1/4", H=DiagonalPower(0.25),
                 claim={"alpha": -2.0}, theorem="alpha_negative", reference=_radial_reference(0.25)),
        Scenario("rapid_exp", "diag(A', 1) with A(x) = exp(1 - 1/x^2)", H=_exp_profile(2.0),
                 claim={"which": "A"}, theorem="rapid"),
        Scenario("rapid_exp1", "diag(A', 1) with A(x) = exp(1 - 1/x); logarithmically slow",
                 H=_exp_profile(1.0), claim={"which": "A"}, theorem="rapid"),
        Scenario("step", "step Hamiltonian diag(1_[1,inf), 1_[0,1))", H=StepExample(),
                 claim={"which": "A"}, closed_form=True, theorem="rapid"),
        Scenario("general_Q", "H = diag(1/2, 1/2) with potential Q = diag(1, -1)", H=Constant(0.5, 0.0, 0.5),
                 Q=Potential.constant([[1.0, 0.0], [0.0, -1.0]]), claim={"zeta0": 1j}, theorem="general_Q"),
        Scenario("marchenko", "uniform string w(x) = x", string=StringData.closed_form({"tag": "power", "coef": 1.0, "exponent": 1.0}),
                 claim={"alpha": 0.0, "C": 1.0}, closed_form=True, theorem="string"),
        Scenario("kac_alpha1", "string with w(x) = x^2", string=StringData.closed_form({"tag": "power", "coef": 1.0, "exponent": 2.0}),
                 claim={"alpha": 1.0, "C": 1.0}, theorem="string"),
        Scenario("kac_alpha_half", "string with w(x) = x^(1/2)", string=StringData.closed_form({"tag": "power", "coef": 1.0, "exponent": 0.5}),
                 claim={"alpha": -0.5, "C": 1.0}, theorem="string"),
        Scenario("indefinite_c_half", "indefinite string with w = 1/2", indefinite=IndefiniteStringData.closed_form({"tag": "constant", "c": 0.5}),
                 claim={"zeta0": 0.5}, closed_form=True, theorem="indefinite_string"),
        Scenario("indefinite_c2", "indefinite string with w = 2", indefinite=IndefiniteStringData.closed_form({"tag": "constant", "c": 2.0}),
                 claim={"zeta0": 2.0}, closed_form=True, theorem="indefinite_string"),
        Scenario("indefinite_affine", "indefinite string with w = 1/2 + x", indefinite=IndefiniteStringData.closed_form({"tag": "affine", "c": 0.5, "slope": 1.0}),
                 claim={"zeta0": 0.5}, theorem="indefinite_string"),
        Scenario("indefinite_alpha1", "w = 0 and upsilon with distribution sqrt(x)",
                 indefinite=IndefiniteStringData.closed_form({"tag": "constant", "c": 0.0}, upsilon_spec={"tag": "power", "coef": 1.0, "exponent": 0.5}),
                 claim={"alpha": 1.0, "D": 1.0}, theorem="indefinite_string"),
    ]
    return {s.name: s for s in out}


SCENARIOS: dict[str, Scenario] = _build()


def names() -> list[str]:
    return sorted(SCENARIOS)


def get(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(names())}") from None

import math

import numpy as np
import pytest

from cansys.hamiltonian import Constant, PowerLawAlpha, StepExample
from cansys.spectral import (
    SpectralFunction,
    atom_at_zero,
    model_rho,
    richardson,
    smoothed_integral,
    stieltjes_invert,
    tauberian_compare,
)
from cansys.weyl import Alpha, ConstantZeta, DiracKappa, Step, model_m, sampler


@pytest.mark.parametrize("family", [ConstantZeta(0.5 + 2j), Alpha(1.0), Alpha(-1.0), Alpha(0.0), DiracKappa(0.25)])
def test_model_rho_is_odd(family):
    t = np.array([0.3, 2.0, 50.0])
    assert np.allclose(model_rho(family, -t), -model_rho(family, t))


def test_constant_model_rho():
    assert model_rho(ConstantZeta(1 + 2j), math.pi) == pytest.approx(2.0)


def test_smoothed_integral_of_constant():
    m = lambda z: np.full(np.shape(z), 1j)  # noqa: E731
    t = np.array([-2.0, 1.0, 5.0])
    assert np.allclose(smoothed_integral(m, t, np.full(3, 0.1)), t / math.pi)


def test_smoothed_integral_near_pole():
    # m = -1/z: (1/pi) int_0^t Im m(s + i e) ds = arctan(t / e) / pi
    t, e = np.array([0.5, 3.0]), np.array([0.01, 0.2])
    got = smoothed_integral(lambda z: -1 / z, t, e)
    assert np.allclose(got, np.arctan(t / e) / math.pi, rtol=1e-8)


def test_richardson_exact_on_linear_data():
    eps = np.array([0.1, 0.03, 0.01])
    vals = np.array([[1 + 2 * e for e in eps], [3 - e for e in eps]])
    lin, err = richardson(eps, vals)
    assert np.allclose(lin, [1, 3])


def test_atom_at_zero():
    assert atom_at_zero(lambda z: -1 / z) == pytest.approx(1.0, rel=1e-6)
    assert atom_at_zero(lambda z: np.full(np.shape(z), 1j)) == 0.0


def test_identity_spectral_function():
    rho = stieltjes_invert(sampler(Constant(1, 0, 1)), np.linspace(-3, 3, 7))
    assert np.allclose(rho.values, rho.breakpoints / math.pi, atol=1e-10)
    assert rho.is_monotone() and rho(0.0) == 0.0


def test_step_spectral_function_has_unit_atom():
    rho = stieltjes_invert(sampler(StepExample()), np.array([-2.0, -0.5, 0.5, 2.0]))
    assert rho.atoms[0] == (0.0, pytest.approx(1.0, rel=1e-4))
    assert np.allclose(rho(np.array([-2.0, 2.0])), [0.0, 1.0], atol=1e-3)
    assert np.allclose(model_rho(Step(), np.array([-1.0, 1.0])), [0.0, 1.0])


def test_schedule_must_decrease():
    with pytest.raises(ValueError):
        stieltjes_invert(lambda z: z, [1.0], eps_schedule=(0.01, 0.1))


def test_alpha1_tauberian():
    t = np.geomspace(10, 1000, 5)
    rho = stieltjes_invert(sampler(PowerLawAlpha(1.0)), np.concatenate([-t[::-1], t]))
    # m(r mu) f_scale(r) -> m_1(mu) with f_scale(r) = r^(1/3), so rho(t) ~ t rho_1(1) / f_scale(t)
    f = lambda r: r ** (-1 / 3)  # noqa: E731
    rep = tauberian_compare(rho, f, Alpha(1.0), t)
    assert rep.passed and not rep.jump_form and rep.f_over_r_decreasing
    assert rep.to_dict()["passed"] is True


def test_spectral_function_interpolates():
    s = SpectralFunction(np.array([-1.0, 0.0, 1.0]), np.array([-1.0, 0.0, 2.0]))
    assert s(0.5) == pytest.approx(1.0) and s.is_monotone()
    assert model_m(Step(), 1j) == pytest.approx(1j)


def test_step_uses_jump_form():
    t = np.array([2.0, 4.0])
    rho = stieltjes_invert(sampler(StepExample()), np.concatenate([-t[::-1], t]))
    rep = tauberian_compare(rho, lambda r: 1 / r, Step(), t)
    assert rep.jump_form and rep.passed

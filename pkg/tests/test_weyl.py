
import numpy as np
import pytest
from conftest import random_cells
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma, hyp0f1

from cansys.hamiltonian import (
    Constant,
    DiagonalPower,
    PiecewiseConstant,
    Potential,
    PowerLawAlpha,
    StepExample,
)
from cansys.transforms import flip
from cansys.weyl import (
    Alpha,
    ConstantZeta,
    DiracKappa,
    DomainError,
    NonConvergence,
    Step,
    TruncationPolicy,
    constant_from_m,
    d_nu,
    dirac_to_schrodinger_m,
    hypergeometric_0F1,
    kappa_reduce,
    m_function,
    m_values,
    model_m,
    model_solutions_alpha,
    upper_root,
)

upper = st.builds(complex, st.floats(-20, 20), st.floats(0.05, 20))


def test_real_z_rejected():
    with pytest.raises(DomainError):
        m_function(Constant(1, 0, 1), 1.0)
    with pytest.raises(DomainError):
        model_m(Step(), np.array([1j, 2.0]))


def test_identity_gives_i():
    s = m_function(Constant(1, 0, 1), 1j)
    assert s.value == pytest.approx(1j, abs=1e-12) and s.radius < 1e-8 and s.converged


def test_step_closed_form():
    s = m_function(StepExample(), 2j)
    assert s.value == pytest.approx(0.5j, abs=1e-8) and s.radius < 1e-8


@settings(max_examples=30, deadline=None)
@given(upper, upper)
def test_constant_round_trip(zeta0, z):
    H = Constant(*constant_from_m(zeta0))
    assert ConstantZeta.from_cell(H.a0, H.b0, H.c0).zeta0 == pytest.approx(zeta0, rel=1e-12)
    v, r, _, _ = m_values(H, np.array([z]))
    assert abs(v[0] - zeta0) <= max(r[0], 1e-9 * abs(zeta0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), upper)
def test_herglotz_and_conjugation(seed, z):
    H = random_cells(np.random.default_rng(seed))
    v = m_values(H, np.array([z, np.conj(z)]))[0]
    assert v[0].imag > 0
    assert v[1] == pytest.approx(np.conj(v[0]), rel=1e-12)


def test_flip_gives_minus_reciprocal():
    z = np.array([1j, 3 + 0.5j])
    # closed-form, piecewise and generic (wrapped) flips
    for H in (PowerLawAlpha(1.0), random_cells(np.random.default_rng(3)), DiagonalPower(0.25)):
        v, rv = m_values(H, z)[:2]
        w, rw = m_values(flip(H), z)[:2]
        assert np.all(np.abs(w + 1 / v) <= rw + rv / np.abs(v) ** 2 + 1e-6 * np.abs(w))


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0, -1.0, -2.0])
def test_power_law_matches_model(alpha):
    z = np.array([1j, 1 + 1j, 10j, -3 + 0.1j, 1e4j])
    v, r, _, _ = m_values(PowerLawAlpha(alpha), z)
    ref = model_m(Alpha(alpha), z)
    assert np.all(np.abs(v - ref) <= r + 1e-12 * np.abs(ref))


def test_radial_model_matches_dirac_kappa():
    z = np.array([1j, 2 + 1j])
    v, r, _, _ = m_values(DiagonalPower(0.25), z)
    assert np.allclose(v, model_m(DiracKappa(0.25), z), rtol=1e-4)


def test_d_nu_formula():
    for nu in (0.2, 1 / 3, 0.5, 0.8):
        ref = (1 - nu) ** nu * gamma(1 - nu) / (nu ** (1 - nu) * gamma(nu))
        assert d_nu(nu) == pytest.approx(ref, rel=1e-13)
    assert d_nu(0.5) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        d_nu(1.0)


def test_alpha_zero_is_identity_model():
    assert model_m(Alpha(0.0), 5j) == pytest.approx(1j)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 3.0), st.builds(complex, st.floats(-30, 30), st.floats(-30, 30)))
def test_0f1_against_scipy(c, w):
    ours = hypergeometric_0F1(c, w)
    assert ours.real == pytest.approx(hyp0f1(c, w).real, rel=1e-10, abs=1e-10 * abs(ours))


def test_0f1_rejects_poles():
    with pytest.raises(DomainError):
        hypergeometric_0F1(-1.0, 1.0)


def test_model_solutions_solve_the_equation():
    # -y'' = zeta p_alpha y with p_1 = 2x
    zeta, x, h = 2 + 1j, 0.7, 1e-4
    th = [model_solutions_alpha(1.0, zeta, x + k * h)[0] for k in (-1, 0, 1)]
    second = (th[0] - 2 * th[1] + th[2]) / h**2
    assert second == pytest.approx(-zeta * 2 * x * th[1], rel=1e-5)
    t, p, dt, dp = model_solutions_alpha(1.0, zeta, 0.0, derivatives=True)
    assert (t, p, dt, dp) == (1, 0, 0, 1)
    # Wronskian stays 1
    t, p, dt, dp = model_solutions_alpha(1.0, zeta, 1.3, derivatives=True)
    assert t * dp - p * dt == pytest.approx(1.0, rel=1e-10)


def test_upper_root_and_dirac_to_schrodinger():
    assert upper_root(-4.0) == pytest.approx(2j)
    assert upper_root(1j).imag > 0
    with pytest.raises(DomainError):
        upper_root(4.0)
    assert dirac_to_schrodinger_m(lambda z: 1j * np.ones_like(z), -1.0) == pytest.approx(-1.0)


def test_kappa_reduce_shifts_power():
    M0 = DiracKappa(0.25)
    got = kappa_reduce(M0, 1.25, 1 + 1j)
    assert got == pytest.approx((1 + 1j) ** 2 * M0(1 + 1j))


def test_nonconvergence_carries_sample():
    policy = TruncationPolicy(k_max=2)
    with pytest.raises(NonConvergence) as info:
        m_function(PowerLawAlpha(1.0), 1e-3j, policy)
    assert info.value.sample is not None and not info.value.sample.converged
    v, r, x, conv = m_values(PowerLawAlpha(1.0), np.array([1e-3j]), policy, strict=False)
    assert not conv[0] and np.isfinite(v[0])


def test_constant_potential_matches_exact_value():
    # H = I, Q = diag(q, -q): exact m is the root of the constant-coefficient problem
    q = 1.0
    z = np.array([2j, 1 + 1j])
    v, r, _, _ = m_values(Constant(1, 0, 1), z, Q=Potential.constant([[q, 0], [0, -q]]))
    # J Y' = M Y with M = diag(z - q, z + q): the decaying eigenvector (1, m) of -J M
    # has eigenvalue -sqrt(q^2 - z^2), so m = -sqrt(q^2 - z^2) / (z + q)
    ref = -np.sqrt(q * q - z * z) / (z + q)
    assert np.allclose(v, ref, atol=1e-8)


def test_policy_tightening_reduces_radius():
    z = np.array([0.1j])
    H = random_cells(np.random.default_rng(5))
    loose = m_values(H, z, TruncationPolicy(rtol=1e-4, atol=0))[1][0]
    tight = m_values(H, z, TruncationPolicy(rtol=1e-12, atol=0))[1][0]
    assert tight < loose <= 1e-4 * 2


def test_piecewise_tail_is_exact():
    H = PiecewiseConstant([0, 1], [[1, 0, 1], [0.25, 0, 1]])
    # beyond x = 1 the cell diag(1/4, 1) has m = i/2; at x = 1 the Moebius transform is exact
    v = m_values(H, np.array([1j]), TruncationPolicy(rtol=1e-14, atol=0))[0][0]
    # U(1) (1, m) must be proportional to the tail's decaying eigenvector (1, i/2)
    ch, sh = np.cosh(1), np.sinh(1)
    assert v == pytest.approx(1j * (ch / 2 + sh) / (ch + sh / 2), abs=1e-13)

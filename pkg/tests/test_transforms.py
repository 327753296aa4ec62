import math

import numpy as np
import pytest
from conftest import random_cells
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from cansys.hamiltonian import (
    Constant,
    DiagonalPower,
    MeshPolicy,
    Potential,
    PowerLawAlpha,
    SampledPrimitive,
    validate,
)
from cansys.transforms import (
    Flipped,
    IndefiniteStringData,
    StringData,
    StringHamiltonian,
    TraceNormalized,
    flip,
    gauge_density,
    gauge_transform,
    generalized_inverse,
    indefinite_string_to_canonical,
    invert_increasing,
    scale,
    string_to_canonical,
    trace_normalize,
    w_closed_form,
)
from cansys.weyl import TruncationPolicy, m_values, upper_root


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1e6))
def test_invert_increasing_cube(y):
    x = invert_increasing(lambda t: t**3, np.array([y]))[0]
    assert x == pytest.approx(y ** (1 / 3), rel=1e-12)


def test_invert_increasing_plateau_conventions():
    fn = lambda x: np.minimum(x, 1.0) + np.maximum(x - 2.0, 0.0)  # noqa: E731 - flat on [1, 2]
    assert invert_increasing(fn, 1.0, convention="min") == pytest.approx(1.0)
    assert invert_increasing(fn, 1.0, convention="sup") == pytest.approx(2.0)
    assert invert_increasing(fn, 5.0, upper=3.0) == 3.0
    assert invert_increasing(lambda x: 1 + x, 0.5) == 0.0
    with pytest.raises(ValueError):
        invert_increasing(fn, 1.0, convention="max")


def test_generalized_inverse_tables():
    # s has a plateau on [1, 2] and a jump at x = 3
    x = [0, 1, 2, 3, 3, 4]
    s = [0, 1, 1, 2, 5, 6]
    lo = generalized_inverse(x, s, "min")
    hi = generalized_inverse(x, s, "sup")
    assert lo.inverse(1.0) == 1.0 and hi.inverse(1.0) == 2.0
    assert lo.inverse(3.5) == pytest.approx(3.0) and hi.inverse(3.5) == pytest.approx(3.0)
    assert lo.inverse(5.5) == pytest.approx(3.5)
    assert lo.forward(0.5) == 0.5
    with pytest.raises(ValueError):
        generalized_inverse([0, 1], [1, 0])


def test_trace_normalize_piecewise_is_trace_normed():
    H = random_cells(np.random.default_rng(2))
    Ht, eta = trace_normalize(H)
    cells = Ht.cells
    assert np.allclose(cells[:, 0] + cells[:, 2], 1.0)
    y = np.array([0.3, 2.0, 7.0])
    assert np.allclose(eta.forward(eta.inverse(y)), y)


def test_trace_normalize_wrapper_for_power_law():
    Ht, eta = trace_normalize(PowerLawAlpha(1.0))
    assert isinstance(Ht, TraceNormalized)
    y = np.array([0.5, 3.0, 100.0])
    assert np.allclose(Ht.eta(y), y)
    # the inverse of x + x^2
    assert np.allclose(Ht.xi(y), (-1 + np.sqrt(1 + 4 * y)) / 2, rtol=1e-12)


def test_trace_normalize_rejects_limit_circle():
    with pytest.raises(ValueError):
        trace_normalize(Constant(1, 0, 1, L=2.0))


def test_sampled_trace_normalize_and_m():
    H = SampledPrimitive([0, 1, 2], [0, 2, 3], [0, 0.1, 0.1], [0, 1, 3])
    Ht, _ = trace_normalize(H)
    z = np.array([1j, 2 + 1j])
    assert np.allclose(m_values(H, z)[0], m_values(Ht, z)[0], rtol=1e-9)


def test_scale_constant_and_meta():
    S = scale(Constant(1, 0, 1), 1, 1, 2)
    assert (S.a0, S.b0, S.c0) == (2, 0, 0.5)
    assert S.meta["m_relation"] == {"factor": 2, "argument_scale": 1.0}
    with pytest.raises(ValueError):
        scale(Constant(1, 0, 1), 0, 1, 1)


def test_scale_generic_wrapper():
    H = PowerLawAlpha(1.0)
    r1, r2, r3 = 2.0, 0.5, 3.0
    z = np.array([1j, 1 + 1j])
    v = m_values(scale(H, r1, r2, r3), z)
    w = m_values(H, (r2 / r1) * z)
    assert np.all(np.abs(v[0] - r3 * w[0]) <= v[1] + r3 * w[1])


def test_flip_is_an_involution():
    H = random_cells(np.random.default_rng(7))
    back = flip(flip(H))
    assert np.array_equal(back.cells, H.cells)
    assert flip(Constant(1, 0.5, 2)).b0 == -0.5
    assert flip(PowerLawAlpha(1.5)).alpha == -1.5
    assert isinstance(flip(DiagonalPower(0.25)), Flipped)


def test_w_closed_form_antiderivatives():
    for spec in ({"tag": "power", "coef": 2.0, "exponent": 1.5}, {"tag": "affine", "c": 0.5, "slope": 2.0}, {"tag": "constant", "c": 3.0}):
        w, W1, W2 = w_closed_form(spec)
        assert W1(0.0) == 0 and W2(0.0) == 0
        for b in (0.3, 2.5):
            assert W1(b) == pytest.approx(quad(w, 0, b)[0], rel=1e-8)
            assert W2(b) == pytest.approx(quad(lambda t, w=w: w(t) ** 2, 0, b)[0], rel=1e-8)
    with pytest.raises(ValueError):
        w_closed_form({"tag": "spline"})


def test_uniform_string_is_identity_type():
    H = string_to_canonical(StringData.closed_form({"tag": "power", "coef": 1.0, "exponent": 1.0}))
    assert (H.a0, H.b0, H.c0) == (0.5, 0.0, 0.5)


def test_generic_string_path_agrees_with_shortcut():
    w, _, _ = w_closed_form({"tag": "power", "coef": 1.0, "exponent": 1.0})
    H = string_to_canonical(StringData(w))
    assert isinstance(H, StringHamiltonian)
    v, r, _, _ = m_values(H, np.array([1j, 3 + 1j]))
    assert np.allclose(v, 1j, atol=1e-6)


def test_string_with_atom():
    w, _, _ = w_closed_form({"tag": "power", "coef": 1.0, "exponent": 1.0})
    S = StringData(w, atoms=((1.0, 0.5),))
    H = string_to_canonical(S)
    # the atom is a gap of length 1/2 in s where x is frozen at 1
    s0 = float(S.s_of_x(1.0))
    assert H.x_of_s(np.array([s0 + 0.25]))[0] == pytest.approx(1.0)
    assert validate(H.sample(np.geomspace(1e-3, 10, 50))).valid


def test_string_table(tmp_path):
    x = np.linspace(0, 5, 51)
    (tmp_path / "w.csv").write_text("x,w\n" + "\n".join(f"{a},{a * a}" for a in x))
    S = StringData.from_json({"w": {"csv": "w.csv"}}, tmp_path)
    H = string_to_canonical(S)
    assert isinstance(H, SampledPrimitive) and validate(H).valid
    with pytest.raises(ValueError):
        string_to_canonical(StringData(None, table=(x, -x)))


def test_indefinite_massless_and_constant():
    H = indefinite_string_to_canonical(IndefiniteStringData.closed_form({"tag": "constant", "c": 0.0}))
    assert (H.a0, H.b0, H.c0) == (0.0, 0.0, 1.0)
    H = indefinite_string_to_canonical(IndefiniteStringData.closed_form({"tag": "constant", "c": 2.0}))
    assert (H.a0, H.b0, H.c0) == pytest.approx((0.8, 0.4, 0.2))
    assert H.a0 * H.c0 - H.b0**2 == pytest.approx(0.0, abs=1e-15)


def test_indefinite_generic_path_agrees():
    w, W1, W2 = w_closed_form({"tag": "constant", "c": 0.5})
    H = indefinite_string_to_canonical(IndefiniteStringData(w, W1, W2))
    ref = indefinite_string_to_canonical(IndefiniteStringData.closed_form({"tag": "constant", "c": 0.5}))
    z = np.array([2j, 1 + 1j])
    # rank-one with a fixed direction: the Weyl disk shrinks only like 1/x
    v, r = m_values(H, z, TruncationPolicy(rtol=1e-4))[:2]
    w, q = m_values(ref, z)[:2]
    assert np.all(np.abs(v - w) <= r + q)
    assert np.allclose(v, w, atol=1e-4)


def test_indefinite_table_with_atom():
    x = np.linspace(0, 4, 41)
    S = IndefiniteStringData(None, None, None, upsilon=((1.0, 0.5),), table=(x, np.sin(x)))
    H = indefinite_string_to_canonical(S)
    assert validate(H).valid
    # the atom leaves x frozen on an interval of length 1/2
    A, _, C = H.primitives(H.grid)
    assert np.any(np.isclose(np.diff(H.grid), 0.5) & np.isclose(np.diff(C), 0.0))


def test_indefinite_from_json_distribution():
    S = IndefiniteStringData.from_json({"w": {"tag": "constant", "c": 0.0}, "upsilon": {"distribution": {"tag": "power", "coef": 1.0, "exponent": 0.5}}})
    assert float(S.s_of_x(4.0)) == pytest.approx(6.0)


def test_gauge_rotation_is_exact():
    # Q = I rotates, and H = I/2 commutes with rotations
    H, Q = Constant(0.5, 0, 0.5), Potential.constant([[1.0, 0.0], [0.0, 1.0]])
    z = np.array([2j, 3 + 5j])
    assert np.allclose(m_values(gauge_transform(H, Q, x_max=4.0), z)[0], m_values(H, z, Q=Q)[0], atol=1e-12)


def test_gauge_hyperbolic_converges_with_mesh():
    H, Q = Constant(0.5, 0, 0.5), Potential.constant([[1.0, 0.0], [0.0, -1.0]])
    z = np.array([2j])
    direct = m_values(H, z, Q=Q)[0]
    # with k = z/2 the direct value is -sqrt(q^2 - k^2) / (k + q)
    assert direct[0] == pytest.approx(-np.sqrt(2) / (1 + 1j))
    errs = []
    for cpo in (16, 64):
        G = gauge_transform(H, Q, MeshPolicy(kind="geometric", cells_per_octave=cpo), x_max=8.0, q_step=0.1)
        errs.append(abs(m_values(G, z)[0][0] - direct[0]))
    assert errs[1] < errs[0] / 4 and errs[1] < 1e-5


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.floats(0.01, 3), st.floats(0.01, 3), st.floats(-0.9, 0.9)),
       st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)), st.floats(0, 3))
def test_gauge_density_preserves_determinant(cell, q, x):
    a, c, r = cell
    Hc = (a, r * math.sqrt(a * c), c)
    D = gauge_density(Hc, Potential.constant(np.array(q)), x)
    det0 = Hc[0] * Hc[2] - Hc[1] ** 2
    assert np.allclose(D, D.T)
    assert np.linalg.det(D) == pytest.approx(det0, rel=1e-9, abs=1e-12 * np.abs(D).max() ** 2)
    assert np.all(np.linalg.eigvalsh(D) >= -1e-9 * np.abs(D).max())


def test_upper_root_for_string_relation():
    # z m(z) = m_D(z^2) for the uniform string: m_D(-1) = -1
    H = string_to_canonical(StringData.closed_form({"tag": "power", "coef": 1.0, "exponent": 1.0}))
    z = upper_root(np.array([-1.0]))
    assert (z * m_values(H, z)[0])[0] == pytest.approx(-1.0)

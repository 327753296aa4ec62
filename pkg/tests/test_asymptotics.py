import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cansys import scenarios
from cansys.asymptotics import (
    KARAMATA_EPS,
    PROBES,
    SCHEMA_VERSION,
    THEOREMS,
    asymptotic_inverse_check,
    f_scale,
    g_scale,
    hamiltonian_scales,
    karamata_generate,
    rv_index_estimate,
    verify,
)
from cansys.hamiltonian import PowerLawAlpha

LADDER = np.geomspace(10, 1e6, 11)


# --- scale functions -------------------------------------------------------


@pytest.mark.parametrize("A", [lambda x: x**2, lambda x: x * (1 + np.log1p(x)), lambda x: np.expm1(x)])
def test_f_scale_solves_its_equation(A):
    r = np.geomspace(1e-2, 1e6, 30)
    f = f_scale(A)(r)
    assert np.allclose(r * f * A(f / r), 1.0, rtol=1e-10, atol=0)


def test_f_scale_power_law_closed_form():
    # A(x) = x**2 gives x**3 = r**-2 and f = r**(1/3)
    r = np.geomspace(1e-3, 1e9, 13)
    assert np.allclose(f_scale(lambda x: x**2)(r), r ** (1 / 3), rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 4.0), st.floats(0.1, 10.0))
def test_g_scale_power_law(p, k):
    # C = k x**p: x**(p+1) = 1/(k r**2), g = r x
    r = np.geomspace(1e-2, 1e4, 7)
    expected = r * (1.0 / (k * r * r)) ** (1.0 / (p + 1))
    assert np.allclose(g_scale(lambda x: k * x**p)(r), expected, rtol=1e-10)


def _positive_root(coeffs):
    roots = np.roots(coeffs)
    return roots.real[(np.abs(roots.imag) < 1e-9) & (roots.real > 0)].max()


def test_hamiltonian_scales_of_alpha1():
    # H_1 = diag(2x, 1): A = x**2, C = x and trace eta = x**2 + x, so f = r eta(x)
    # with x the positive root of (x**2 + x) x**2 = r**-2 (similarly g with C)
    f, g = hamiltonian_scales(PowerLawAlpha(1.0))
    for r in [0.1, 10.0, 1e3, 1e5]:
        xf = _positive_root([1, 1, 0, 0, -(r**-2)])
        xg = _positive_root([1, 1, 0, -(r**-2)])
        assert f(np.array([r]))[0] == pytest.approx(r * (xf * xf + xf), rel=1e-9)
        assert g(np.array([r]))[0] == pytest.approx(r * (xg * xg + xg), rel=1e-9)


def test_f_scale_rejects_missing_root():
    with pytest.raises(ValueError):
        f_scale(lambda x: np.zeros_like(x))(np.array([1.0]))


# --- regular variation -----------------------------------------------------


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.0, 2.0])
@pytest.mark.parametrize("eps", ["inv_log_sq", "arctan", "zero"])
def test_rv_index_of_power_times_slowly_varying(alpha, eps):
    L = karamata_generate(0.3, eps)
    prof = rv_index_estimate(lambda x: x**alpha * L(x), ladder=LADDER)
    assert abs(prof.index - alpha) < 0.05


def test_rv_index_inv_log_is_slow():
    # exp(int 1/log t dt/t) = log x: local slope 1/log x, frozen reference value
    prof = rv_index_estimate(karamata_generate(0.0, "inv_log"), ladder=LADDER)
    assert prof.index == pytest.approx(0.09320466372722057, rel=1e-10)
    assert 1 / math.log(1e6) < prof.index < 1 / math.log(1e3)


def test_rv_index_at_zero_convention():
    prof = rv_index_estimate(lambda x: x**2, side="at_zero")
    assert prof.index == pytest.approx(2.0, abs=1e-12)
    assert prof.side == "at_zero"


def test_rv_index_detects_rapid_variation():
    prof = rv_index_estimate(lambda x: np.exp(np.sqrt(x) / 100), ladder=LADDER)
    assert prof.index == math.inf
    assert json.dumps(prof.to_dict())


def test_rv_index_input_checks():
    with pytest.raises(ValueError):
        rv_index_estimate(lambda x: -x, ladder=LADDER)
    with pytest.raises(ValueError):
        rv_index_estimate(lambda x: x, side="sideways")
    with pytest.raises(ValueError):
        rv_index_estimate(lambda x: x, ladder=[1, 2, 3])


@pytest.mark.parametrize("eps", sorted(KARAMATA_EPS))
def test_karamata_functions_are_slowly_varying(eps):
    L = karamata_generate(0.5, eps)
    x = np.array([1e12, 1e14])
    assert np.all(np.abs(L(2 * x) / L(x) - 1) < 0.05)
    assert L(np.array([math.e]))[0] == pytest.approx(math.exp(0.5))


def test_karamata_unknown_eps():
    with pytest.raises(ValueError):
        karamata_generate(0.0, "sine")


def test_inverse_check_matched_and_mismatched():
    ladder = np.geomspace(10, 1e8, 8)
    good = asymptotic_inverse_check(lambda x: x**2, lambda x: x**2 * (1 + 1 / np.log(x)), ladder, tol=0.1)
    assert good.passed
    # F = x**2 (1 + 1/log x) has inverse sqrt(y)(1 - 1/log y + ...)
    assert abs(good.inverse_ratio[-1] - 1) < 0.05
    bad = asymptotic_inverse_check(lambda x: x**2, lambda x: 1.5 * x**2, ladder)
    assert not bad.passed
    assert bad.inverse_ratio[-1] == pytest.approx(1 / math.sqrt(1.5), rel=1e-10)


# --- theorem verification --------------------------------------------------


@pytest.mark.parametrize(
    "name",
    ["constant", "cesaro_perturbed", "alpha1", "alpha1_flipped", "alpha_neg1", "general_Q", "marchenko",
     "indefinite_alpha1", "step", "radial_kappa"],
)
def test_scenarios_pass_their_theorem(name):
    sc = scenarios.get(name)
    rep = verify(sc.theorem, sc)
    assert rep.status == "pass", rep.table()


def test_flip_exchanges_positive_and_negative_index():
    pos = verify("alpha_positive", "alpha1")
    neg = verify("alpha_negative", "alpha1_flipped")
    assert pos.passed and neg.passed
    # the flip replaces m by -1/m and m_alpha by m_{-alpha} = -1/m_alpha,
    # so the two ratio tables are reciprocal
    assert np.allclose(pos.ratios * neg.ratios, 1.0, rtol=1e-8)


def test_slowly_converging_rapid_profile_is_reported_as_failure():
    # A = exp(1 - 1/x) approaches its limit only logarithmically; at 5%
    # the default ladder is too short, which the verdict must show
    rep = verify("rapid", "rapid_exp1")
    assert rep.status == "fail"
    dev = rep.deviation.max(axis=1)
    assert dev[-1] < dev[0]


def test_report_schema_and_row_order():
    rep = verify("const_limit", "constant", ladder=[10.0, 100.0])
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["schema_version"] == SCHEMA_VERSION
    assert d["theorem_id"] == "const_limit" and d["scenario"] == "constant"
    keys = [(row["r"], row["mu"][0], row["mu"][1]) for row in d["rows"]]
    assert len(keys) == 2 * len(PROBES)
    assert [k[0] for k in keys] == sorted(k[0] for k in keys)
    assert keys[: len(PROBES)] == [(10.0, complex(m).real, complex(m).imag) for m in PROBES]
    assert "PASS" in rep.table().splitlines()[0]


def test_unknown_theorem_and_scenario():
    with pytest.raises(ValueError):
        verify("no_such_theorem", "constant")
    with pytest.raises(KeyError):
        verify("const_limit", "no_such_scenario")


def test_theorem_registry_covers_scenarios():
    assert {scenarios.get(n).theorem for n in scenarios.names()} == set(THEOREMS)

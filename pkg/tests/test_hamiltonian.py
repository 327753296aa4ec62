import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cansys.hamiltonian import (
    Constant,
    DiagonalPower,
    MeshPolicy,
    PiecewiseConstant,
    Potential,
    PowerLawAlpha,
    Primitive,
    SampledPrimitive,
    StepExample,
    cell_averages,
    clamp_psd,
    discretize,
    from_json,
    load,
    primitive_integrals,
    validate,
)

psd_cell = st.tuples(
    st.floats(0.01, 10), st.floats(0.01, 10), st.floats(-0.99, 0.99)
).map(lambda t: (t[0], t[2] * math.sqrt(t[0] * t[1]), t[1]))


def test_constant_primitives_are_linear():
    A, B, C = Constant(1.0, 0.5, 2.0).primitives(np.array([0.0, 1.0, 3.0]))
    assert A.tolist() == [0, 1, 3] and B.tolist() == [0, 0.5, 1.5] and C.tolist() == [0, 2, 6]


def test_power_law_alpha_is_trace_of_x_plus_power():
    # A = x^2, C = x for alpha = 1, so the trace integral is x + x^2
    H = PowerLawAlpha(1.0)
    x = np.array([0.5, 2.0])
    assert np.allclose(H.eta(x), x + x**2)
    A, B, C = PowerLawAlpha(-1.0).primitives(x)
    assert np.allclose(A, x) and np.allclose(C, x**2) and np.all(B == 0)


def test_step_example_breakpoint_and_primitives():
    H = StepExample()
    A, _, C = H.primitives(np.array([0.5, 1.0, 3.0]))
    assert A.tolist() == [0, 0, 2] and C.tolist() == [0.5, 1, 1]
    assert H.breakpoints().tolist() == [1.0]


def test_diagonal_power_has_unit_determinant_density():
    H = DiagonalPower(0.25)
    x = np.array([1.0, 1.0 + 1e-6])
    A, _, C = H.primitives(x)
    a, c = np.diff(A) / 1e-6, np.diff(C) / 1e-6
    assert a[0] * c[0] == pytest.approx(1.0, rel=1e-5)


@pytest.mark.parametrize(
    "H, valid",
    [
        (Constant(1, 0, 1), True),
        (Constant(1, 2, 1), False),  # indefinite
        (Constant(1, 0, 0), False),  # b = c = 0 excluded
        (Constant(1, 0, 1, L=5.0), False),  # limit circle
        (PowerLawAlpha(1.0), True),
        (StepExample(), True),
        (PiecewiseConstant([0, 1], [[1, 0, 1], [-1, 0, 1]]), False),
    ],
)
def test_validate(H, valid):
    assert validate(H).valid is valid


def test_validate_never_raises_on_garbage():
    bad = Primitive(lambda x: np.sqrt(-1.0 - x), lambda x: 0 * x, lambda x: x)
    with np.errstate(invalid="ignore"):
        rep = validate(bad)
    assert not rep.valid


def test_primitive_integrals_range():
    with pytest.raises(ValueError):
        primitive_integrals(Constant(1, 0, 1, L=1.0), 2.0)
    p = primitive_integrals(Constant(1, 0, 4), 2.0)
    assert (p.A, p.C) == (2.0, 8.0)


def test_cell_averages_are_exact_for_power_law():
    nodes = np.array([0.0, 1.0, 3.0])
    cells = cell_averages(PowerLawAlpha(1.0), nodes)
    # a = 2x: averages 1 and 4; c = 1
    assert np.allclose(cells[:, 0], [1.0, 4.0]) and np.allclose(cells[:, 2], 1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(psd_cell, min_size=1, max_size=6), st.lists(st.floats(0.05, 3), min_size=5, max_size=5))
def test_piecewise_constant_round_trip_through_cell_averages(cells, widths):
    bp = np.concatenate(([0.0], np.cumsum(widths[: len(cells) - 1])))
    H = PiecewiseConstant(bp, cells)
    assert validate(H).valid
    nodes = np.append(bp, bp[-1] + 1.0)
    assert np.allclose(cell_averages(H, nodes), np.asarray(cells), atol=1e-12)


def test_discretize_keeps_primitives_at_nodes():
    H = PowerLawAlpha(2.0)
    D = discretize(H, MeshPolicy("uniform", n_cells=50, x_max=2.0))
    x = D.breakpoints_
    assert np.allclose(D.primitives(x)[0], H.primitives(x)[0])


@pytest.mark.parametrize(
    "H",
    [Constant(0.5, 0.1, 0.5), PowerLawAlpha(-1.0), StepExample(), DiagonalPower(0.25),
     PiecewiseConstant([0, 1], [[1, 0, 1], [2, 0.5, 1]], L=10.0),
     SampledPrimitive([0, 1, 2], [0, 1, 3], [0, 0, 0.1], [0, 1, 2])],
)
def test_json_round_trip(H):
    back = from_json(json.loads(H.dumps()))
    x = np.array([0.3, 1.7, 2.5])
    assert type(back) is type(H)
    for u, v in zip(back.primitives(x), H.primitives(x)):
        assert np.allclose(u, v)


def test_unknown_form_rejected():
    with pytest.raises(ValueError):
        from_json({"form": "Nope", "params": {}})


def test_sampled_primitive_csv(tmp_path):
    H = SampledPrimitive([0, 1, 2], [0, 1, 3], [0, 0.2, 0.2], [0, 1, 2])
    H.to_csv(tmp_path / "h.csv")
    (tmp_path / "h.json").write_text(json.dumps({"form": "SampledPrimitive", "params": {"csv": "h.csv"}}))
    back = load(tmp_path / "h.json")
    assert np.array_equal(back.A, H.A) and np.array_equal(back.grid, H.grid)
    # beyond the table the last cell continues
    assert back.primitives(3.0)[0] == pytest.approx(5.0)


def test_sampled_primitive_checks():
    with pytest.raises(ValueError):
        SampledPrimitive([0, 1], [1, 2], [0, 0], [0, 1])
    with pytest.raises(ValueError):
        SampledPrimitive([0, 2, 1], [0, 1, 2], [0, 0, 0], [0, 1, 2])
    bad = SampledPrimitive([0, 1], [0, 1], [0, 2], [0, 1])
    assert not validate(bad).valid


def test_potential_primitives_integrate_cells():
    Q = Potential([0.0, 1.0], [[1, 0, -1], [2, 0.5, 0]])
    P = Q.primitives(np.array([0.5, 1.0, 3.0]))
    assert np.allclose(P, [[0.5, 0, -0.5], [1, 0, -1], [5, 1, -1]])
    assert Q.norm_bound() == 2
    assert np.array_equal(Potential.from_json(Q.to_json()).cells, Q.cells)


def test_clamp_psd_only_moves_rounding_noise():
    cells = np.array([[1.0, 1.0 + 1e-14, 1.0], [1.0, 0.0, 1.0]])
    out = clamp_psd(cells)
    assert out[0, 0] * out[0, 2] - out[0, 1] ** 2 >= 0
    assert np.array_equal(out[1], cells[1])
    with pytest.raises(ValueError):
        clamp_psd(np.array([[1.0, 2.0, 1.0]]))

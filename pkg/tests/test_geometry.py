import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import central_difference
from cosym.geometry import (
    Chart,
    ChartMismatchError,
    DegenerateMetricError,
    DomainError,
    KForm,
    MetricField,
    SmoothMap,
    VectorField,
    christoffel,
    constant_field,
    covariant_derivative_endo,
    covariant_derivative_vector,
    exterior_derivative,
    lie_bracket,
    nijenhuis,
    pullback,
)
from operator_fields import ALPHA, BETA, CHART, ENDO, METRIC, VECTOR

points = st.lists(st.floats(-0.95, 0.95), min_size=3, max_size=3).map(np.array)


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


# -- charts --


def test_chart_rejects_bad_bounds():
    with pytest.raises(ValueError):
        Chart.box("bad", [("x", 1, 0)])
    with pytest.raises(ValueError):
        Chart("bad", 2, (0, 0), (1, 1), ("x",))


def test_chart_check_and_sampling_is_seeded():
    CHART.check(np.zeros(3))
    with pytest.raises(DomainError):
        CHART.check(np.array([0.0, 2.0, 0.0]))
    with pytest.raises(DomainError):
        CHART.check(np.zeros(2))
    a, b = CHART.sample(5, seed=4), CHART.sample(5, seed=4)
    assert np.array_equal(a, b) and all(CHART.contains(p) for p in a)


def test_product_chart_concatenates():
    c = CHART.product(Chart.box("t", [("t", 0, 1)]))
    assert c.dim == 4 and c.coord_names[-1] == "t" and c.upper[-1] == 1.0


# -- derivatives vs the independent oracle --


@given(points)
def test_exterior_derivative_of_one_form(p):
    ours = exterior_derivative(ALPHA)(p)
    D = central_difference(lambda q: ALPHA(q), p)
    oracle = D.T - D  # (d a)_ij = d_i a_j - d_j a_i
    assert _rel(ours, oracle) < 1e-5


@given(points)
def test_exterior_derivative_of_two_form(p):
    ours = exterior_derivative(BETA)(p)
    D = central_difference(lambda q: BETA(q), p)  # D[j, k, i] = d_i beta_jk
    oracle = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                oracle[i, j, k] = D[j, k, i] - D[i, k, j] + D[i, j, k]
    assert _rel(ours, oracle) < 1e-5


@given(points)
def test_d_squared_vanishes(p):
    assert np.max(np.abs(exterior_derivative(exterior_derivative(ALPHA))(p))) < 1e-6


def christoffel_oracle(g, p):
    D = central_difference(lambda q: g(q), p)  # D[a, b, l] = d_l g_ab
    ginv = np.linalg.inv(g(p))
    G = np.zeros((3, 3, 3))
    for k in range(3):
        for i in range(3):
            for j in range(3):
                G[k, i, j] = 0.5 * sum(ginv[k, l] * (D[j, l, i] + D[i, l, j] - D[i, j, l]) for l in range(3))
    return G


@given(points)
def test_christoffel_matches_oracle(p):
    assert _rel(christoffel(METRIC, p), christoffel_oracle(METRIC, p)) < 1e-5


@given(points)
def test_nabla_endo_matches_oracle(p):
    G = christoffel_oracle(METRIC, p)
    D = central_difference(lambda q: ENDO(q), p)  # D[j, k, i] = d_i phi^j_k
    P = ENDO(p)
    oracle = np.einsum("jki->ijk", D) + np.einsum("jil,lk->ijk", G, P) - np.einsum("lik,jl->ijk", G, P)
    assert _rel(covariant_derivative_endo(METRIC, ENDO, p), oracle) < 1e-5


def test_levi_civita_is_metric_compatible():
    # d_i g(X, X) = 2 g(nabla_i X, X)
    for p in CHART.sample(10, seed=1):
        C = covariant_derivative_vector(METRIC, VECTOR, p)
        lhs = central_difference(lambda q: VECTOR(q) @ METRIC(q) @ VECTOR(q), p)
        rhs = 2 * C @ METRIC(p) @ VECTOR(p)
        assert _rel(lhs, rhs) < 1e-6


def test_lie_bracket_of_coordinate_fields_and_antisymmetry():
    e = [constant_field(VectorField, CHART, v) for v in np.eye(3)]
    p = np.array([0.2, -0.3, 0.5])
    assert np.allclose(lie_bracket(e[0], e[1])(p), 0.0)
    xdx = VectorField(CHART, lambda x: np.array([x[0], 0.0 * x[0], 0.0 * x[0]], dtype=object))
    assert lie_bracket(e[0], xdx)(p) == pytest.approx([1.0, 0.0, 0.0])
    assert lie_bracket(VECTOR, xdx)(p) == pytest.approx(-lie_bracket(xdx, VECTOR)(p))


def test_nijenhuis_vanishes_for_constant_complex_structure():
    J = constant_field(type(ENDO), CHART, [[0, -1, 0], [1, 0, 0], [0, 0, 0]])
    assert np.max(np.abs(nijenhuis(J).components(np.zeros(3)))) == 0.0
    assert np.max(np.abs(nijenhuis(ENDO).components(np.array([0.3, 0.1, 0.2])))) > 1e-3


@given(points)
def test_pullback_commutes_with_d(p):
    F = SmoothMap(CHART, CHART, lambda x: [0.5 * x[0] * x[1], 0.3 * x[2] + 0.1 * x[0], 0.4 * x[1] * x[1] - 0.2])
    a = exterior_derivative(pullback(F, ALPHA))(p * 0.9)
    b = pullback(F, exterior_derivative(ALPHA))(p * 0.9)
    assert _rel(a, b) < 1e-8


def test_non_jet_fields_fall_back_to_differences():
    slow = KForm(CHART, 1, lambda x: np.asarray(ALPHA(x)), jet=False)
    p = np.array([0.3, -0.2, 0.4])
    assert _rel(exterior_derivative(slow)(p), exterior_derivative(ALPHA)(p)) < 1e-8


def test_degenerate_metric_raises():
    g = MetricField(CHART, lambda x: np.diag([1.0 + 0.0 * x[0], 1.0, 0.0]))
    with pytest.raises(DegenerateMetricError):
        christoffel(g, np.zeros(3))


def test_chart_mismatch_raises():
    other = Chart.box("other", [("u", -1, 1), ("v", -1, 1), ("w", -1, 1)])
    with pytest.raises(ChartMismatchError):
        covariant_derivative_endo(METRIC, constant_field(type(ENDO), other, np.eye(3)), np.zeros(3))

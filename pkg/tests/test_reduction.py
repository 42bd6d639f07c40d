import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cosym import fixtures as F
from cosym.actions import fundamental_vector
from cosym.geometry import Chart, SmoothMap
from cosym.reduction import (
    DegenerateQuotient,
    ReductionDatum,
    ReductionError,
    basic_form_check,
    certify,
    cokahler_reduce,
    cosymplectic_reduce,
    kahler_reduce,
    decomposition_check,
    transport_check,
    moment_tangency_check,
    pushforward_dpi,
    reeb_pushforward_check,
    section_independence,
    tangent_decomposition,
    three_cosymplectic_reduce,
)
from cosym.structures import verify_3cosymplectic, verify_cokahler, verify_cosymplectic, verify_kahler


@pytest.fixture(scope="module")
def s1():
    d = F.s1_c2xr_datum()
    return d, cokahler_reduce(d)


def _q2_shift_datum(structure):
    chart = structure.chart
    act = F.coordinate_shift(chart, 3)
    q = Chart.box("R3", [("p1", -1, 1), ("q1", -1, 1), ("t", -1, 1)])
    sl = SmoothMap(q, chart, lambda x: [x[0], x[1], 0.0 * x[0], 0.0 * x[0], x[2]])
    return ReductionDatum(structure, act, F.coordinate_moment(act, 2), [0.0], sl)


def _identity_datum(structure):
    act = F.trivial_action(structure.chart)
    sl = SmoothMap(structure.chart, structure.chart, lambda x: x)
    return ReductionDatum(structure, act, None, [], sl)


def test_shift_reduction_gives_canonical_r3():
    red = cosymplectic_reduce(_q2_shift_datum(F.canonical_cosymplectic(2)))
    p = np.array([0.3, -0.2, 0.5])
    assert red.eta(p).tolist() == [0, 0, 1]
    assert np.array_equal(red.omega(p), F.canonical_omega(1))


def test_shift_reduction_of_flat_cokahler_is_flat():
    red = cokahler_reduce(_q2_shift_datum(F.flat_cokahler(2)))
    flat = F.flat_cokahler(1)
    p = np.array([0.3, -0.2, 0.5])
    for a, b in ((red.g, flat.g), (red.phi, flat.phi), (red.xi, flat.xi), (red.eta, flat.eta)):
        assert np.max(np.abs(a(p) - b(p))) < 1e-10


@pytest.mark.parametrize(
    "factory, reducer",
    [(F.canonical_cosymplectic, cosymplectic_reduce), (lambda: F.flat_cokahler(1), cokahler_reduce), (lambda: F.flat_kahler(2), kahler_reduce), (F.flat_3cosymplectic, three_cosymplectic_reduce)],
)
def test_trivial_group_reduction_is_identity(factory, reducer):
    s = factory()
    red = reducer(_identity_datum(s))
    pairs = [(red.triple(a), s.triple(a)) for a in range(3)] if hasattr(s, "triples") else [(red, s)]
    names = [n for n in ("eta", "omega", "g", "phi", "xi", "h", "J") if hasattr(s, n)]
    for p in s.chart.sample(5, seed=1):
        for out, src in pairs:
            for n in names:
                if hasattr(src, n) and hasattr(out, n):
                    assert np.max(np.abs(getattr(out, n)(p) - getattr(src, n)(p))) < 1e-12, n


def test_s1_reduction_is_fubini_study_times_line(s1):
    _, red = s1
    for p in red.chart.sample(20, seed=2):
        assert np.max(np.abs(red.g(p) - F.fubini_study_metric(p[0]))) < 1e-12


def test_s1_reduced_structure_is_cokahler(s1):
    _, red = s1
    report = verify_cokahler(red, samples=20, seed=4)
    assert report.passed, report.failures()
    assert report["nabla_phi"].value < 1e-4


def test_s1_reduced_cosymplectic_pair(s1):
    d, _ = s1
    red = cosymplectic_reduce(d)
    report = verify_cosymplectic(red, samples=20)
    assert report.passed and report.max_residual() < 1e-8


def test_basic_forms_and_reeb_pushforward(s1):
    d, red = s1
    assert basic_form_check(d, samples=30).max_residual() < 1e-9
    assert reeb_pushforward_check(d, red, samples=30).max_residual() < 1e-8


def test_decomposition_dimensions_and_residuals(s1):
    d, _ = s1
    td = tangent_decomposition(d, np.array([0.6, 0.3, 0.1]))
    assert td.dims == (3, 1, 1)
    assert td.residuals["spanning_rank"] == 5
    report = decomposition_check(d, samples=30)
    assert report.passed and report.max_residual("orth") < 1e-8
    assert transport_check(d, samples=15).max_residual() < 1e-7


def test_pushforward_of_slice_and_orbit_vectors(s1):
    d, _ = s1
    x = np.array([0.7, -0.4, 0.2])
    fr = d.frame(x)
    for i in range(3):
        assert pushforward_dpi(d, x, fr.dsigma[:, i]) == pytest.approx(np.eye(3)[i], abs=1e-12)
    assert np.max(np.abs(pushforward_dpi(d, x, fundamental_vector(d.action, [1.0], fr.p)))) < 1e-12


@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_pushforward_is_linear(c):
    d = F.s1_c2xr_datum()
    x = np.array([0.7, -0.4, 0.2])
    fr = d.frame(x)
    basis = np.hstack([fr.dsigma, fr.V])
    v = basis @ np.array(c)
    w = pushforward_dpi(d, x, v)
    assert np.max(np.abs(w - np.array(c[:3]))) < 1e-10


def test_section_independence(s1):
    d, red = s1
    g0 = d.action.group.exp([0.4])
    base = d.slice
    rotated = SmoothMap(base.source, base.target, lambda x: d.action.act(g0, base.evaluator(x)))
    assert section_independence(d, rotated, red, samples=15).passed


def test_kahler_reduction_and_point_quotient():
    k = kahler_reduce(F.s1_c2_datum())
    assert verify_kahler(k, samples=15).passed
    for p in k.chart.sample(5, seed=0):
        assert np.max(np.abs(k.h(p) - F.fubini_study_metric(p[0], with_time=False))) < 1e-12
    # x-shift on C with moment map -y at zeta = 0 has a point quotient
    c = F.flat_kahler(1)
    act = F.coordinate_shift(c.chart, 0)
    point = kahler_reduce(ReductionDatum(c, act, F.coordinate_moment(act, 1, sign=-1.0), [0.0], None))
    assert isinstance(point, DegenerateQuotient)


def test_three_cosymplectic_reduction():
    d = F.s1_hxr3_datum()
    red = three_cosymplectic_reduce(d)
    assert verify_3cosymplectic(red, samples=20).passed
    assert red.metric_agreement.max_residual() < 1e-8
    assert moment_tangency_check(d, samples=30).max_residual() < 1e-9


def test_dimension_bookkeeping_is_enforced():
    d = F.s1_c2xr_datum()
    wrong = Chart.box("Q", [("a", 0, 1), ("b", 0, 1)])
    with pytest.raises(ReductionError, match="dimension"):
        ReductionDatum(d.structure, d.action, d.moment, d.zeta, SmoothMap(wrong, d.structure.chart, lambda x: x))


def test_slice_off_the_level_set_is_refused():
    d = F.s1_c2xr_datum(level=0.5)
    off = ReductionDatum(d.structure, d.action, d.moment, [0.8], d.slice)
    assert not certify(off, samples=5, raise_on_failure=False)["level_set"].passed
    with pytest.raises(ReductionError):
        cokahler_reduce(off)


def test_rigid_body_isotropy_bookkeeping():
    from cosym import dynamics as D

    d = D.rigid_body_datum(D.RigidBodyParams(), [0.0, 0.0, 1.0])
    assert d.quotient_dim == 3
    # dividing by all of SO(3) at a non-central value leaves the wrong dimension
    with pytest.raises(ReductionError, match="dimension"):
        ReductionDatum(d.structure, d.action, d.moment, d.zeta, d.slice, orbit_basis=np.eye(3))

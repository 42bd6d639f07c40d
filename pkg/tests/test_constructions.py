import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosym import fixtures as F
from cosym.constructions import (
    DIRECTIONS,
    AtlasError,
    MappingTorusAtlas,
    commutation_cone_reduce,
    commutation_torus_reduce,
    cone3_3cosymplectic,
    cone_cokahler,
    cone_hyperkahler,
    cone_kahler,
    hermitian_isometry_check,
    lift_datum,
    mapping_torus_cokahler,
    moment_lift_check,
    reduced_map,
    sequential_cone3_check,
)
from cosym.reduction import ReductionDatum, kahler_reduce
from cosym.structures import (
    verify_3cosymplectic,
    verify_cokahler,
    verify_hyperkahler,
    verify_kahler,
)


def _same(a, b, names, pts, tol=1e-12):
    for p in pts:
        for n in names:
            assert np.max(np.abs(getattr(a, n)(p) - getattr(b, n)(p))) < tol, n


def test_cone_of_flat_plane_is_flat_r3():
    c = cone_cokahler(F.flat_kahler(1))
    _same(c, F.flat_cokahler(1), ("g", "phi", "xi", "eta"), c.chart.sample(10, seed=0))


def test_cone_of_flat_r3_is_flat_r4():
    k = cone_kahler(F.flat_cokahler(1))
    _same(k, F.flat_kahler(2), ("h", "J"), k.chart.sample(10, seed=0))


def test_round_trip_cone_is_flat_r4():
    k = cone_kahler(cone_cokahler(F.flat_kahler(1)))
    _same(k, F.flat_kahler(2), ("h", "J"), k.chart.sample(10, seed=1))


def test_cone3_of_flat_quaternions_is_flat_r7():
    tc = cone3_3cosymplectic(F.flat_hyperkahler())
    flat = F.flat_3cosymplectic()
    for p in tc.chart.sample(10, seed=2):
        for a in range(3):
            for got, want in zip(tc.triples[a], flat.triples[a]):
                assert np.max(np.abs(got(p) - want(p))) < 1e-12


def test_cone_hyperkahler_of_flat_r7_is_flat_h2():
    hk = cone_hyperkahler(F.flat_3cosymplectic())
    assert verify_hyperkahler(hk, samples=20).max_residual() < 1e-10
    assert np.array_equal(hk.h(np.zeros(8)), np.eye(8))


@pytest.mark.parametrize(
    "build, verify",
    [
        (lambda: cone_cokahler(F.flat_kahler(2)), verify_cokahler),
        (lambda: cone_kahler(F.flat_cokahler(2)), verify_kahler),
        (lambda: cone3_3cosymplectic(F.flat_hyperkahler()), verify_3cosymplectic),
        (lambda: cone_hyperkahler(F.flat_3cosymplectic()), verify_hyperkahler),
    ],
)
def test_cone_outputs_pass_target_verifier(build, verify):
    s = build()
    report = verify(s, samples=20, seed=3)
    assert report.passed, report.failures()


def test_cone_of_reduced_sphere_is_cokahler():
    red = kahler_reduce(F.s1_c2_datum())
    assert verify_cokahler(cone_cokahler(red), samples=20).passed


def test_reeb_and_contact_form_are_exact_on_cones():
    c = cone_cokahler(F.twisted_kahler())
    for p in c.chart.sample(5, seed=4):
        assert c.xi(p).tolist() == [0, 0, 0, 0, 1]
        assert c.eta(p).tolist() == [0, 0, 0, 0, 1]


def test_non_cokahler_input_gives_non_kahler_cone():
    assert not verify_cokahler(F.tilted_cokahler(), samples=10).passed
    assert not verify_kahler(cone_kahler(F.tilted_cokahler()), samples=10).passed


def test_non_kahler_input_fails_at_the_same_points():
    base = F.twisted_kahler()
    cone = cone_cokahler(base)
    pts = base.chart.sample(10, seed=5)
    bad = verify_kahler(base, points=pts)
    lifted = verify_cokahler(cone, points=np.hstack([pts, np.zeros((10, 1))]))
    assert not bad.passed and not lifted.passed
    worst_base = next(c for c in bad.checks if not c.passed).worst_point
    worst_cone = next(c for c in lifted.checks if not c.passed).worst_point
    assert np.allclose(worst_cone[:4], worst_base)


@given(st.floats(-1.5, 1.5), st.floats(0.1, 1.5))
@settings(max_examples=20)
def test_cone_complex_structure_squares_to_minus_one(x, rate):
    k = cone_kahler(F.tilted_cokahler(rate))
    p = np.array([x, 0.2, -0.4, 0.1])
    J = k.J(p)
    assert np.max(np.abs(J @ J + np.eye(4))) < 1e-10


def test_flipped_fiber_sign_breaks_reeb_relation():
    good = verify_3cosymplectic(cone3_3cosymplectic(F.flat_hyperkahler()), samples=10)
    bad = verify_3cosymplectic(cone3_3cosymplectic(F.flat_hyperkahler(), flip_fiber=0), samples=10)
    assert good.passed
    assert not bad.passed
    assert any("xi" in c.check_name for c in bad.checks if not c.passed)


def test_sequential_cones_match_direct_cone3():
    assert sequential_cone3_check(F.flat_hyperkahler(), samples=20).passed
    assert sequential_cone3_check(F.eguchi_hanson_datum().structure, samples=10).passed


def test_trivial_group_commutation_is_exact():
    k = F.flat_kahler(1)
    from cosym.geometry import SmoothMap

    datum = ReductionDatum(k, F.trivial_action(k.chart), None, [], SmoothMap(k.chart, k.chart, lambda x: x))
    report = commutation_cone_reduce(datum, "kahler->cokahler", grid_size=20)
    assert report.passed and report.max_abs_deviation == 0.0


@pytest.mark.parametrize("direction", DIRECTIONS)
def test_commutation_directions(direction):
    from cosym.cli import COMMUTE_DEFAULTS

    datum = F.builtin(COMMUTE_DEFAULTS[direction])
    report = commutation_cone_reduce(datum, direction, grid_size=30)
    assert report.passed and report.max_abs_deviation < 1e-6


def test_commutation_rejects_wrong_structure_and_direction():
    with pytest.raises(TypeError):
        commutation_cone_reduce(F.s1_c2_datum(), "cokahler->kahler")
    with pytest.raises(ValueError):
        commutation_cone_reduce(F.s1_c2_datum(), "sideways")


def test_lifted_datum_uses_product_slice():
    d = F.s1_c2_datum()
    lifted = lift_datum(d, cone_cokahler(d.structure), 1)
    assert lifted.quotient_dim == d.quotient_dim + 1
    x = np.array([0.5, 0.2, 0.3])
    assert np.allclose(lifted.slice(x)[:4], d.slice(x[:2]))
    assert lifted.slice(x)[4] == 0.3


@pytest.mark.parametrize("kind", ["identity", "rotation"])
def test_mapping_torus_overlap_consistency(kind):
    atlas, *_ = F.torus_fixture(kind)
    (s0, s1), report = mapping_torus_cokahler(atlas, samples=30)
    assert report.passed and report.max_residual() < 1e-10
    assert verify_cokahler(s0, samples=10).passed
    if kind == "identity":
        _same(s0, s1, ("g", "phi", "xi", "eta"), atlas.overlap_points(10))


def test_shear_is_not_an_isometry():
    k = F.flat_kahler(1)
    with pytest.raises(AtlasError):
        MappingTorusAtlas(k.chart, F.shear_map(k.chart), k)
    assert not hermitian_isometry_check(F.shear_map(k.chart), k, samples=5).passed


@pytest.mark.parametrize("kind, liftable", [("identity", True), ("rotation", True), ("shifted", False)])
def test_moment_lift(kind, liftable):
    atlas, mu, *_ = F.torus_fixture(kind)
    lift = moment_lift_check(atlas, mu)
    assert lift.liftable is liftable
    if liftable:
        assert np.max(np.abs(lift.constant)) < 1e-12 and len(lift.lifts) == 2
    else:
        assert lift.constant == pytest.approx([-0.25], abs=1e-12)
        assert lift.lifts is None


@pytest.mark.parametrize("kind", ["identity", "rotation"])
def test_torus_commutation(kind):
    atlas, _, datum, projection = F.torus_fixture(kind)
    report, iso, overlap = commutation_torus_reduce(atlas, datum, projection, grid_size=30)
    assert report.passed and report.max_abs_deviation < 1e-6
    assert iso.passed and iso.max_residual() < 1e-8
    assert overlap.passed
    if kind == "identity":
        assert report.max_abs_deviation < 1e-12


def test_reduced_monodromy_fixes_quotient_points_for_identity():
    atlas, _, datum, projection = F.torus_fixture("identity")
    f_red = reduced_map(datum, atlas.f, projection)
    x = np.array([0.6, 0.4])
    assert np.allclose(f_red(x), x, atol=1e-12)


def test_torus_commutation_needs_liftable_moment():
    atlas, mu, _, _ = F.torus_fixture("shifted")
    from cosym.constructions import MomentLiftError

    k = atlas.kahler
    act = mu.action
    datum = ReductionDatum(k, act, mu, [0.0], None)
    with pytest.raises(MomentLiftError):
        commutation_torus_reduce(atlas, datum, None)

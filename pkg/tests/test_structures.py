import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cosym import fixtures as F
from cosym.geometry import KForm, ScalarField, constant_field
from cosym.structures import (
    AlmostCosymplectic,
    NotAlmostCosymplecticError,
    flat,
    hamiltonian_vector,
    reeb_vector,
    sharp,
    verify,
    verify_almost_cosymplectic,
    verify_cokahler,
    verify_cosymplectic,
)

FLAT = {
    "cosymplectic-r5": F.canonical_cosymplectic,
    "cokahler-r3": lambda: F.flat_cokahler(1),
    "cokahler-r5": lambda: F.flat_cokahler(2),
    "kahler-c1": lambda: F.flat_kahler(1),
    "kahler-c2": lambda: F.flat_kahler(2),
    "hyperkahler-h1": lambda: F.flat_hyperkahler(1),
    "3cosymplectic-r7": F.flat_3cosymplectic,
}


@pytest.mark.parametrize("name", sorted(FLAT))
def test_flat_models_pass_exactly(name):
    report = verify(FLAT[name](), samples=40, seed=3)
    assert report.passed, report.failures()
    assert report.max_residual() < 1e-12


@pytest.mark.parametrize(
    "factory, failing",
    [
        (F.contact_r3, {"d_eta"}),
        (F.sasakian_r3, {"cosymplectic.d_eta", "nabla_phi"}),
        (F.tilted_cokahler, {"cosymplectic.d_eta", "nabla_phi", "normality"}),
        (F.twisted_kahler, {"d_Omega", "nabla_J"}),
    ],
)
def test_counterexamples_fail_where_expected(factory, failing):
    report = verify(factory(), samples=30, seed=1)
    assert set(report.failures()) == failing


def test_contact_structure_is_still_almost_cosymplectic():
    assert verify_almost_cosymplectic(F.contact_r3(), samples=30).passed


def test_swapped_triple_fails_a_permutation_relation():
    report = verify(F.flat_3cosymplectic(swap_in_triple=1), samples=10)
    assert not report.passed
    assert any(f.startswith("phi_") for f in report.failures())


def test_canonical_flat_matrix_is_two_blocks_and_identity():
    s = F.canonical_cosymplectic(2)
    M = flat(s, np.zeros(5))
    assert np.linalg.det(M) == pytest.approx(1.0)
    block = M[:2, :2]
    assert np.allclose(M[2:4, 2:4], block) and np.allclose(block, -block.T) and abs(block[0, 1]) == 1.0
    assert M[4, 4] == 1.0 and np.count_nonzero(M[4, :4]) == 0


def test_degenerate_form_raises_singularity():
    chart = F.darboux_chart(1)
    s = AlmostCosymplectic(chart, F.dt_form(chart), constant_field(KForm, chart, np.zeros((3, 3))))
    with pytest.raises(NotAlmostCosymplecticError):
        flat(s, np.zeros(3))


def test_degeneracy_at_p_zero_is_located():
    chart = F.darboux_chart(1)
    om = KForm(chart, 2, lambda x: np.array([[0.0, x[0], 0.0], [-x[0], 0.0, 0.0], [0.0, 0.0, 0.0]], dtype=object))
    s = AlmostCosymplectic(chart, F.dt_form(chart), om)
    pts = [[0.5, 0.1, 0.0], [0.0, 0.3, 0.2], [-1.0, 0.0, 0.0]]
    r = verify_almost_cosymplectic(s, points=pts)["flat_min_abs_det"]
    assert not r.passed and r.worst_point[0] == 0.0


@given(st.integers(0, 10_000))
def test_flat_sharp_round_trip_on_perturbed_model(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(scale=0.1, size=(5, 5))
    om = F.canonical_omega(2) + (A - A.T)
    e = np.zeros(5)
    e[-1] = 1.0
    e += rng.normal(scale=0.05, size=5)
    chart = F.darboux_chart(2)
    s = AlmostCosymplectic(chart, constant_field(KForm, chart, e), constant_field(KForm, chart, om))
    p = np.zeros(5)
    v = rng.normal(size=5)
    assert np.max(np.abs(sharp(s, p, flat(s, p) @ v) - v)) < 1e-10
    xi = reeb_vector(s, p)
    assert np.max(np.abs(om @ xi)) < 1e-10 and e @ xi == pytest.approx(1.0, abs=1e-10)


def test_reeb_of_canonical_model_is_dt():
    assert reeb_vector(F.canonical_cosymplectic(2), np.full(5, 0.3)).tolist() == [0, 0, 0, 0, 1]


@pytest.mark.parametrize(
    "f, expected",
    [
        (lambda x: x[4], [0, 0, 0, 0, 0]),  # f = t
        (lambda x: x[1], [-1, 0, 0, 0, 0]),  # f = q1
        (lambda x: x[0], [0, 1, 0, 0, 0]),  # f = p1
    ],
)
def test_hamiltonian_fields_in_darboux_chart(f, expected):
    s = F.canonical_cosymplectic(2)
    X = hamiltonian_vector(s, ScalarField(s.chart, f), np.array([0.1, 0.2, -0.3, 0.4, 0.5]))
    assert X == pytest.approx(expected, abs=1e-14)


def test_hamiltonian_defining_equations_for_nonlinear_function():
    s = F.canonical_cosymplectic(2)
    f = ScalarField(s.chart, lambda x: x[0] * x[0] * x[3] + x[4] * x[1] + 0.3 * x[2])
    for p in s.chart.sample(100, seed=2):
        X = hamiltonian_vector(s, f, p)
        _, df = f.derivatives(p)
        xi = reeb_vector(s, p)
        # iota_X omega = df - xi(f) eta and eta(X) = 0
        assert np.max(np.abs(X @ s.omega(p) - (df - (df @ xi) * s.eta(p)))) < 1e-9
        assert abs(s.eta(p) @ X) < 1e-9


def test_scaled_form_still_passes():
    s = F.canonical_cosymplectic(2, scale=2.0)
    assert verify_cosymplectic(s, samples=20).passed


def test_non_closed_two_form_fails_d_omega():
    chart = F.darboux_chart(1)

    def om(x):  # dp^dq + q dp^dt in (p, q, t)
        return np.array([[0.0, 1.0, x[1]], [-1.0, 0.0, 0.0], [-x[1], 0.0, 0.0]], dtype=object)

    s = AlmostCosymplectic(chart, F.dt_form(chart), KForm(chart, 2, om))
    assert verify_cosymplectic(s, samples=20).failures() == ["d_omega"]


def test_flat_cokahler_reports_every_check():
    names = [c.check_name for c in verify_cokahler(F.flat_cokahler(1), samples=5).checks]
    for n in ("phi_squared", "eta_xi", "metric_compatibility", "nabla_phi", "normality", "cosymplectic.d_omega"):
        assert n in names

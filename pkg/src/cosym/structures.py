"""Cosymplectic, coKähler, 3-cosymplectic, Kähler and hyperKähler bundles.

Conventions: ``omega(X, Y) = g(X, phi Y)`` (matrix ``g @ phi``) for almost
contact metric structures and ``Omega(X, Y) = h(X, J Y)`` for Kähler ones.
The flat map is ``X -> omega(X, -) + eta(X) eta``; interior products contract
the first slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Chart,
    DegenerateMetricError,
    EndoField,
    KForm,
    MetricField,
    ScalarField,
    VectorField,
    as_array,
    covariant_derivative_endo,
    exterior_derivative,
    nijenhuis,
)
from .report import ResidualAccumulator, Tolerances, VerificationReport

CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


class NotAlmostCosymplecticError(ArithmeticError):
    def __init__(self, point, detail=""):
        self.point = np.asarray(point, dtype=float)
        super().__init__(f"flat map is singular at {self.point.tolist()} {detail}".strip())


def _product_form(a, b, name, jet):
    """2-form with matrix ``a(x) @ b(x)`` (metric times endomorphism)."""
    chart = a.chart
    return KForm(
        chart,
        2,
        lambda x: as_array(a.evaluator(x), x, a.shape) @ as_array(b.evaluator(x), x, b.shape),
        jet=jet,
        name=name,
    )


@dataclass
class AlmostCosymplectic:
    chart: Chart
    eta: KForm
    omega: KForm

    def __post_init__(self):
        if self.eta.degree != 1 or self.omega.degree != 2:
            raise ValueError("eta must be a 1-form and omega a 2-form")
        if self.chart.dim % 2 != 1:
            raise ValueError("an almost cosymplectic chart has odd dimension")


@dataclass
class AlmostContactMetric:
    chart: Chart
    g: MetricField
    phi: EndoField
    xi: VectorField
    eta: KForm

    @property
    def omega(self) -> KForm:
        return _product_form(self.g, self.phi, "omega", self.g.jet and self.phi.jet)

    def cosymplectic(self) -> AlmostCosymplectic:
        return AlmostCosymplectic(self.chart, self.eta, self.omega)


@dataclass
class ThreeCosymplectic:
    chart: Chart
    g: MetricField
    triples: tuple  # three (phi, xi, eta)

    def triple(self, a: int) -> AlmostContactMetric:
        phi, xi, eta = self.triples[a]
        return AlmostContactMetric(self.chart, self.g, phi, xi, eta)

    def omega(self, a: int) -> KForm:
        return self.triple(a).omega


@dataclass
class KahlerStructure:
    chart: Chart
    h: MetricField
    J: EndoField

    @property
    def Omega(self) -> KForm:
        return _product_form(self.h, self.J, "Omega", self.h.jet and self.J.jet)


@dataclass
class HyperKahlerStructure:
    chart: Chart
    h: MetricField
    Js: tuple

    def kahler(self, a: int) -> KahlerStructure:
        return KahlerStructure(self.chart, self.h, self.Js[a])


# ---------------------------------------------------------------------------
# flat map, Reeb and Hamiltonian fields


def flat_matrix(s: AlmostCosymplectic, p) -> np.ndarray:
    """Matrix of X -> omega(X, -) + eta(X) eta; raises if singular at p."""
    om = s.omega(p)
    et = s.eta(p)
    F = -om + np.outer(et, et)
    cond = np.linalg.cond(F)
    if not np.isfinite(cond) or cond > 1e12:
        raise NotAlmostCosymplecticError(p, f"(condition {cond:.3e})")
    return F


def flat(s: AlmostCosymplectic, p) -> np.ndarray:
    s.chart.check(p)
    return flat_matrix(s, p)


def sharp(s: AlmostCosymplectic, p, covector) -> np.ndarray:
    return np.linalg.solve(flat_matrix(s, p), np.asarray(covector, dtype=float))


def reeb_vector(s: AlmostCosymplectic, p) -> np.ndarray:
    return np.linalg.solve(flat_matrix(s, p), s.eta(p))


def reeb_field(s: AlmostCosymplectic) -> VectorField:
    return VectorField(s.chart, lambda x: reeb_vector(s, x), jet=False, name="xi")


def hamiltonian_vector(s: AlmostCosymplectic, f: ScalarField, p) -> np.ndarray:
    F = flat_matrix(s, p)
    et = s.eta(p)
    xi = np.linalg.solve(F, et)
    _, df = f.derivatives(p)
    return np.linalg.solve(F, df - (df @ xi) * et)


def hamiltonian_vector_field(s: AlmostCosymplectic, f: ScalarField) -> VectorField:
    """``X_f = flat^{-1}(df - xi(f) eta)``."""
    return VectorField(s.chart, lambda x: hamiltonian_vector(s, f, x), jet=False, name=f"X_{f.name}")


# ---------------------------------------------------------------------------
# verification


def sample_points(chart: Chart, samples: int, seed: int, points=None) -> np.ndarray:
    if points is not None:
        return np.atleast_2d(np.asarray(points, dtype=float))
    return chart.sample(samples, seed)


def _amax(a) -> float:
    return float(np.max(np.abs(a), initial=0.0))


def _bordered_pfaffian_abs(eta, omega) -> float:
    m = eta.shape[0]
    B = np.zeros((m + 1, m + 1))
    B[0, 1:] = eta
    B[1:, 0] = -eta
    B[1:, 1:] = omega
    return math.sqrt(abs(np.linalg.det(B)))


def verify_almost_cosymplectic(s, samples=200, seed=0, points=None, tol: Tolerances | None = None):
    tol = tol or Tolerances()
    pts = sample_points(s.chart, samples, seed, points)
    n = (s.chart.dim - 1) // 2
    det_acc = ResidualAccumulator("flat_min_abs_det", tol.nondegeneracy, bound="min")
    vol_acc = ResidualAccumulator("volume_min_abs", tol.nondegeneracy, bound="min")
    for p in pts:
        om, et = s.omega(p), s.eta(p)
        det_acc.add(abs(np.linalg.det(-om + np.outer(et, et))), p)
        vol_acc.add(math.factorial(n) * _bordered_pfaffian_abs(et, om), p)
    report = VerificationReport("almost_cosymplectic")
    report.add(det_acc.result())
    report.add(vol_acc.result())
    return report


def verify_cosymplectic(s, samples=200, seed=0, points=None, tol: Tolerances | None = None):
    tol = tol or Tolerances()
    pts = sample_points(s.chart, samples, seed, points)
    report = verify_almost_cosymplectic(s, points=pts, tol=tol)
    report.name = "cosymplectic"
    d_eta, d_omega = exterior_derivative(s.eta), exterior_derivative(s.omega)
    acc_e = ResidualAccumulator("d_eta", tol.derivative(s.eta))
    acc_o = ResidualAccumulator("d_omega", tol.derivative(s.omega))
    for p in pts:
        acc_e.add(_amax(d_eta(p)), p)
        acc_o.add(_amax(d_omega(p)), p)
    report.add(acc_e.result())
    report.add(acc_o.result())
    return report


def _acm_algebra(s: AlmostContactMetric, p):
    g, P, xi, eta = s.g(p), s.phi(p), s.xi(p), s.eta(p)
    n = s.chart.dim
    return {
        "phi_squared": _amax(P @ P + np.eye(n) - np.outer(xi, eta)),
        "eta_xi": abs(eta @ xi - 1.0),
        "metric_compatibility": _amax(P.T @ g @ P - g + np.outer(eta, eta)),
        "metric_symmetric": _amax(g - g.T),
        "omega_antisymmetric": _amax(g @ P + (g @ P).T),
        "reeb_consistency": _amax(xi @ g @ P),
    }


def verify_almost_contact_metric(s: AlmostContactMetric, samples=200, seed=0, points=None, tol=None):
    tol = tol or Tolerances()
    pts = sample_points(s.chart, samples, seed, points)
    names = ["phi_squared", "eta_xi", "metric_compatibility", "metric_symmetric", "omega_antisymmetric", "reeb_consistency"]
    accs = {k: ResidualAccumulator(k, tol.algebraic) for k in names}
    pos = ResidualAccumulator("metric_min_eigenvalue", 0.0, bound="min")
    for p in pts:
        for k, v in _acm_algebra(s, p).items():
            accs[k].add(v, p)
        pos.add(np.linalg.eigvalsh(0.5 * (s.g(p) + s.g(p).T))[0], p)
    report = VerificationReport("almost_contact_metric")
    for k in names:
        report.add(accs[k].result())
    report.add(pos.result())
    return report


def verify_cokahler(s: AlmostContactMetric, samples=200, seed=0, points=None, tol: Tolerances | None = None):
    """Almost contact metric axioms, the induced cosymplectic pair, ``nabla phi = 0``
    and the normality cross-check.

    Normality is tested as ``N_phi + d(eta) (x) xi = 0`` with ``d`` the
    unnormalized exterior derivative used throughout this package, which is
    the usual ``N_phi + 2 d(eta) (x) xi`` in the 1/2-normalized convention.
    """
    tol = tol or Tolerances()
    pts = sample_points(s.chart, samples, seed, points)
    report = verify_almost_contact_metric(s, points=pts, tol=tol)
    report.name = "cokahler"
    report.extend(verify_cosymplectic(s.cosymplectic(), points=pts, tol=tol), prefix="cosymplectic.")
    dtol = tol.derivative(s.g, s.phi, s.eta)
    nab = ResidualAccumulator("nabla_phi", dtol)
    nor = ResidualAccumulator("normality", dtol)
    N = nijenhuis(s.phi)
    d_eta = exterior_derivative(s.eta)
    for p in pts:
        try:
            nab.add(_amax(covariant_derivative_endo(s.g, s.phi, p)), p)
        except DegenerateMetricError as err:
            nab.flag(p, str(err))
        comp = N.components(p) + np.einsum("ij,k->kij", d_eta(p), s.xi(p))
        nor.add(_amax(comp), p)
    report.add(nab.result())
    report.add(nor.result())
    return report


def verify_3cosymplectic(s: ThreeCosymplectic, samples=200, seed=0, points=None, tol: Tolerances | None = None):
    tol = tol or Tolerances()
    pts = sample_points(s.chart, samples, seed, points)
    report = VerificationReport("3cosymplectic")
    for a in range(3):
        report.extend(verify_cokahler(s.triple(a), points=pts, tol=tol), prefix=f"triple{a + 1}.")
    names = []
    for al, be, ga in CYCLIC:
        tag = f"{al + 1}{be + 1}{ga + 1}"
        names += [f"phi_{tag}", f"xi_{tag}", f"eta_{tag}", f"omega_xi_relation_{tag}"]
    accs = {k: ResidualAccumulator(k, tol.algebraic) for k in names}
    for p in pts:
        g = s.g(p)
        vals = [(s.triples[a][0](p), s.triples[a][1](p), s.triples[a][2](p)) for a in range(3)]
        for al, be, ga in CYCLIC:
            tag = f"{al + 1}{be + 1}{ga + 1}"
            (Pa, xa, ea), (Pb, xb, eb), (Pc, xc, ec) = vals[al], vals[be], vals[ga]
            r_phi = max(
                _amax(Pc - (Pa @ Pb - np.outer(xa, eb))),
                _amax(Pc - (-Pb @ Pa + np.outer(xb, ea))),
            )
            r_xi = max(_amax(xc - Pa @ xb), _amax(xc + Pb @ xa))
            r_eta = max(_amax(ec - Pb.T @ ea), _amax(ec + Pa.T @ eb))
            # omega_beta(X, xi_alpha) = -eta_gamma(X)
            r_lem = _amax(g @ Pb @ xa + ec)
            accs[f"phi_{tag}"].add(r_phi, p)
            accs[f"xi_{tag}"].add(r_xi, p)
            accs[f"eta_{tag}"].add(r_eta, p)
            accs[f"omega_xi_relation_{tag}"].add(r_lem, p)
    for k in names:
        report.add(accs[k].result())
    return report


def verify_kahler(s: KahlerStructure, samples=200, seed=0, points=None, tol: Tolerances | None = None):
    tol = tol or Tolerances()
    pts = sample_points(s.chart, samples, seed, points)
    n = s.chart.dim
    alg = {k: ResidualAccumulator(k, tol.algebraic) for k in ("J_squared", "hermitian", "metric_symmetric")}
    pos = ResidualAccumulator("metric_min_eigenvalue", 0.0, bound="min")
    dtol = tol.derivative(s.h, s.J)
    d_acc = ResidualAccumulator("d_Omega", dtol)
    nab = ResidualAccumulator("nabla_J", dtol)
    dOm = exterior_derivative(s.Omega)
    for p in pts:
        h, J = s.h(p), s.J(p)
        alg["J_squared"].add(_amax(J @ J + np.eye(n)), p)
        alg["hermitian"].add(_amax(J.T @ h @ J - h), p)
        alg["metric_symmetric"].add(_amax(h - h.T), p)
        pos.add(np.linalg.eigvalsh(0.5 * (h + h.T))[0], p)
        d_acc.add(_amax(dOm(p)), p)
        try:
            nab.add(_amax(covariant_derivative_endo(s.h, s.J, p)), p)
        except DegenerateMetricError as err:
            nab.flag(p, str(err))
    report = VerificationReport("kahler")
    for acc in (*alg.values(), pos, d_acc, nab):
        report.add(acc.result())
    return report


def verify_hyperkahler(s: HyperKahlerStructure, samples=200, seed=0, points=None, tol: Tolerances | None = None):
    tol = tol or Tolerances()
    pts = sample_points(s.chart, samples, seed, points)
    report = VerificationReport("hyperkahler")
    for a in range(3):
        report.extend(verify_kahler(s.kahler(a), points=pts, tol=tol), prefix=f"J{a + 1}.")
    accs = {}
    for al, be, ga in CYCLIC:
        accs[(al, be, ga)] = ResidualAccumulator(f"quaternion_J{al + 1}J{be + 1}=J{ga + 1}", tol.algebraic)
    for p in pts:
        Js = [J(p) for J in s.Js]
        for (al, be, ga), acc in accs.items():
            acc.add(_amax(Js[al] @ Js[be] - Js[ga]), p)
    for acc in accs.values():
        report.add(acc.result())
    return report


def verify(structure, **kw) -> VerificationReport:
    """Dispatch to the verifier matching the structure type."""
    if isinstance(structure, ThreeCosymplectic):
        return verify_3cosymplectic(structure, **kw)
    if isinstance(structure, AlmostContactMetric):
        return verify_cokahler(structure, **kw)
    if isinstance(structure, HyperKahlerStructure):
        return verify_hyperkahler(structure, **kw)
    if isinstance(structure, KahlerStructure):
        return verify_kahler(structure, **kw)
    if isinstance(structure, AlmostCosymplectic):
        return verify_cosymplectic(structure, **kw)
    raise TypeError(f"no verifier for {type(structure).__name__}")

"""Reduction through explicit local slices of the level set.

A slice ``sigma: Q -> M`` lands in ``mu^-1(zeta)`` and is transverse to the
orbits, so it inverts the quotient projection on basic tensors.  At
``p = sigma(x)`` the level-set tangent space splits g-orthogonally into the
orbit directions ``V`` and the horizontal space ``H``; reduced metric and
endomorphisms are read off on ``H`` and pushed to ``Q`` by solving
``v = dsigma w + V c``.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .actions import (
    GroupAction,
    TripleMomentMap,
    centrality,
    fundamental_matrix,
    isotropy_basis,
)
from .geometry import Chart, EndoField, KForm, MetricField, SmoothMap, VectorField
from .report import ResidualAccumulator, Tolerances, VerificationReport
from .structures import (
    AlmostContactMetric,
    AlmostCosymplectic,
    HyperKahlerStructure,
    KahlerStructure,
    ThreeCosymplectic,
    reeb_vector,
    sample_points,
)


class ReductionError(ValueError):
    pass


class SliceError(ReductionError):
    """The slice leaves the level set."""


class RankError(ReductionError):
    """Transversality or regular-value failure."""

    def __init__(self, message, point=None):
        self.point = None if point is None else np.asarray(point, dtype=float)
        super().__init__(message if point is None else f"{message} at {self.point.tolist()}")


class NotTangentError(ReductionError):
    pass


class StructureError(ReductionError):
    """The ambient data does not descend (e.g. H is not phi-invariant)."""


class ReducedMetricMismatch(ReductionError):
    pass


def null_space(M, n, tol=1e-9):
    """Orthonormal basis (columns) of ker M for an m x n matrix; also the rank."""
    if M.shape[0] == 0:
        return np.eye(n), 0
    _, s, Vt = np.linalg.svd(M)
    scale = max(1.0, s[0]) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    return Vt[rank:].T, rank


def _moment_list(moment):
    if moment is None:
        return []
    if isinstance(moment, TripleMomentMap):
        return list(moment.maps)
    return [moment]


@dataclass
class ReductionDatum:
    """Structure, action, moment map(s), value and slice.

    ``orbit_basis`` (rows of algebra coordinates) selects the subgroup whose
    orbits are divided out; the default is the whole algebra, which is the
    central case.  For a non-central value pass the isotropy algebra.
    ``slice`` is ``None`` exactly when the quotient is zero-dimensional.
    """

    structure: object
    action: GroupAction
    moment: object
    zeta: object
    slice: SmoothMap | None
    tolerances: Tolerances = field(default_factory=Tolerances)
    orbit_basis: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        k = self.action.group.dim
        self.maps = _moment_list(self.moment)
        z = np.asarray(self.zeta, dtype=float)
        self.zetas = [z.reshape(k)] if len(self.maps) == 1 else [row.reshape(k) for row in z.reshape(len(self.maps), k)]
        if self.orbit_basis is None:
            self.orbit_basis = np.eye(k)
        self.orbit_basis = np.asarray(self.orbit_basis, dtype=float).reshape(len(self.orbit_basis), k)
        chart = self.action.chart
        if self.structure.chart.dim != chart.dim:
            raise ReductionError("structure and action live on different charts")
        expected = chart.dim - len(self.maps) * k - self.orbit_basis.shape[0]
        self.quotient_dim = expected
        if self.slice is None:
            if expected != 0:
                raise ReductionError(f"a {expected}-dimensional quotient needs a slice")
        else:
            if self.slice.target.dim != chart.dim:
                raise ReductionError("slice target is not the ambient chart")
            if self.slice.source.dim != expected:
                raise ReductionError(
                    f"dimension bookkeeping: quotient chart has dim {self.slice.source.dim}, expected {expected}"
                )
        self._cache: OrderedDict = OrderedDict()

    @property
    def degenerate(self) -> bool:
        return self.quotient_dim == 0

    @property
    def quotient(self) -> Chart | None:
        return None if self.slice is None else self.slice.source

    @property
    def metric(self):
        s = self.structure
        if isinstance(s, (AlmostContactMetric, ThreeCosymplectic)):
            return s.g
        if isinstance(s, (KahlerStructure, HyperKahlerStructure)):
            return s.h
        return None

    # -- pointwise frame ---------------------------------------------------

    def frame(self, x) -> "Frame":
        key = tuple(np.asarray(x, dtype=float).tolist())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        fr = Frame.build(self, np.asarray(key))
        self._cache[key] = fr
        if len(self._cache) > 4096:
            self._cache.popitem(last=False)
        return fr


class Frame:
    """Slice data at one quotient point; orbit and horizontal data on demand."""

    def __init__(self, datum: ReductionDatum, x):
        self.datum = datum
        self.x = x
        self.p, self.dsigma = datum.slice.jacobian(x)

    @classmethod
    def build(cls, datum: ReductionDatum, x):
        return cls(datum, x)

    @cached_property
    def V(self):
        return fundamental_matrix(self.datum.action, self.p) @ self.datum.orbit_basis.T

    @cached_property
    def dmu(self):
        n = self.p.shape[0]
        maps = self.datum.maps
        dmu = np.vstack([m.differential(self.p) for m in maps]) if maps else np.zeros((0, n))
        _, rank = null_space(dmu, n)
        if rank != dmu.shape[0]:
            raise RankError(f"moment map differential has rank {rank} < {dmu.shape[0]} (not a regular value)", self.p)
        return dmu

    @cached_property
    def g(self):
        gfield = self.datum.metric
        return None if gfield is None else gfield(self.p)

    @cached_property
    def H(self):
        if self.g is None:
            raise ReductionError("horizontal space needs a metric structure")
        H, _ = null_space(np.vstack([self.dmu, self.V.T @ self.g]), self.p.shape[0])
        if H.shape[1] != self.datum.quotient_dim:
            raise RankError(f"horizontal space has dim {H.shape[1]}, expected {self.datum.quotient_dim}", self.p)
        return H

    @cached_property
    def P_H(self):
        H, g = self.H, self.g
        return H @ np.linalg.solve(H.T @ g @ H, H.T @ g)

    def pushforward(self, v, tol=1e-8, check_level=True):
        v = np.asarray(v, dtype=float)
        if check_level and self.dmu.size:
            drift = float(np.max(np.abs(self.dmu @ v)))
            if drift > tol * max(1.0, np.linalg.norm(v)):
                raise NotTangentError(f"vector leaves the level set (|dmu(v)| = {drift:.3e})")
        A = np.hstack([self.dsigma, self.V])
        sol, *_ = np.linalg.lstsq(A, v, rcond=None)
        res = float(np.max(np.abs(A @ sol - v), initial=0.0))
        if res > tol * max(1.0, float(np.max(np.abs(v), initial=0.0))):
            raise NotTangentError(f"vector is not tangent to the level set (residual {res:.3e})")
        return sol[: self.dsigma.shape[1]]

    def push_matrix(self, M):
        """Pushforward of each column of M (columns already tangent)."""
        A = np.hstack([self.dsigma, self.V])
        sol, *_ = np.linalg.lstsq(A, M, rcond=None)
        return sol[: self.dsigma.shape[1]]

    @property
    def horizontal_lift(self):
        """Columns: horizontal lifts of the coordinate vectors of Q."""
        return self.P_H @ self.dsigma


def pushforward_dpi(datum: ReductionDatum, x, v, tol: float = 1e-8) -> np.ndarray:
    """Solve ``v = dsigma w + sum_a c_a A_a*`` and return w."""
    return datum.frame(x).pushforward(v, tol)


# ---------------------------------------------------------------------------
# certification


def certify(datum: ReductionDatum, samples=50, seed=0, points=None, raise_on_failure=True) -> VerificationReport:
    """Level set, transversality and centrality of the datum at sampled slice points."""
    tol = datum.tolerances
    report = VerificationReport("reduction_datum", meta={"quotient_dim": datum.quotient_dim})
    group = datum.action.group
    full = datum.orbit_basis.shape[0] == group.dim
    for a, z in enumerate(datum.zetas):
        if full:
            c = centrality(group, z, seed=seed, tol=tol.algebraic)
        else:
            c = _isotropy_fixes(datum, z, seed, tol.algebraic)
        c.check_name = f"zeta_central_{a + 1}" if len(datum.zetas) > 1 else "zeta_central"
        report.add(c)
    if datum.degenerate:
        report.degenerate = True
        return report
    pts = sample_points(datum.quotient, samples, seed, points)
    lvl = ResidualAccumulator("level_set", 1e-8)
    trans = ResidualAccumulator("transversality_min_singular", 1e-8, bound="min")
    for x in pts:
        p = datum.slice(x)
        if datum.maps:
            lvl.add(max(float(np.max(np.abs(m(p) - z))) for m, z in zip(datum.maps, datum.zetas)), x)
        _, dsig = datum.slice.jacobian(x)
        V = fundamental_matrix(datum.action, p) @ datum.orbit_basis.T
        s = np.linalg.svd(np.hstack([dsig, V]), compute_uv=False)
        trans.add(s[-1] if s.size else 1.0, x)
    report.add(lvl.result())
    report.add(trans.result())
    if raise_on_failure:
        if not report["level_set"].passed:
            c = report["level_set"]
            raise SliceError(f"slice leaves the level set by {c.value:.3e} at {c.worst_point}")
        if not report["transversality_min_singular"].passed:
            raise RankError("slice is not transverse to the orbits", report["transversality_min_singular"].worst_point)
        for c in report.checks:
            if c.check_name.startswith("zeta_central") and not c.passed:
                raise ReductionError(f"zeta is not fixed by the coadjoint action ({c.value:.3e})")
    return report


def _isotropy_fixes(datum, z, seed, tol):
    acc = ResidualAccumulator("zeta_central", tol)
    group = datum.action.group
    rng = np.random.default_rng(seed)
    for _ in range(20):
        c = rng.uniform(-0.5, 0.5, datum.orbit_basis.shape[0]) @ datum.orbit_basis
        g = group.exp(c)
        acc.add(np.max(np.abs(group.coadjoint(g, z) - z)), c)
    return acc.result()


def basic_form_check(datum: ReductionDatum, samples=50, seed=0, points=None) -> VerificationReport:
    """eta(A*) = 0 and omega(A*, X) = 0 for X tangent to the level set."""
    tol = datum.tolerances
    report = VerificationReport("basic_forms")
    if datum.degenerate:
        report.degenerate = True
        return report
    pts = sample_points(datum.quotient, samples, seed, points)
    pairs = _cosymplectic_pairs(datum.structure)
    accs = []
    for a, _ in enumerate(pairs):
        tag = "" if len(pairs) == 1 else str(a + 1)
        accs.append(
            (ResidualAccumulator(f"eta{tag}_vertical", tol.algebraic), ResidualAccumulator(f"omega{tag}_vertical", 1e-9))
        )
    for x in pts:
        fr = datum.frame(x)
        T, _ = null_space(fr.dmu, fr.p.shape[0])
        for (eta, om), (ae, ao) in zip(pairs, accs):
            if eta is not None:
                ae.add(np.max(np.abs(eta(fr.p) @ fr.V), initial=0.0), x)
            ao.add(np.max(np.abs(fr.V.T @ om(fr.p) @ T), initial=0.0), x)
    for ae, ao in accs:
        if pairs[0][0] is not None:
            report.add(ae.result())
        report.add(ao.result())
    return report


def _cosymplectic_pairs(s):
    if isinstance(s, ThreeCosymplectic):
        return [(s.triple(a).eta, s.omega(a)) for a in range(3)]
    if isinstance(s, AlmostContactMetric):
        return [(s.eta, s.omega)]
    if isinstance(s, AlmostCosymplectic):
        return [(s.eta, s.omega)]
    if isinstance(s, HyperKahlerStructure):
        return [(None, s.kahler(a).Omega) for a in range(3)]
    if isinstance(s, KahlerStructure):
        return [(None, s.Omega)]
    raise TypeError(type(s).__name__)


# ---------------------------------------------------------------------------
# reduced tensors


class DegenerateQuotient:
    """Zero-dimensional quotient: nothing to verify."""

    def __init__(self, datum):
        self.datum = datum
        self.report = VerificationReport("degenerate_quotient", degenerate=True)

    def __repr__(self):
        return "<DegenerateQuotient dim=0>"


def _reduced_eta(datum, eta, name="eta"):
    def ev(x):
        fr = datum.frame(x)
        return fr.dsigma.T @ eta(fr.p)

    return KForm(datum.quotient, 1, ev, jet=False, name=name + "^z")


def _reduced_two_form(datum, om, name="omega"):
    def ev(x):
        fr = datum.frame(x)
        return fr.dsigma.T @ om(fr.p) @ fr.dsigma

    return KForm(datum.quotient, 2, ev, jet=False, name=name + "^z")


def _reduced_metric(datum):
    def ev(x):
        fr = datum.frame(x)
        L = fr.horizontal_lift
        return L.T @ fr.g @ L

    return MetricField(datum.quotient, ev, jet=False, name="g^z")


def _reduced_endo(datum, phi, name="phi"):
    def ev(x):
        fr = datum.frame(x)
        return fr.push_matrix(phi(fr.p) @ fr.horizontal_lift)

    return EndoField(datum.quotient, ev, jet=False, name=name + "^z")


def _reduced_vector(datum, X, name="xi"):
    def ev(x):
        fr = datum.frame(x)
        return fr.push_matrix(X(fr.p).reshape(-1, 1)).ravel()

    return VectorField(datum.quotient, ev, jet=False, name=name + "^z")


def _reduced_reeb(datum, red: AlmostCosymplectic):
    return VectorField(datum.quotient, lambda x: reeb_vector(red, x), jet=False, name="xi^z")


def _prepare(datum, certify_samples, seed):
    if datum.degenerate:
        certify(datum, seed=seed)
        return None
    return certify(datum, samples=certify_samples, seed=seed)


def cosymplectic_reduce(datum: ReductionDatum, certify_samples=20, seed=0):
    """``eta^z = sigma* eta``, ``omega^z = sigma* omega`` on the quotient chart."""
    s = datum.structure
    if _prepare(datum, certify_samples, seed) is None:
        return DegenerateQuotient(datum)
    if isinstance(s, (AlmostContactMetric, AlmostCosymplectic)):
        eta, om = s.eta, s.omega
    else:
        raise TypeError("cosymplectic_reduce needs an (almost) cosymplectic structure")
    return AlmostCosymplectic(datum.quotient, _reduced_eta(datum, eta), _reduced_two_form(datum, om))


def _check_phi_invariance(datum, phis, samples, seed):
    tol = max(datum.tolerances.jet, 1e-8)
    for x in sample_points(datum.quotient, samples, seed):
        fr = datum.frame(x)
        for phi in phis:
            PH = phi(fr.p) @ fr.H
            res = float(np.max(np.abs(PH - fr.P_H @ PH)))
            if res > 1e3 * tol:
                raise StructureError(f"H is not phi-invariant at {fr.p.tolist()} (residual {res:.3e})")


def cokahler_reduce(datum: ReductionDatum, certify_samples=20, seed=0):
    s = datum.structure
    if not isinstance(s, AlmostContactMetric):
        raise TypeError("cokahler_reduce needs an almost contact metric structure")
    if _prepare(datum, certify_samples, seed) is None:
        return DegenerateQuotient(datum)
    _check_phi_invariance(datum, [s.phi], certify_samples, seed)
    red = AlmostCosymplectic(datum.quotient, _reduced_eta(datum, s.eta), _reduced_two_form(datum, s.omega))
    return AlmostContactMetric(
        datum.quotient, _reduced_metric(datum), _reduced_endo(datum, s.phi), _reduced_reeb(datum, red), red.eta
    )


def kahler_reduce(datum: ReductionDatum, certify_samples=20, seed=0):
    s = datum.structure
    if not isinstance(s, KahlerStructure):
        raise TypeError("kahler_reduce needs a Kähler structure")
    if _prepare(datum, certify_samples, seed) is None:
        return DegenerateQuotient(datum)
    _check_phi_invariance(datum, [s.J], certify_samples, seed)
    return KahlerStructure(datum.quotient, _reduced_metric(datum), _reduced_endo(datum, s.J, "J"))


def hyperkahler_reduce(datum: ReductionDatum, certify_samples=20, seed=0):
    s = datum.structure
    if not isinstance(s, HyperKahlerStructure):
        raise TypeError("hyperkahler_reduce needs a hyperKähler structure")
    if _prepare(datum, certify_samples, seed) is None:
        return DegenerateQuotient(datum)
    _check_phi_invariance(datum, list(s.Js), certify_samples, seed)
    Js = tuple(_reduced_endo(datum, J, f"J{a + 1}") for a, J in enumerate(s.Js))
    return HyperKahlerStructure(datum.quotient, _reduced_metric(datum), Js)


def three_cosymplectic_reduce(datum: ReductionDatum, certify_samples=20, seed=0, metric_samples=20):
    """Reduce each triple on the common slice and cross-check the metrics.

    Each triple's metric is rebuilt from its own reduced cosymplectic data,
    ``g_a = -omega_a^z phi_a^z + eta_a^z (x) eta_a^z``, and compared with the
    horizontal metric; disagreement raises :class:`ReducedMetricMismatch`.
    """
    s = datum.structure
    if not isinstance(s, ThreeCosymplectic):
        raise TypeError("three_cosymplectic_reduce needs a 3-cosymplectic structure")
    if _prepare(datum, certify_samples, seed) is None:
        return DegenerateQuotient(datum)
    _check_phi_invariance(datum, [t[0] for t in s.triples], certify_samples, seed)
    g = _reduced_metric(datum)
    triples = []
    for a, (phi, xi, eta) in enumerate(s.triples, 1):
        red = AlmostCosymplectic(datum.quotient, _reduced_eta(datum, eta, f"eta{a}"), _reduced_two_form(datum, s.omega(a - 1)))
        triples.append((_reduced_endo(datum, phi, f"phi{a}"), _reduced_reeb(datum, red), red.eta))
    out = ThreeCosymplectic(datum.quotient, g, tuple(triples))
    out.metric_agreement = triple_metric_agreement(datum, out, samples=metric_samples, seed=seed)
    if not out.metric_agreement.passed:
        raise ReducedMetricMismatch(f"reduced metrics disagree: {out.metric_agreement.failures()}")
    return out


def triple_metric(datum, a: int):
    """Metric of triple a rebuilt from omega_a^z, phi_a^z and eta_a^z."""
    s = datum.structure
    om = _reduced_two_form(datum, s.omega(a))
    phi = _reduced_endo(datum, s.triples[a][0])
    eta = _reduced_eta(datum, s.triples[a][2])

    def ev(x):
        e = eta(x)
        return -om(x) @ phi(x) + np.outer(e, e)

    return MetricField(datum.quotient, ev, jet=False, name=f"g{a + 1}^z")


def triple_metric_agreement(datum, reduced: ThreeCosymplectic, samples=20, seed=0) -> VerificationReport:
    report = VerificationReport("triple_metric_agreement")
    metrics = [triple_metric(datum, a) for a in range(3)]
    accs = {
        (a, b): ResidualAccumulator(f"g{a + 1}_vs_g{b + 1}", 1e-8) for a, b in ((0, 1), (1, 2), (0, 2))
    }
    hor = ResidualAccumulator("g1_vs_horizontal", 1e-8)
    for x in sample_points(datum.quotient, samples, seed):
        vals = [m(x) for m in metrics]
        for (a, b), acc in accs.items():
            acc.add(np.max(np.abs(vals[a] - vals[b])), x)
        hor.add(np.max(np.abs(vals[0] - reduced.g(x))), x)
    for acc in (*accs.values(), hor):
        report.add(acc.result())
    return report


def reduce(datum: ReductionDatum, **kw):
    """Dispatch on the ambient structure type."""
    s = datum.structure
    if isinstance(s, ThreeCosymplectic):
        return three_cosymplectic_reduce(datum, **kw)
    if isinstance(s, AlmostContactMetric):
        return cokahler_reduce(datum, **kw)
    if isinstance(s, HyperKahlerStructure):
        return hyperkahler_reduce(datum, **kw)
    if isinstance(s, KahlerStructure):
        return kahler_reduce(datum, **kw)
    return cosymplectic_reduce(datum, **kw)


# ---------------------------------------------------------------------------
# decomposition and invariance checks


@dataclass
class TangentDecomposition:
    point: np.ndarray
    orbit: np.ndarray
    phi_orbits: list
    horizontal: np.ndarray
    residuals: dict

    @property
    def dims(self):
        return (self.horizontal.shape[1], self.orbit.shape[1], *[b.shape[1] for b in self.phi_orbits])


def _phis(s):
    if isinstance(s, ThreeCosymplectic):
        return [t[0] for t in s.triples], [t[1] for t in s.triples]
    if isinstance(s, AlmostContactMetric):
        return [s.phi], [s.xi]
    if isinstance(s, HyperKahlerStructure):
        return list(s.Js), []
    if isinstance(s, KahlerStructure):
        return [s.J], []
    raise ReductionError("tangent decomposition needs a metric structure")


def tangent_decomposition(datum: ReductionDatum, x) -> TangentDecomposition:
    """``T_p M = H_p + g_p + phi(g_p)`` at ``p = sigma(x)`` with residuals."""
    if datum.degenerate:
        raise ReductionError("zero-dimensional quotient has no slice points")
    phis, xis = _phis(datum.structure)
    fr = datum.frame(x)
    g, H, V = fr.g, fr.H, fr.V
    pV = [phi(fr.p) @ V for phi in phis]

    def gdot(A, B):
        return float(np.max(np.abs(A.T @ g @ B), initial=0.0))

    res = {
        "orthogonal_H_orbit": gdot(H, V),
        "orthogonal_H_phi_orbit": max((gdot(H, B) for B in pV), default=0.0),
        "orthogonal_orbit_phi_orbit": max((gdot(V, B) for B in pV), default=0.0),
        "xi_in_H": max((float(np.max(np.abs(xi(fr.p) - fr.P_H @ xi(fr.p)))) for xi in xis), default=0.0),
        "phi_invariance_H": max(
            (float(np.max(np.abs(phi(fr.p) @ H - fr.P_H @ phi(fr.p) @ H), initial=0.0)) for phi in phis), default=0.0
        ),
    }
    allb = np.hstack([H, V, *pV])
    s = np.linalg.svd(allb, compute_uv=False)
    res["spanning_rank"] = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    res["ambient_dim"] = fr.p.shape[0]
    return TangentDecomposition(fr.p, V, pV, H, res)


def decomposition_check(datum: ReductionDatum, samples=50, seed=0, points=None, tol=1e-8) -> VerificationReport:
    report = VerificationReport("horizontal_decomposition")
    if datum.degenerate:
        report.degenerate = True
        return report
    keys = ["orthogonal_H_orbit", "orthogonal_H_phi_orbit", "orthogonal_orbit_phi_orbit", "xi_in_H", "phi_invariance_H"]
    accs = {k: ResidualAccumulator(k, tol) for k in keys}
    span = ResidualAccumulator("spanning_defect", 0.5)
    for x in sample_points(datum.quotient, samples, seed, points):
        td = tangent_decomposition(datum, x)
        for k in keys:
            accs[k].add(td.residuals[k], x)
        span.add(td.residuals["ambient_dim"] - td.residuals["spanning_rank"], x)
    for acc in (*accs.values(), span):
        report.add(acc.result())
    return report


def transport_check(datum: ReductionDatum, samples=30, seed=0, elements=3, tol=1e-7) -> VerificationReport:
    """Transport H by the action's Jacobian; it must stay g-orthogonal to the orbit."""
    report = VerificationReport("horizontal_invariance")
    if datum.degenerate:
        report.degenerate = True
        return report
    acc = ResidualAccumulator("transport_orthogonality", tol)
    lvl = ResidualAccumulator("transport_level_set", tol)
    group = datum.action.group
    rng = np.random.default_rng(seed + 7)
    gfield = datum.metric
    for x in sample_points(datum.quotient, samples, seed):
        fr = datum.frame(x)
        for _ in range(elements):
            c = rng.uniform(-0.5, 0.5, datum.orbit_basis.shape[0]) @ datum.orbit_basis
            g = group.exp(c)
            y, J = datum.action.point_jacobian(g, fr.p)
            Vy = fundamental_matrix(datum.action, y) @ datum.orbit_basis.T
            acc.add(np.max(np.abs(Vy.T @ gfield(y) @ (J @ fr.H)), initial=0.0), x)
            dmu_y = np.vstack([m.differential(y) for m in datum.maps])
            lvl.add(np.max(np.abs(dmu_y @ (J @ fr.H)), initial=0.0), x)
    report.add(acc.result())
    report.add(lvl.result())
    return report


def reeb_pushforward_check(datum: ReductionDatum, reduced, samples=50, seed=0, tol=1e-8) -> VerificationReport:
    """``xi_{sigma(x)} - dsigma(xi^z_x)`` lies in the orbit span."""
    report = VerificationReport("reeb_pushforward")
    if datum.degenerate:
        report.degenerate = True
        return report
    s = datum.structure
    pairs = []
    if isinstance(s, ThreeCosymplectic):
        pairs = [(s.triple(a).cosymplectic(), reduced.triples[a][1], f"xi{a + 1}") for a in range(3)]
    else:
        amb = s.cosymplectic() if isinstance(s, AlmostContactMetric) else s
        red = reduced.cosymplectic() if isinstance(reduced, AlmostContactMetric) else reduced
        pairs = [(amb, VectorField(red.chart, lambda x, r=red: reeb_vector(r, x), jet=False), "xi")]
    for amb, xi_red, tag in pairs:
        acc = ResidualAccumulator(f"{tag}_pushforward", tol)
        for x in sample_points(datum.quotient, samples, seed):
            fr = datum.frame(x)
            r = reeb_vector(amb, fr.p) - fr.dsigma @ xi_red(x)
            if fr.V.shape[1]:
                c, *_ = np.linalg.lstsq(fr.V, r, rcond=None)
                r = r - fr.V @ c
            acc.add(np.max(np.abs(r)), x)
        report.add(acc.result())
    return report


def moment_tangency_check(datum: ReductionDatum, samples=50, seed=0, tol=1e-9) -> VerificationReport:
    """Each xi_a is tangent to the joint level set: d mu_b(xi_a) = 0 for all a, b."""
    report = VerificationReport("joint_level_tangency")
    s = datum.structure
    if datum.degenerate:
        report.degenerate = True
        return report
    accs = {(a, b): ResidualAccumulator(f"dmu{b + 1}_xi{a + 1}", tol) for a in range(3) for b in range(3)}
    for x in sample_points(datum.quotient, samples, seed):
        p = datum.slice(x)
        dm = [m.differential(p) for m in datum.maps]
        for (a, b), acc in accs.items():
            acc.add(np.max(np.abs(dm[b] @ s.triples[a][1](p)), initial=0.0), x)
    for acc in accs.values():
        report.add(acc.result())
    return report


def section_independence(datum: ReductionDatum, other_slice: SmoothMap, reduced, samples=30, seed=0, tol=1e-6):
    """Reduce through a second slice of the same quotient chart and compare."""
    other = ReductionDatum(
        datum.structure, datum.action, datum.moment, datum.zeta, other_slice, datum.tolerances, datum.orbit_basis
    )
    red2 = reduce(other)
    report = VerificationReport("section_independence")
    for name, fa, fb in _tensor_pairs(reduced, red2):
        acc = ResidualAccumulator(name, tol)
        for x in sample_points(datum.quotient, samples, seed):
            acc.add(np.max(np.abs(fa(x) - fb(x)), initial=0.0), x)
        report.add(acc.result())
    return report


def _tensor_pairs(a, b):
    if isinstance(a, ThreeCosymplectic):
        out = [("g", a.g, b.g)]
        for i in range(3):
            out += [(f"{n}{i + 1}", ta, tb) for n, ta, tb in zip(("phi", "xi", "eta"), a.triples[i], b.triples[i])]
        return out
    if isinstance(a, AlmostContactMetric):
        return [("g", a.g, b.g), ("phi", a.phi, b.phi), ("xi", a.xi, b.xi), ("eta", a.eta, b.eta)]
    if isinstance(a, AlmostCosymplectic):
        return [("eta", a.eta, b.eta), ("omega", a.omega, b.omega)]
    if isinstance(a, HyperKahlerStructure):
        return [("h", a.h, b.h)] + [(f"J{i + 1}", a.Js[i], b.Js[i]) for i in range(3)]
    if isinstance(a, KahlerStructure):
        return [("h", a.h, b.h), ("J", a.J, b.J)]
    raise TypeError(type(a).__name__)


def isotropy_orbit_basis(group, zeta):
    """Orbit basis for reduction at a non-central value (the isotropy algebra)."""
    return isotropy_basis(group, zeta)


def sampled_grid(structure, points) -> dict:
    """Tensor components of a reduced bundle at the given points, for export."""
    pts = np.atleast_2d(points)
    names = _tensor_pairs(structure, structure)
    return {
        "points": pts.tolist(),
        "tensors": {name: [f(x).tolist() for x in pts] for name, f, _ in names},
    }

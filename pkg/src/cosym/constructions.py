"""Cone constructions, the mapping torus atlas and the commutation tests.

Cone coordinates are appended after the base coordinates: ``t`` for the
single cone, ``(t1, t2, t3)`` for the 3-cone.  Lifted reduction data use the
product slice ``(x, t) -> (sigma(x), t)`` and the moment map ``mu o pr``, so
the quotient fiber coordinate needs no renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .actions import GroupAction, MomentMapData, TripleMomentMap
from .geometry import (
    Chart,
    EndoField,
    KForm,
    MetricField,
    SmoothMap,
    VectorField,
    as_array,
)
from .report import ResidualAccumulator, VerificationReport, compare_tensors
from .structures import (
    AlmostContactMetric,
    HyperKahlerStructure,
    KahlerStructure,
    ThreeCosymplectic,
    sample_points,
)

FIBER_BLOCKS = (
    np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float),
    np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=float),
    np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=float),
)


class AtlasError(ValueError):
    pass


class MomentLiftError(ValueError):
    pass


def cone_chart(base: Chart, fiber_dim: int = 1, bound: float = 2.0, names=None) -> Chart:
    if fiber_dim not in (1, 3):
        raise ValueError("cone fibers are R or R^3")
    names = names or (("t",) if fiber_dim == 1 else ("t1", "t2", "t3"))
    fiber = Chart.box("R" if fiber_dim == 1 else "R3", [(n, -bound, bound) for n in names])
    return base.product(fiber, name=f"C{'' if fiber_dim == 1 else '3'}({base.name})")


def _blockdiag(A, B, x):
    A = as_array(A, x)
    B = as_array(B, x)
    n, m = A.shape[0], B.shape[0]
    out = np.zeros((n + m, n + m), dtype=A.dtype if A.dtype == object else B.dtype)
    out[:n, :n] = A
    out[n:, n:] = B
    return out


def _unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def _fiber_evaluator(f, n):
    """Evaluate a base field at the first n coordinates."""
    return lambda x: f.evaluator(x[:n])


def cone_cokahler(k: KahlerStructure, chart: Chart | None = None) -> AlmostContactMetric:
    """``g = h + dt^2``, ``phi = J (+) 0``, ``xi = d/dt``, ``eta = dt``."""
    chart = chart or cone_chart(k.chart)
    n = k.chart.dim
    h, J = _fiber_evaluator(k.h, n), _fiber_evaluator(k.J, n)
    jet = k.h.jet and k.J.jet
    e = _unit(n + 1, n)
    return AlmostContactMetric(
        chart,
        MetricField(chart, lambda x: _blockdiag(h(x), np.eye(1), x), jet=jet, name="g"),
        EndoField(chart, lambda x: _blockdiag(J(x), np.zeros((1, 1)), x), jet=jet, name="phi"),
        VectorField(chart, lambda x: e, name="xi"),
        KForm(chart, 1, lambda x: e, name="eta"),
    )


def _contact_to_complex(phi, xi, eta, x):
    """``J(X, f d/dt) = (phi X - f xi, eta(X) d/dt)``."""
    P = as_array(phi, x)
    n = P.shape[0]
    out = np.zeros((n + 1, n + 1), dtype=P.dtype)
    out[:n, :n] = P
    out[:n, n] = -as_array(xi, x)
    out[n, :n] = as_array(eta, x)
    return out


def cone_kahler(c: AlmostContactMetric, chart: Chart | None = None) -> KahlerStructure:
    """``h = g + dt^2``, ``J(X, f d/dt) = (phi X - f xi, eta(X) d/dt)``."""
    chart = chart or cone_chart(c.chart)
    n = c.chart.dim
    g, phi, xi, eta = (_fiber_evaluator(f, n) for f in (c.g, c.phi, c.xi, c.eta))
    jet = all(f.jet for f in (c.g, c.phi, c.xi, c.eta))
    return KahlerStructure(
        chart,
        MetricField(chart, lambda x: _blockdiag(g(x), np.eye(1), x), jet=jet, name="h"),
        EndoField(chart, lambda x: _contact_to_complex(phi(x), xi(x), eta(x), x), jet=jet, name="J"),
    )


def cone3_3cosymplectic(hk: HyperKahlerStructure, chart: Chart | None = None, flip_fiber: int | None = None) -> ThreeCosymplectic:
    """``g = h + |dt|^2``, ``phi_a = J_a (+) F_a``, ``xi_a = d/dt_a``, ``eta_a = dt_a``.

    ``flip_fiber`` negates one fiber block (a deliberately broken variant).
    """
    chart = chart or cone_chart(hk.chart, 3)
    n = hk.chart.dim
    h = _fiber_evaluator(hk.h, n)
    jet = hk.h.jet and all(J.jet for J in hk.Js)
    triples = []
    for a, Jf in enumerate(hk.Js):
        J = _fiber_evaluator(Jf, n)
        block = -FIBER_BLOCKS[a] if flip_fiber == a else FIBER_BLOCKS[a]
        e = _unit(n + 3, n + a)
        triples.append(
            (
                EndoField(chart, lambda x, J=J, B=block: _blockdiag(J(x), B, x), jet=jet, name=f"phi{a + 1}"),
                VectorField(chart, lambda x, e=e: e, name=f"xi{a + 1}"),
                KForm(chart, 1, lambda x, e=e: e, name=f"eta{a + 1}"),
            )
        )
    g = MetricField(chart, lambda x: _blockdiag(h(x), np.eye(3), x), jet=hk.h.jet, name="g")
    return ThreeCosymplectic(chart, g, tuple(triples))


def cone_hyperkahler(tc: ThreeCosymplectic, chart: Chart | None = None) -> HyperKahlerStructure:
    """``J_a(X, f d/dt) = (phi_a X - f xi_a, eta_a(X) d/dt)``, ``h = g + dt^2``."""
    chart = chart or cone_chart(tc.chart)
    n = tc.chart.dim
    g = _fiber_evaluator(tc.g, n)
    Js = []
    for a, (phi, xi, eta) in enumerate(tc.triples):
        P, X, E = (_fiber_evaluator(f, n) for f in (phi, xi, eta))
        jet = phi.jet and xi.jet and eta.jet
        Js.append(
            EndoField(chart, lambda x, P=P, X=X, E=E: _contact_to_complex(P(x), X(x), E(x), x), jet=jet, name=f"J{a + 1}")
        )
    return HyperKahlerStructure(chart, MetricField(chart, lambda x: _blockdiag(g(x), np.eye(1), x), jet=tc.g.jet, name="h"), tuple(Js))


def sequential_cone3_check(hk: HyperKahlerStructure, samples=50, seed=0, tol=1e-12) -> VerificationReport:
    """Build each triple by three single-fiber cones and compare with the direct 3-cone.

    For triple a the sequential coordinates ``(s1, s2, s3)`` are
    ``(t_{a+1}, t_{a+2}, t_a)`` (indices mod 3).
    """
    direct = cone3_3cosymplectic(hk)
    n = hk.chart.dim
    report = VerificationReport("sequential_cone3")
    pts = sample_points(direct.chart, samples, seed)
    for a in range(3):
        step = cone_cokahler(cone_kahler(cone_cokahler(hk.kahler(a))))
        order = [n + (a + 1) % 3, n + (a + 2) % 3, n + a]
        perm = list(range(n)) + order
        P = np.zeros((n + 3, n + 3))
        for i, j in enumerate(perm):
            P[j, i] = 1.0  # sequential coordinate i is direct coordinate j
        accs = {k: ResidualAccumulator(f"triple{a + 1}_{k}", tol) for k in ("g", "phi", "xi", "eta")}
        phi_d, xi_d, eta_d = direct.triples[a]
        for y in pts:
            s = P.T @ y
            accs["g"].add(np.max(np.abs(P @ step.g(s) @ P.T - direct.g(y))), y)
            accs["phi"].add(np.max(np.abs(P @ step.phi(s) @ P.T - phi_d(y))), y)
            accs["xi"].add(np.max(np.abs(P @ step.xi(s) - xi_d(y))), y)
            accs["eta"].add(np.max(np.abs(step.eta(s) @ P.T - eta_d(y))), y)
        for acc in accs.values():
            report.add(acc.result())
    return report


# ---------------------------------------------------------------------------
# lifting reduction data to cones


def lift_action(action: GroupAction, chart: Chart) -> GroupAction:
    n = action.chart.dim

    def act(g, x):
        return list(action.act(g, x[:n])) + list(x[n:])

    return GroupAction(action.group, chart, act, action.jet_group, name=f"{action.name}x1")


def _lift_map(m: MomentMapData, action: GroupAction) -> MomentMapData:
    n = m.action.chart.dim
    return MomentMapData(action, lambda x, mu=m.mu: mu(x[:n]), jet=m.jet, name=m.name)


def lift_moment(moment, action: GroupAction):
    if moment is None:
        return None
    if isinstance(moment, TripleMomentMap):
        return TripleMomentMap(action, tuple(_lift_map(m, action) for m in moment.maps))
    return _lift_map(moment, action)


def lift_slice(sl: SmoothMap, chart: Chart, fiber_dim: int) -> SmoothMap:
    q = sl.source.dim
    source = cone_chart(sl.source, fiber_dim, names=chart.coord_names[-fiber_dim:])

    def ev(x):
        return list(as_array(sl.evaluator(x[:q]), x)) + list(x[q:])

    return SmoothMap(source, chart, ev, jet=sl.jet, name=f"{sl.name}x1")


def lift_datum(datum, cone_structure, fiber_dim: int):
    from .reduction import ReductionDatum

    chart = cone_structure.chart
    action = lift_action(datum.action, chart)
    sl = None if datum.slice is None else lift_slice(datum.slice, chart, fiber_dim)
    return ReductionDatum(
        cone_structure,
        action,
        lift_moment(datum.moment, action),
        datum.zeta,
        sl,
        datum.tolerances,
        datum.orbit_basis,
        name=f"C({datum.name})",
    )


# ---------------------------------------------------------------------------
# commutation of cones with reduction

DIRECTIONS = ("kahler->cokahler", "cokahler->kahler", "hyperkahler->3cosymplectic", "3cosymplectic->hyperkahler")


@dataclass
class CommutationReport:
    direction: str
    comparisons: list = field(default_factory=list)
    tolerance: float = 1e-6

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    @property
    def max_abs_deviation(self) -> float:
        return max((c.max_abs_deviation for c in self.comparisons), default=0.0)

    def to_dict(self):
        return {
            "direction": self.direction,
            "pass": self.passed,
            "max_abs_deviation": self.max_abs_deviation,
            "comparisons": [c.to_dict() for c in self.comparisons],
        }


def _tensors(s):
    from .reduction import _tensor_pairs

    return [(name, f) for name, f, _ in _tensor_pairs(s, s)]


def _compare_structures(a, b, path_a, path_b, grid, tol):
    out = []
    for (name, fa), (_, fb) in zip(_tensors(a), _tensors(b)):
        out.append(compare_tensors(path_a, path_b, name, grid, fa, fb, tol))
    return out


def commutation_cone_reduce(datum, direction: str, grid_size=100, seed=0, tol=1e-6) -> CommutationReport:
    """Reduce-then-cone against cone-then-reduce on a seeded grid of the cone quotient."""
    from . import reduction as red

    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    s = datum.structure
    plan = {
        "kahler->cokahler": (KahlerStructure, red.kahler_reduce, cone_cokahler, red.cokahler_reduce, 1),
        "cokahler->kahler": (AlmostContactMetric, red.cokahler_reduce, cone_kahler, red.kahler_reduce, 1),
        "hyperkahler->3cosymplectic": (
            HyperKahlerStructure,
            red.hyperkahler_reduce,
            cone3_3cosymplectic,
            red.three_cosymplectic_reduce,
            3,
        ),
        "3cosymplectic->hyperkahler": (
            ThreeCosymplectic,
            red.three_cosymplectic_reduce,
            cone_hyperkahler,
            red.hyperkahler_reduce,
            1,
        ),
    }[direction]
    kind, base_reduce, cone, cone_reduce, fiber = plan
    if not isinstance(s, kind):
        raise TypeError(f"direction {direction} needs a {kind.__name__} datum")
    report = CommutationReport(direction, tolerance=tol)
    reduced = base_reduce(datum)
    coned = cone(s)
    lifted = lift_datum(datum, coned, fiber)
    path_b = cone_reduce(lifted)
    if datum.degenerate:
        return report
    path_a = cone(reduced, chart=lifted.quotient)
    grid = sample_points(lifted.quotient, grid_size, seed)
    report.comparisons = _compare_structures(path_a, path_b, "reduce-then-cone", "cone-then-reduce", grid, tol)
    return report


# ---------------------------------------------------------------------------
# mapping torus


@dataclass
class MappingTorusAtlas:
    """Two charts ``S x (0, 1)`` and ``S x (-1/2, 1/2)`` of ``S_f``.

    A point ``(p, theta)`` of the second chart with ``theta < 0`` is the point
    ``(f(p), theta + 1)`` of the first; for ``theta > 0`` the coordinates agree.
    """

    base: Chart
    f: SmoothMap
    kahler: KahlerStructure
    samples: int = 50
    seed: int = 0
    tol: float = 1e-8
    isometry_points: np.ndarray | None = None

    def __post_init__(self):
        names = self.base.coord_names + ("theta",)
        self.charts = (
            Chart(f"{self.base.name}x(0,1)", self.base.dim + 1, self.base.lower + (0.0,), self.base.upper + (1.0,), names),
            Chart(f"{self.base.name}x(-1/2,1/2)", self.base.dim + 1, self.base.lower + (-0.5,), self.base.upper + (0.5,), names),
        )
        self.isometry = hermitian_isometry_check(
            self.f, self.kahler, self.samples, self.seed, self.tol, points=self.isometry_points
        )
        if not self.isometry.passed:
            raise AtlasError(f"f is not a Hermitian isometry: {self.isometry.failures()}")

    def transition(self, y) -> np.ndarray:
        """Second-chart coordinates -> first-chart coordinates (on the overlap)."""
        y = np.asarray(y, dtype=float)
        if y[-1] < 0:
            return np.append(self.f(y[:-1]), y[-1] + 1.0)
        return y.copy()

    def transition_jacobian(self, y):
        y = np.asarray(y, dtype=float)
        n = self.base.dim
        Jt = np.eye(n + 1)
        if y[-1] < 0:
            Jt[:n, :n] = self.f.jacobian(y[:-1])[1]
        return self.transition(y), Jt

    def structures(self):
        """Per-chart coKähler structures (cone over the fiber with eta = d theta)."""
        return tuple(cone_cokahler(self.kahler, chart=c) for c in self.charts)

    def overlap_points(self, count: int, seed: int = 0) -> np.ndarray:
        """Points of the second chart lying in the overlap, both sides of the seam."""
        pts = self.charts[1].sample(count, seed)
        theta = np.random.default_rng(seed + 1).uniform(0.05, 0.45, count)
        pts[:, -1] = np.where(np.arange(count) % 2 == 0, theta, -theta)
        keep = [y for y in pts if self.charts[0].contains(self.transition(y))]
        return np.array(keep)


def hermitian_isometry_check(f: SmoothMap, k: KahlerStructure, samples=50, seed=0, tol=1e-8, points=None) -> VerificationReport:
    """``f* h = h`` and ``df J = J df`` at sampled points."""
    report = VerificationReport("hermitian_isometry")
    iso = ResidualAccumulator("metric_pullback", tol)
    hol = ResidualAccumulator("complex_commutation", tol)
    for p in sample_points(f.source, samples, seed, points):
        y, D = f.jacobian(p)
        iso.add(np.max(np.abs(D.T @ k.h(y) @ D - k.h(p))), p)
        hol.add(np.max(np.abs(D @ k.J(p) - k.J(y) @ D)), p)
    report.add(iso.result())
    report.add(hol.result())
    return report


def mapping_torus_cokahler(atlas: MappingTorusAtlas, samples=50, seed=0, tol=1e-8):
    """Per-chart coKähler structures and their overlap consistency report."""
    s0, s1 = atlas.structures()
    report = VerificationReport("mapping_torus_overlap")
    accs = {k: ResidualAccumulator(f"overlap_{k}", tol) for k in ("g", "phi", "xi", "eta")}
    for y in atlas.overlap_points(samples, seed):
        z, T = atlas.transition_jacobian(y)
        accs["g"].add(np.max(np.abs(T.T @ s0.g(z) @ T - s1.g(y))), y)
        accs["phi"].add(np.max(np.abs(T @ s1.phi(y) - s0.phi(z) @ T)), y)
        accs["xi"].add(np.max(np.abs(T @ s1.xi(y) - s0.xi(z))), y)
        accs["eta"].add(np.max(np.abs(s0.eta(z) @ T - s1.eta(y))), y)
    for acc in accs.values():
        report.add(acc.result())
    return (s0, s1), report


@dataclass
class MomentLift:
    liftable: bool
    constant: np.ndarray
    report: VerificationReport
    lifts: tuple | None = None

    def to_dict(self):
        return {"liftable": self.liftable, "constant": self.constant.tolist(), "report": self.report.to_dict()}


def moment_lift_check(atlas: MappingTorusAtlas, mu: MomentMapData, samples=50, seed=0, tol=1e-9) -> MomentLift:
    """``mu o f - mu`` must be constant; the moment map lifts iff the constant is 0."""
    pts = sample_points(atlas.base, samples, seed)
    diffs = np.array([mu(atlas.f(p)) - mu(p) for p in pts])
    spread = float(np.max(np.max(diffs, axis=0) - np.min(diffs, axis=0), initial=0.0)) if diffs.size else 0.0
    report = VerificationReport("moment_lift")
    acc = ResidualAccumulator("difference_spread", tol)
    acc.add(spread, pts[0] if len(pts) else [])
    report.add(acc.result())
    if spread > tol:
        raise MomentLiftError(f"mu o f - mu is not constant (spread {spread:.3e}); f is not compatible with mu")
    const = diffs.mean(axis=0) if diffs.size else np.zeros(mu.action.group.dim)
    liftable = bool(np.max(np.abs(const), initial=0.0) <= tol)
    lifts = None
    if liftable:
        lifts = tuple(_lift_map(mu, lift_action(mu.action, c)) for c in atlas.charts)
    return MomentLift(liftable, const, report, lifts)


def reduced_map(datum, f: SmoothMap, projection: SmoothMap) -> SmoothMap:
    """``f^z = pi o f o sigma`` on the quotient chart."""
    return projection.compose(f.compose(datum.slice))


def commutation_torus_reduce(atlas: MappingTorusAtlas, datum, projection: SmoothMap, grid_size=100, seed=0, tol=1e-6, iso_tol=1e-8):
    """Reduce-then-torus against torus-then-reduce, chart by chart.

    Path A reduces S, pushes f through the slice and builds the mapping torus
    of the reduced Kähler manifold.  Path B lifts the datum to each chart of
    S_f (product slice, ``mu o pr``) and reduces there.  Also reports the
    Hermitian-isometry residual of ``f^z`` and the overlap consistency of the
    path-A atlas.
    """
    from .reduction import cokahler_reduce, kahler_reduce

    lift = moment_lift_check(atlas, datum.moment)
    if not lift.liftable:
        raise MomentLiftError("the moment map does not lift to the mapping torus")
    reduced = kahler_reduce(datum)
    f_red = reduced_map(datum, atlas.f, projection)
    f_red.source = f_red.target = reduced.chart
    inner = _inner_points(reduced.chart, f_red, grid_size, seed)
    atlas_red = MappingTorusAtlas(reduced.chart, f_red, reduced, grid_size, seed, iso_tol, isometry_points=inner)
    iso = atlas_red.isometry
    (a0, a1), overlap = mapping_torus_cokahler(atlas_red, samples=min(grid_size, 50), seed=seed, tol=iso_tol)
    comparisons = []
    for idx, (chart_amb, path_a) in enumerate(zip(atlas.structures(), (a0, a1))):
        lifted = lift_datum(datum, chart_amb, 1)
        lifted.slice.source = path_a.chart
        path_b = cokahler_reduce(lifted)
        grid = sample_points(path_a.chart, grid_size, seed + idx)
        comparisons += _compare_structures(path_a, path_b, f"reduce-then-torus[{idx}]", f"torus-then-reduce[{idx}]", grid, tol)
    report = CommutationReport("torus", comparisons, tol)
    return report, iso, overlap


def _inner_points(chart, f, count, seed):
    """Sampled points whose image under f stays in the chart."""
    pts = chart.sample(4 * count, seed)
    keep = [p for p in pts if chart.contains(f(p))]
    return np.array(keep[:count])

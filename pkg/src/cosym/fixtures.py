"""Constant-coefficient models, counterexamples and the builtin catalog.

Coordinates on Darboux charts are ordered ``(p1, q1, ..., pn, qn, t)`` and
the canonical 2-form is ``sum_i dq_i ^ dp_i``; with this orientation the
Hamiltonian field of ``q1`` is ``-d/dp1`` and the Reeb field of the
cosymplectization of ``H`` is ``dH/dp d/dq - dH/dq d/dp + d/dt``.  A complex
coordinate ``z = x + i y`` corresponds to ``(p, q) = (x, y)``, so the flat
coKähler model ``C^n x R`` with ``J d/dx = d/dy`` is the canonical chart.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from . import jet
from .geometry import Chart, EndoField, KForm, MetricField, VectorField, constant_field
from .structures import (
    AlmostContactMetric,
    AlmostCosymplectic,
    HyperKahlerStructure,
    KahlerStructure,
    ThreeCosymplectic,
)

if TYPE_CHECKING:
    from .actions import GroupAction, MomentMapData, TripleMomentMap
    from .geometry import SmoothMap

BOX = 2.0

# left multiplication by i, j, k on H = span(1, i, j, k)
QUAT_I = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
QUAT_J = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
QUAT_K = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float)
QUATERNION_UNITS = (QUAT_I, QUAT_J, QUAT_K)

# phi_a restricted to the R^3 fiber of the 3-cone: phi_1 sends d/dt2 -> d/dt3,
# d/dt3 -> -d/dt2, and cyclically
FIBER_BLOCKS = (
    np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float),
    np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=float),
    np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=float),
)

COMPLEX_J = np.array([[0.0, -1.0], [1.0, 0.0]])


def complex_structure(n: int) -> np.ndarray:
    return np.kron(np.eye(n), COMPLEX_J)


def darboux_chart(n: int, name: str | None = None, box: float = BOX, with_time: bool = True) -> Chart:
    axes = []
    for i in range(1, n + 1):
        axes += [(f"p{i}", -box, box), (f"q{i}", -box, box)]
    if with_time:
        axes.append(("t", -box, box))
    return Chart.box(name or (f"R{2 * n + 1}" if with_time else f"R{2 * n}"), axes)


def canonical_omega(n: int, with_time: bool = True) -> np.ndarray:
    m = 2 * n + (1 if with_time else 0)
    om = np.zeros((m, m))
    for i in range(n):
        om[2 * i + 1, 2 * i] = 1.0
        om[2 * i, 2 * i + 1] = -1.0
    return om


def dt_form(chart: Chart, index: int = -1) -> KForm:
    e = np.zeros(chart.dim)
    e[index] = 1.0
    return constant_field(KForm, chart, e, name="dt")


def canonical_cosymplectic(n: int = 2, scale: float = 1.0) -> AlmostCosymplectic:
    chart = darboux_chart(n)
    om = constant_field(KForm, chart, scale * canonical_omega(n), name="omega")
    return AlmostCosymplectic(chart, dt_form(chart), om)


def flat_cokahler(n: int = 1) -> AlmostContactMetric:
    """C^n x R with the flat metric, phi = J on C^n, xi = d/dt, eta = dt."""
    chart = darboux_chart(n, name=f"C{n}xR")
    m = 2 * n + 1
    phi = np.zeros((m, m))
    phi[: 2 * n, : 2 * n] = complex_structure(n)
    xi = np.zeros(m)
    xi[-1] = 1.0
    return AlmostContactMetric(
        chart,
        constant_field(MetricField, chart, np.eye(m), name="g"),
        constant_field(EndoField, chart, phi, name="phi"),
        constant_field(VectorField, chart, xi, name="xi"),
        dt_form(chart),
    )


def flat_kahler(n: int = 1) -> KahlerStructure:
    chart = darboux_chart(n, name=f"C{n}", with_time=False)
    return KahlerStructure(
        chart,
        constant_field(MetricField, chart, np.eye(2 * n), name="h"),
        constant_field(EndoField, chart, complex_structure(n), name="J"),
    )


def quaternion_chart(copies: int = 1, box: float = BOX) -> Chart:
    axes = []
    for c in range(1, copies + 1):
        axes += [(f"{s}{c}", -box, box) for s in ("a", "b", "c", "d")]
    return Chart.box(f"H{copies}", axes)


def flat_hyperkahler(copies: int = 1) -> HyperKahlerStructure:
    chart = quaternion_chart(copies)
    Js = tuple(
        constant_field(EndoField, chart, np.kron(np.eye(copies), U), name=f"J{a + 1}")
        for a, U in enumerate(QUATERNION_UNITS)
    )
    return HyperKahlerStructure(chart, constant_field(MetricField, chart, np.eye(4 * copies), name="h"), Js)


def flat_3cosymplectic(swap_in_triple: int | None = None) -> ThreeCosymplectic:
    """H x R^3 with phi_a = L_a + fiber block, xi_a = d/dt_a, eta_a = dt_a.

    ``swap_in_triple`` exchanges the quaternion units of the other two
    indices inside that one triple (a deliberately broken model).
    """
    chart = quaternion_chart(1).product(
        Chart.box("R3", [(f"t{a}", -BOX, BOX) for a in (1, 2, 3)]), name="HxR3"
    )
    units = list(QUATERNION_UNITS)
    triples = []
    for a in range(3):
        U = units[a]
        if swap_in_triple is not None and a == swap_in_triple:
            U = units[(a + 1) % 3]
        phi = np.zeros((7, 7))
        phi[:4, :4] = U
        phi[4:, 4:] = FIBER_BLOCKS[a]
        e = np.zeros(7)
        e[4 + a] = 1.0
        triples.append(
            (
                constant_field(EndoField, chart, phi, name=f"phi{a + 1}"),
                constant_field(VectorField, chart, e, name=f"xi{a + 1}"),
                constant_field(KForm, chart, e, name=f"eta{a + 1}"),
            )
        )
    return ThreeCosymplectic(chart, constant_field(MetricField, chart, np.eye(7), name="g"), tuple(triples))


# ---------------------------------------------------------------------------
# counterexamples


def contact_r3() -> AlmostCosymplectic:
    """eta = dt - p dq, omega = d(eta): almost cosymplectic, not cosymplectic."""
    chart = darboux_chart(1, name="contactR3")
    eta = KForm(chart, 1, lambda x: [0.0, -x[0], 1.0], name="eta")
    om = constant_field(KForm, chart, [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]], name="omega")
    return AlmostCosymplectic(chart, eta, om)


def sasakian_r3() -> AlmostContactMetric:
    """Standard Sasakian R^3: eta = (dz - y dx)/2, xi = 2 d/dz."""
    chart = Chart.box("sasakianR3", [("x", -BOX, BOX), ("y", -BOX, BOX), ("z", -BOX, BOX)])

    def eta(x):
        return [-0.5 * x[1], 0.0, 0.5]

    def g(x):
        e = np.array(eta(x), dtype=object)
        return np.diag([0.25, 0.25, 0.0]).astype(object) + np.outer(e, e)

    def phi(x):
        return [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, x[1], 0.0]]

    return AlmostContactMetric(
        chart,
        MetricField(chart, g, name="g"),
        EndoField(chart, phi, name="phi"),
        constant_field(VectorField, chart, [0.0, 0.0, 2.0], name="xi"),
        KForm(chart, 1, eta, name="eta"),
    )


def tilted_cokahler(rate: float = 0.7) -> AlmostContactMetric:
    """Flat model conjugated by a rotation of the (y, t) plane through ``rate * x``.

    Pointwise an almost contact metric structure with flat metric, but phi is
    not parallel and eta is not closed.
    """
    flat = flat_cokahler(1)
    chart = flat.chart
    P0 = np.array(flat.phi(np.zeros(3)), dtype=object)

    def rot(x):
        c, s = jet.cos(rate * x[0]), jet.sin(rate * x[0])
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]], dtype=object)

    def phi(x):
        R = rot(x)
        return R @ P0 @ R.T

    def xi(x):
        return rot(x)[:, 2]

    return AlmostContactMetric(
        chart,
        flat.g,
        EndoField(chart, phi, name="phi"),
        VectorField(chart, xi, name="xi"),
        KForm(chart, 1, xi, name="eta"),
    )


def twisted_kahler(rate: float = 0.8) -> KahlerStructure:
    """Flat R^4 with J = cos(rate x) J1 + sin(rate x) J2: almost Hermitian, not Kähler."""
    chart = quaternion_chart(1)
    h = constant_field(MetricField, chart, np.eye(4), name="h")

    def J(x):
        c, s = jet.cos(rate * x[0]), jet.sin(rate * x[0])
        return QUAT_I.astype(object) * c + QUAT_J.astype(object) * s

    return KahlerStructure(chart, h, EndoField(chart, J, name="J"))


# ---------------------------------------------------------------------------
# actions and moment maps


def _rotate_pairs(g, x, pairs):
    """Apply the 2x2 matrix g to each coordinate pair (x[i], x[j])."""
    out = list(x)
    for i, j in pairs:
        out[i] = g[0, 0] * x[i] + g[0, 1] * x[j]
        out[j] = g[1, 0] * x[i] + g[1, 1] * x[j]
    return out


def circle_diagonal(chart: Chart, pairs) -> "GroupAction":
    """U(1) rotating every complex coordinate (x_i, y_i) at unit speed."""
    from .actions import GroupAction, circle_group

    return GroupAction(circle_group(), chart, lambda g, x: _rotate_pairs(g, x, pairs), name="S1-diagonal")


def oscillator_moment(action, pairs) -> "MomentMapData":
    """mu = (|z_1|^2 + ... + |z_n|^2) / 2."""
    from .actions import MomentMapData

    def mu(x):
        return [sum(0.5 * (x[i] * x[i] + x[j] * x[j]) for i, j in pairs)]

    return MomentMapData(action, mu, name="mu")


def coordinate_shift(chart: Chart, index: int, name: str = "") -> "GroupAction":
    """R acting by translation of one coordinate."""
    from .actions import GroupAction, translation_group

    def act(g, x):
        out = list(x)
        out[index] = x[index] + g[0, 1]
        return out

    return GroupAction(translation_group(1), chart, act, name=name or f"shift-{chart.coord_names[index]}")


def scaling_action(chart: Chart) -> "GroupAction":
    from .actions import GroupAction, MatrixLieGroup

    group = MatrixLieGroup([[[1.0]]], name="R+")
    return GroupAction(group, chart, lambda g, x: [g[0, 0] * v for v in x], name="scaling")


def trivial_action(chart: Chart) -> "GroupAction":
    from .actions import GroupAction, trivial_group

    return GroupAction(trivial_group(), chart, lambda g, x: x, name="trivial")


def coordinate_moment(action, index: int, sign: float = 1.0, offset: float = 0.0) -> "MomentMapData":
    from .actions import MomentMapData

    return MomentMapData(action, lambda x: [sign * x[index] + offset], name="mu")


def zero_moment(action) -> "MomentMapData":
    from .actions import MomentMapData

    k = action.group.dim
    return MomentMapData(action, lambda x: [0.0] * k, name="mu0")


def right_multiply_i(q):
    """q -> q i in the basis (1, i, j, k)."""
    return [-q[1], q[0], q[3], -q[2]]


def quaternion_circle(chart: Chart, blocks=(0,)) -> "GroupAction":
    """U(1) acting by q -> q e^{i theta} on the listed quaternion blocks."""
    from .actions import GroupAction, circle_group

    def act(g, x):
        out = list(x)
        for b in blocks:
            q = x[4 * b : 4 * b + 4]
            qi = right_multiply_i(q)
            for m in range(4):
                out[4 * b + m] = g[0, 0] * q[m] + g[1, 0] * qi[m]
        return out

    return GroupAction(circle_group(), chart, act, name="S1-right-i")


def quaternion_moments(action, blocks=(0,), offsets=(0.0, 0.0, 0.0)) -> "TripleMomentMap":
    """mu_a(q) = <L_a q, q i> / 2 summed over blocks, minus an optional offset."""
    from .actions import MomentMapData, TripleMomentMap

    def make(a):
        U = QUATERNION_UNITS[a]

        def mu(x):
            total = -offsets[a]
            for b in blocks:
                q = x[4 * b : 4 * b + 4]
                qi = right_multiply_i(q)
                Lq = [sum(U[r, c] * q[c] for c in range(4) if U[r, c]) for r in range(4)]
                total = total + 0.5 * sum(Lq[m] * qi[m] for m in range(4))
            return [total]

        return MomentMapData(action, mu, name=f"mu{a + 1}")

    return TripleMomentMap(action, tuple(make(a) for a in range(3)))


# ---------------------------------------------------------------------------
# reduction data

C2_PAIRS = ((0, 1), (2, 3))
SPHERE_CHART = (("theta", 0.2, 1.35), ("psi", -2.0, 2.0))


def s1_c2xr_slice(with_time: bool = True, level: float = 0.5):
    """(theta, psi[, t]) -> (r cos theta, 0, r sin theta e^{i psi}[, t]), r^2 = 2 level."""
    from .geometry import SmoothMap

    axes = list(SPHERE_CHART) + ([("t", -BOX, BOX)] if with_time else [])
    quotient = Chart.box("CP1xR" if with_time else "CP1", axes)
    r = float(np.sqrt(2.0 * level))
    target = darboux_chart(2, name="C2xR" if with_time else "C2", with_time=with_time)

    def sigma(x):
        th, ps = x[0], x[1]
        out = [r * jet.cos(th), 0.0, r * jet.sin(th) * jet.cos(ps), r * jet.sin(th) * jet.sin(ps)]
        return out + [x[2]] if with_time else out

    return SmoothMap(quotient, target, sigma, name="sigma")


def s1_c2xr_datum(level: float = 0.5):
    from .reduction import ReductionDatum

    s = flat_cokahler(2)
    act = circle_diagonal(s.chart, C2_PAIRS)
    sl = s1_c2xr_slice(True, level)
    sl.target = s.chart
    return ReductionDatum(s, act, oscillator_moment(act, C2_PAIRS), [level], sl, name="s1-c2xr")


def s1_c2_datum(level: float = 0.5):
    from .reduction import ReductionDatum

    k = flat_kahler(2)
    act = circle_diagonal(k.chart, C2_PAIRS)
    sl = s1_c2xr_slice(False, level)
    sl.target = k.chart
    return ReductionDatum(k, act, oscillator_moment(act, C2_PAIRS), [level], sl, name="s1-c2")


def fubini_study_metric(theta, with_time: bool = True):
    """Independent closed form: d theta^2 + sin^2(2 theta)/4 d psi^2 (+ dt^2)."""
    d = [1.0, 0.25 * np.sin(2.0 * theta) ** 2] + ([1.0] if with_time else [])
    return np.diag(d)


def s1_hxr3_datum():
    """S^1 acting by q -> q e^{i theta} on H x R^3 at zeta = (1/2, 0, 0)."""
    from .geometry import SmoothMap
    from .reduction import ReductionDatum

    s = flat_3cosymplectic()
    act = quaternion_circle(s.chart)
    quotient = Chart.box("R3", [(f"t{a}", -BOX, BOX) for a in (1, 2, 3)])
    sl = SmoothMap(quotient, s.chart, lambda x: [1.0, 0.0, 0.0, 0.0, x[0], x[1], x[2]], name="sigma")
    return ReductionDatum(s, act, quaternion_moments(act), [[0.5], [0.0], [0.0]], sl, name="s1-hxr3")


def c2_projection(level_chart: Chart | None = None):
    """z -> (atan2(|z2|, |z1|), arg(z2 conj(z1))), constant on S^1 orbits."""
    from .geometry import SmoothMap

    source = darboux_chart(2, name="C2", with_time=False)
    target = level_chart or Chart.box("CP1", list(SPHERE_CHART))

    def pi(z):
        x1, y1, x2, y2 = z[0], z[1], z[2], z[3]
        r1 = jet.sqrt(x1 * x1 + y1 * y1)
        r2 = jet.sqrt(x2 * x2 + y2 * y2)
        # z2 conj(z1) = (x2 x1 + y2 y1) + i (y2 x1 - x2 y1)
        return [jet.arctan2(r2, r1), jet.arctan2(y2 * x1 - x2 * y1, x2 * x1 + y2 * y1)]

    return SmoothMap(source, target, pi, name="pi")


def rotation_map(chart: Chart, angles) -> "SmoothMap":
    """(z_1, ..., z_n) -> (e^{i a_1} z_1, ..., e^{i a_n} z_n)."""
    from .geometry import SmoothMap

    c = [float(np.cos(a)) for a in angles]
    s = [float(np.sin(a)) for a in angles]

    def f(x):
        out = list(x)
        for m in range(len(angles)):
            i, j = 2 * m, 2 * m + 1
            out[i] = c[m] * x[i] - s[m] * x[j]
            out[j] = s[m] * x[i] + c[m] * x[j]
        return out

    return SmoothMap(chart, chart, f, name="rot")


def translation_map(chart: Chart, shift) -> "SmoothMap":
    from .geometry import SmoothMap

    shift = np.asarray(shift, dtype=float)
    return SmoothMap(chart, chart, lambda x: [x[i] + shift[i] for i in range(len(shift))], name="shift")


def shear_map(chart: Chart, rate: float = 0.5) -> "SmoothMap":
    from .geometry import SmoothMap

    return SmoothMap(chart, chart, lambda x: [x[0] + rate * x[1]] + list(x[1:]), name="shear")


def _qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]


def _qconj(q):
    return [q[0], -q[1], -q[2], -q[3]]


def eguchi_hanson_datum(level: float = 1.0, box: float = 0.4):
    """Diagonal right-i circle action on H^2 at zeta = (level/2, 0, 0).

    The slice is parametrized by q2; q1 solves q1 i conj(q1) = w with
    w = level i - q2 i conj(q2), via q1 = sqrt|w| (1 - u i)/|1 - u i|, u = w/|w|.
    """
    from .geometry import SmoothMap
    from .reduction import ReductionDatum

    hk = flat_hyperkahler(2)
    act = quaternion_circle(hk.chart, blocks=(0, 1))
    moments = quaternion_moments(act, blocks=(0, 1))
    quotient = Chart.box("EH", [(f"{s}2", -box, box) for s in ("a", "b", "c", "d")])
    unit_i = [0.0, 1.0, 0.0, 0.0]

    def sigma(x):
        q2 = list(x)
        m = _qmul(_qmul(q2, unit_i), _qconj(q2))
        w = [-m[0], level - m[1], -m[2], -m[3]]
        nw = jet.sqrt(w[1] * w[1] + w[2] * w[2] + w[3] * w[3] + w[0] * w[0])
        u = [c / nw for c in w]
        ui = _qmul(u, unit_i)
        r = [1.0 - ui[0], -ui[1], -ui[2], -ui[3]]
        nr = jet.sqrt(sum(c * c for c in r))
        scale = jet.sqrt(nw) / nr
        return [c * scale for c in r] + q2

    sl = SmoothMap(quotient, hk.chart, sigma, name="sigma")
    return ReductionDatum(hk, act, moments, [[0.5 * level], [0.0], [0.0]], sl, name="eguchi-hanson")


# -- catalog -------------------------------------------------------------------


def _rigid_body():
    from .dynamics import RigidBodyParams, rigid_body_datum

    return rigid_body_datum(RigidBodyParams(), (0.0, 0.0, 1.0))


def _oscillator():
    from .dynamics import harmonic_oscillator

    return harmonic_oscillator()


# name -> (kind, description, factory); kinds: structure, reduction, system
BUILTINS = {
    "flat-cosymplectic-r5": ("structure", "canonical cosymplectic R^5, omega = dq1^dp1 + dq2^dp2, eta = dt", lambda: canonical_cosymplectic(2)),
    "flat-cokahler-r3": ("structure", "flat coKähler C x R", lambda: flat_cokahler(1)),
    "flat-cokahler-r5": ("structure", "flat coKähler C^2 x R", lambda: flat_cokahler(2)),
    "flat-kahler-c2": ("structure", "flat Kähler C^2", lambda: flat_kahler(2)),
    "flat-hyperkahler-h1": ("structure", "flat hyperkähler H", lambda: flat_hyperkahler(1)),
    "flat-3cosymplectic-r7": ("structure", "flat 3-cosymplectic H x R^3", lambda: flat_3cosymplectic()),
    "contact-r3": ("structure", "contact form dt - p dq on R^3 (fails d eta = 0)", contact_r3),
    "sasakian-r3": ("structure", "Sasakian R^3 (not coKähler)", sasakian_r3),
    "tilted-cokahler": ("structure", "position-dependent Reeb tilt (not normal)", tilted_cokahler),
    "twisted-kahler": ("structure", "rotating complex structure (not Kähler)", twisted_kahler),
    "s1-c2xr": ("reduction", "diagonal S^1 on C^2 x R at zeta = 1/2 (reduces to CP^1 x R)", s1_c2xr_datum),
    "s1-c2": ("reduction", "diagonal S^1 on C^2 at zeta = 1/2 (Kähler quotient CP^1)", s1_c2_datum),
    "s1-hxr3": ("reduction", "S^1 on H x R^3, 3-cosymplectic moment maps", s1_hxr3_datum),
    "eguchi-hanson": ("reduction", "right-i circle on H^2 at zeta = (1/2,0,0)", eguchi_hanson_datum),
    "rigid-body": ("reduction", "left SO(3) on T*SO(3) x R at zeta = e3, M = (1,2,3)", _rigid_body),
    "harmonic-oscillator": ("system", "H = (p^2 + q^2)/2 on the Darboux plane", _oscillator),
}


def builtin(name: str):
    try:
        return BUILTINS[name][2]()
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; known: {', '.join(sorted(BUILTINS))}") from None


def catalog() -> list:
    return [{"name": k, "kind": v[0], "description": v[1]} for k, v in BUILTINS.items()]


TORUS_KINDS = ("identity", "rotation", "shifted")


def torus_fixture(kind: str = "rotation", angles=(0.3, 0.7), shift: float = 0.25):
    """``(atlas, moment, datum, projection)`` for a mapping-torus scenario.

    ``identity`` and ``rotation`` use the S^1 quotient of C^2 (rotations
    commute with the diagonal circle); ``shifted`` translates C along y while
    the x-shift has moment map -y, so mu o f - mu is a non-zero constant and
    the moment map does not lift.
    """
    from .constructions import MappingTorusAtlas

    if kind in ("identity", "rotation"):
        datum = s1_c2_datum()
        chart = datum.structure.chart
        f = rotation_map(chart, (0.0, 0.0) if kind == "identity" else angles)
        return MappingTorusAtlas(chart, f, datum.structure), datum.moment, datum, c2_projection()
    if kind == "shifted":
        k = flat_kahler(1)
        act = coordinate_shift(k.chart, 0)
        mu = coordinate_moment(act, 1, sign=-1.0)
        f = translation_map(k.chart, (0.0, shift))
        return MappingTorusAtlas(k.chart, f, k), mu, None, None
    raise KeyError(f"unknown torus fixture {kind!r}; expected one of {TORUS_KINDS}")

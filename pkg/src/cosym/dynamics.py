"""Time-dependent Hamiltonian systems as cosymplectic manifolds.

A symplectic base ``(B, omega)`` and a function ``H`` on ``B x R`` give
``eta = dt`` and ``omega_H = omega + dH ^ dt``.  The Reeb field of that pair is
the evolution field; it is integrated here with classic fixed-step RK4.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import jet as _jet
from .geometry import (
    Chart,
    KForm,
    ScalarField,
    VectorField,
    covariant_derivative_vector,
)
from .report import CheckResult, ResidualAccumulator, Tolerances, VerificationReport
from .structures import (
    AlmostContactMetric,
    AlmostCosymplectic,
    reeb_field,
    reeb_vector,
    sample_points,
    verify_cosymplectic,
)


class DegenerateSymplecticError(ArithmeticError):
    pass


TIME_AXIS = ("t", -1e3, 1e3)


@dataclass
class TimeDependentSystem:
    base: Chart
    omega: KForm
    H: ScalarField
    chart: Chart
    cosym: AlmostCosymplectic
    name: str = ""

    @property
    def evolution(self) -> VectorField:
        return reeb_field(self.cosym)

    def energy(self, p) -> float:
        return float(self.H(p))


def hamiltonian_two_form(omega: KForm, H: ScalarField) -> KForm:
    """``omega + dH ^ dt`` on ``base x R`` (t is the last coordinate)."""
    n = H.chart.dim
    m = omega.chart.dim

    def ev(x):
        out = np.zeros((n, n))
        out[:m, :m] = omega(x[:m])
        _, dH = H.derivatives(x)
        out[:, -1] += dH
        out[-1, :] -= dH
        out[-1, -1] = 0.0
        return out

    return KForm(H.chart, 2, ev, jet=False, name="omega_H")


def cosymplectize(base: Chart, omega: KForm, H: ScalarField, samples=20, seed=0, name="") -> TimeDependentSystem:
    """Build ``(base x R, dt, omega + dH ^ dt)``.

    ``H`` must live on ``base x R``; a base chart without a trailing ``t``
    coordinate is extended by :data:`TIME_AXIS` only when ``H`` is given on
    ``base`` (then it is treated as time independent).
    """
    if omega.chart != base or omega.degree != 2:
        raise ValueError("omega must be a 2-form on the base chart")
    if base.dim % 2:
        raise DegenerateSymplecticError(f"odd-dimensional base ({base.dim}) carries no symplectic form")
    if H.chart == base:
        chart = base.product(Chart.box("time", [TIME_AXIS]), name=f"{base.name}xR")
        h0 = H
        H = ScalarField(chart, lambda x: h0.evaluator(x[: base.dim]), jet=h0.jet, name=h0.name)
    elif H.chart.dim == base.dim + 1 and H.chart.lower[: base.dim] == base.lower and H.chart.upper[: base.dim] == base.upper:
        chart = H.chart
    else:
        raise ValueError("H must live on the base or on base x R")
    for p in sample_points(base, samples, seed):
        w = omega(p)
        s = np.linalg.svd(w, compute_uv=False)
        if s[-1] < 1e-10 * max(1.0, s[0]):
            raise DegenerateSymplecticError(f"omega is degenerate at {p.tolist()}")
    n = chart.dim
    eta_val = np.zeros(n)
    eta_val[-1] = 1.0
    eta = KForm(chart, 1, lambda x: eta_val, name="dt")
    cosym = AlmostCosymplectic(chart, eta, hamiltonian_two_form(omega, H))
    return TimeDependentSystem(base, omega, H, chart, cosym, name=name)


def canonical_base(n: int, box: float = 2.0, name: str = "R2n") -> tuple[Chart, KForm]:
    """Darboux base ``(p1, q1, ..., pn, qn)`` with ``omega = sum dq ^ dp``."""
    axes = []
    for i in range(1, n + 1):
        axes += [(f"p{i}", -box, box), (f"q{i}", -box, box)]
    chart = Chart.box(name, axes)
    w = np.zeros((2 * n, 2 * n))
    for i in range(n):
        w[2 * i + 1, 2 * i] = 1.0
        w[2 * i, 2 * i + 1] = -1.0
    return chart, KForm(chart, 2, lambda x: w, name="omega")


def harmonic_oscillator(scale: float = 1.0, omega_scale: float = 1.0, box: float = 2.0) -> TimeDependentSystem:
    """``H = scale * (p^2 + q^2) / 2`` on the Darboux plane."""
    base, om = canonical_base(1, box)
    if omega_scale != 1.0:
        w = omega_scale * om(np.zeros(2))
        om = KForm(base, 2, lambda x: w, name="omega")
    H = ScalarField(base, lambda x: 0.5 * scale * (x[0] * x[0] + x[1] * x[1]), name="H")
    return cosymplectize(base, om, H, name="harmonic-oscillator")


def free_system(n: int = 1, box: float = 2.0) -> TimeDependentSystem:
    base, om = canonical_base(n, box)
    return cosymplectize(base, om, ScalarField(base, lambda x: 0.0 * x[0], name="H"), name="free")


def evolution_equation_residual(system: TimeDependentSystem, samples=200, seed=0, points=None) -> CheckResult:
    """Max deviation of the Reeb field from ``(X_H, 1)`` where ``X_H`` solves
    ``iota_X omega = dH`` on the base at frozen t.

    In Darboux coordinates this is ``q' = dH/dp, p' = -dH/dq``; the solve is
    done on the base form directly, independently of the Reeb system.
    """
    acc = ResidualAccumulator("evolution_equations", 1e-9)
    m = system.base.dim
    for p in sample_points(system.chart, samples, seed, points):
        xi = reeb_vector(system.cosym, p)
        _, dH = system.H.derivatives(p)
        om = np.asarray(system.omega(p[:m]), dtype=float)
        expected = np.append(np.linalg.solve(om.T, dH[:m]), 1.0)
        acc.add(float(np.max(np.abs(xi - expected))), p)
    return acc.result()


# -- integration -------------------------------------------------------------


@dataclass
class FlowResult:
    times: np.ndarray
    states: np.ndarray
    coord_names: tuple
    logs: dict = field(default_factory=dict)
    truncated: bool = False
    step: float = 0.0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def max_log(self, name: str) -> float:
        return float(np.max(np.abs(self.logs[name]), initial=0.0))

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(self.logs)
        w.writerow(["time", *self.coord_names, *names])
        for k, t in enumerate(self.times):
            row = [t, *self.states[k], *(self.logs[n][k] for n in names)]
            w.writerow([format(float(v), ".17g") for v in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    def summary(self) -> dict:
        return {
            "steps": int(len(self.times) - 1),
            "step": self.step,
            "truncated": self.truncated,
            "final_time": float(self.times[-1]),
            "final_state": [float(v) for v in self.final],
            "max_abs": {n: self.max_log(n) for n in self.logs},
        }


def rk4(vector, start, T: float, h: float, chart: Chart | None = None, observables=None, names=None) -> FlowResult:
    """Fixed-step RK4 for ``x' = vector(x)`` over ``[0, T]``.

    The step is adjusted to ``T / round(T / h)`` so the run ends exactly at
    ``T``.  Leaving ``chart`` stops the run and sets ``truncated``.
    """
    if T < 0 or h <= 0:
        raise ValueError("need T >= 0 and h > 0")
    steps = max(1, int(round(T / h))) if T > 0 else 0
    step = T / steps if steps else 0.0
    x = np.asarray(start, dtype=float).copy()
    if chart is not None:
        chart.check(x)
    observables = observables or {}
    logs = {k: [float(f(x, 0.0))] for k, f in observables.items()}
    times = [0.0]
    states = [x.copy()]
    truncated = False
    for k in range(steps):
        try:
            k1 = vector(x)
            k2 = vector(x + 0.5 * step * k1)
            k3 = vector(x + 0.5 * step * k2)
            k4 = vector(x + step * k3)
        except Exception as exc:  # stage left the domain
            if chart is None or not _is_domain_error(exc):
                raise
            truncated = True
            break
        x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if chart is not None and not chart.contains(x):
            truncated = True
            break
        t = (k + 1) * step
        times.append(t)
        states.append(x.copy())
        for key, f in observables.items():
            logs[key].append(float(f(x, t)))
    names = tuple(names or (chart.coord_names if chart else (f"x{i}" for i in range(len(x)))))
    return FlowResult(
        np.asarray(times), np.asarray(states), names, {k: np.asarray(v) for k, v in logs.items()}, truncated, step
    )


def _is_domain_error(exc) -> bool:
    from .geometry import DomainError

    return isinstance(exc, (DomainError, ArithmeticError, ValueError))


def evolution_flow(system: TimeDependentSystem, start, T: float, h: float, observables=None, autonomous=None) -> FlowResult:
    """Integrate the evolution (Reeb) field from ``start``.

    Logs ``t_defect = t - t0 - s`` and the energy; ``H_drift`` is added when
    ``H`` does not depend on t (checked at the start point unless
    ``autonomous`` is given).  ``observables`` maps names to ``f(point)``.
    """
    start = np.asarray(start, dtype=float)
    t0 = start[-1]
    if autonomous is None:
        _, dH = system.H.derivatives(start)
        autonomous = abs(dH[-1]) < 1e-12
    H0 = system.energy(start)
    obs = {"t_defect": lambda x, s: x[-1] - t0 - s, "H": lambda x, s: system.energy(x)}
    if autonomous:
        obs["H_drift"] = lambda x, s: system.energy(x) - H0
    for key, f in (observables or {}).items():
        obs[key] = lambda x, s, _f=f: _f(x)
    return rk4(lambda x: reeb_vector(system.cosym, x), start, T, h, system.chart, obs)


def return_error(system: TimeDependentSystem, start, T: float, h: float) -> float:
    """Distance between the start and the flow after time ``T`` (t excluded)."""
    res = evolution_flow(system, start, T, h)
    if res.truncated:
        return float("inf")
    return float(np.max(np.abs(res.final[:-1] - np.asarray(start, dtype=float)[:-1])))


def convergence_study(system: TimeDependentSystem, start, T: float, steps=(32, 64, 128, 256)) -> dict:
    """Return errors and successive error ratios for the given step counts.

    Coarse step counts keep the error above rounding, so the ratios expose
    the integrator order.
    """
    errors = [return_error(system, start, T, T / n) for n in steps]
    ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    return {"steps": list(steps), "errors": errors, "ratios": ratios}


def geodesic_defect(acm: AlmostContactMetric, X: VectorField, samples=50, seed=0, points=None, tol=None) -> CheckResult:
    """``max |nabla_X X|`` (Euclidean norm of the components) over samples."""
    tol = tol if tol is not None else Tolerances().derivative(acm.g, X)
    acc = ResidualAccumulator("geodesic_defect", tol)
    for p in sample_points(acm.chart, samples, seed, points):
        C = covariant_derivative_vector(acm.g, X, p)
        acc.add(float(np.linalg.norm(X(p) @ C)), p)
    return acc.result()


def verify_system(system: TimeDependentSystem, samples=50, seed=0) -> VerificationReport:
    report = verify_cosymplectic(system.cosym, samples=samples, seed=seed)
    report.checks.append(evolution_equation_residual(system, samples, seed))
    return report


# -- rigid body ----------------------------------------------------------------
#
# T*SO(3) in body coordinates: a point is (a, alpha, t) with A = exp(hat(a))
# (exponential coordinates, |a| < pi) and alpha the body momentum.  The
# Liouville form is alpha . lam with lam = Jr(a) da the left Maurer-Cartan
# form.  Matching the Darboux convention omega = -d(p dq), the symplectic form
# is minus its exterior derivative; in the (a, alpha) blocks
#     [[-Jr^T hat(alpha) Jr, Jr^T], [-Jr, 0]].
# The sign is the one for which mu = A alpha generates the left action.


def _series_or(theta2, small, exact):
    v = theta2.value if isinstance(theta2, _jet.Jet) else float(theta2)
    return small(theta2) if v < 1e-8 else exact(theta2)


def so3_exp(a):
    """Rodrigues formula; works on jet vectors."""
    from .actions import hat

    A = hat(a)
    th2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
    c1 = _series_or(th2, lambda s: 1.0 - s / 6.0, lambda s: _jet.sin(_jet.sqrt(s)) / _jet.sqrt(s))
    c2 = _series_or(th2, lambda s: 0.5 - s / 24.0, lambda s: (1.0 - _jet.cos(_jet.sqrt(s))) / s)
    return np.eye(3) + c1 * A + c2 * (A @ A)


def so3_log(R):
    """Principal logarithm in exponential coordinates (rotation angle < pi)."""
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    v = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]], dtype=object)
    if float(_jet._val(tr)) > 3.0 - 1e-8:
        # theta / (2 sin theta) = 1/2 + sin^2(theta) / 12 + ..., sin^2 = |v|^2 / 4
        scale = 0.5 + (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 48.0
    else:
        theta = _jet.arccos((tr - 1.0) * 0.5)
        scale = theta / (2.0 * _jet.sin(theta))
    out = v * scale
    return out if any(isinstance(e, _jet.Jet) for e in out) else out.astype(float)


def right_jacobian(a):
    """``Jr(a)`` with ``exp(hat(a))^-1 d exp(hat(a)) = hat(Jr(a) da)``."""
    from .actions import hat

    A = hat(a)
    th2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
    c2 = _series_or(th2, lambda s: 0.5 - s / 24.0, lambda s: (1.0 - _jet.cos(_jet.sqrt(s))) / s)
    c3 = _series_or(
        th2,
        lambda s: 1.0 / 6.0 - s / 120.0,
        lambda s: (_jet.sqrt(s) - _jet.sin(_jet.sqrt(s))) / (s * _jet.sqrt(s)),
    )
    return np.eye(3) - c2 * A + c3 * (A @ A)


@dataclass(frozen=True)
class RigidBodyParams:
    M: tuple = (1.0, 2.0, 3.0)
    angle_box: float = 1.8
    momentum_box: float = 3.0

    def __post_init__(self):
        M = tuple(float(m) for m in self.M)
        if len(M) != 3 or not all(m > 0 for m in M):
            raise ValueError(f"inertia coefficients must be three positive numbers, got {self.M}")
        object.__setattr__(self, "M", M)

    def energy(self, alpha) -> float:
        return sum(alpha[i] * alpha[i] / self.M[i] for i in range(3))

    def gradient(self, alpha) -> np.ndarray:
        return np.array([2.0 * alpha[i] / self.M[i] for i in range(3)])


def rigid_body_base(params: RigidBodyParams) -> tuple[Chart, KForm]:
    from .actions import hat

    b, m = params.angle_box, params.momentum_box
    chart = Chart.box(
        "SO3xso3*", [("a1", -b, b), ("a2", -b, b), ("a3", -b, b), ("alpha1", -m, m), ("alpha2", -m, m), ("alpha3", -m, m)]
    )

    def omega(x):
        L = right_jacobian(x[:3])
        jet_like = x.dtype == object
        out = np.zeros((6, 6), dtype=object if jet_like else float)
        out[:3, :3] = -(L.T @ hat(x[3:6]) @ L)
        out[:3, 3:] = L.T
        out[3:, :3] = -L
        return out

    return chart, KForm(chart, 2, omega, name="omega_can")


def rigid_body_system(params: RigidBodyParams) -> TimeDependentSystem:
    base, om = rigid_body_base(params)
    H = ScalarField(base, lambda x: params.energy(x[3:6]), name="H")
    return cosymplectize(base, om, H, name="rigid-body")


def rigid_body_action(system: TimeDependentSystem):
    """``B . (A, alpha, t) = (BA, alpha, t)``."""
    from .actions import GroupAction, so3_group

    def act(B, x):
        a = so3_log(B @ so3_exp(x[:3]))
        return np.concatenate([a, x[3:]])

    return GroupAction(so3_group(), system.chart, act, name="left SO(3)")


def rigid_body_moment(action):
    """``mu(A, alpha, t) = A alpha``, the spatial angular momentum."""
    from .actions import MomentMapData

    return MomentMapData(action, lambda x: so3_exp(x[:3]) @ x[3:6], name="mu")


def _aligning_rotation(zeta) -> np.ndarray:
    """A rotation taking e3 to zeta / |zeta|."""
    u = np.asarray(zeta, dtype=float) / np.linalg.norm(zeta)
    axis = np.cross([0.0, 0.0, 1.0], u)
    s = np.linalg.norm(axis)
    if s < 1e-14:
        return np.eye(3) if u[2] > 0 else np.diag([1.0, -1.0, -1.0])
    return so3_exp(axis / s * np.arctan2(s, u[2]))


def sphere_chart(theta=(0.2, 1.7), phi=(-2.5, 2.5)) -> Chart:
    return Chart.box("S2xR", [("theta", *theta), ("phi", *phi), TIME_AXIS])


def sphere_momentum(x, zeta) -> np.ndarray:
    """Body momentum of the slice point over ``(theta, phi)``."""
    r = float(np.linalg.norm(zeta))
    th, ph = x[0], x[1]
    return r * np.array([_jet.sin(th) * _jet.cos(ph), _jet.sin(th) * _jet.sin(ph), _jet.cos(th)], dtype=object)


def rigid_body_slice(params: RigidBodyParams, zeta, chart: Chart | None = None):
    """Slice of ``mu^-1(zeta)``: ``alpha`` on the sphere of radius ``|zeta|``
    and ``A = R0 exp(theta hat(n))`` with ``n = (sin phi, -cos phi, 0)``, which
    rotates ``alpha`` onto ``|zeta| R0 e3 = zeta``."""
    from .geometry import SmoothMap

    zeta = np.asarray(zeta, dtype=float)
    if not np.linalg.norm(zeta) > 0:
        raise ValueError("the rigid-body reduction needs a non-zero momentum value")
    chart = chart or sphere_chart()
    R0 = _aligning_rotation(zeta)
    aligned = np.allclose(R0, np.eye(3))
    target = rigid_body_system(params).chart

    def ev(x):
        th, ph = x[0], x[1]
        a = np.array([th * _jet.sin(ph), -th * _jet.cos(ph), 0.0 * th], dtype=object)
        if not aligned:
            a = so3_log(R0 @ so3_exp(a))
        out = np.concatenate([a, sphere_momentum(x, zeta), [x[2]]])
        return out if x.dtype == object else out.astype(float)

    return SmoothMap(chart, target, ev, name="sphere slice")


def rigid_body_datum(params: RigidBodyParams, zeta, chart: Chart | None = None):
    """Reduction at ``zeta`` by the isotropy subgroup (rotations about zeta)."""
    from .reduction import ReductionDatum, isotropy_orbit_basis

    system = rigid_body_system(params)
    action = rigid_body_action(system)
    moment = rigid_body_moment(action)
    return ReductionDatum(
        system.cosym,
        action,
        moment,
        np.asarray(zeta, dtype=float),
        rigid_body_slice(params, zeta, chart),
        orbit_basis=isotropy_orbit_basis(action.group, zeta),
        name="rigid body",
    )


def area_ratio_check(reduced: AlmostCosymplectic, samples=50, seed=0, tol=1e-8) -> tuple[CheckResult, float]:
    """``omega^zeta(d_theta, d_phi) / sin(theta)`` must be constant; returns
    the spread check and the mean ratio."""
    pts = sample_points(reduced.chart, samples, seed)
    ratios = np.array([reduced.omega(p)[0, 1] / np.sin(p[0]) for p in pts])
    mean = float(np.mean(ratios))
    acc = ResidualAccumulator("area_ratio_spread", tol)
    for p, r in zip(pts, ratios):
        acc.add(abs(r - mean) / max(abs(mean), 1e-300), p)
    return acc.result(), mean


def euler_oracle(params: RigidBodyParams, alpha0, T: float, h: float) -> FlowResult:
    """Direct RK4 for ``alpha' = alpha x dH/dalpha``."""
    return rk4(
        lambda al: np.cross(al, params.gradient(al)),
        alpha0,
        T,
        h,
        names=("alpha1", "alpha2", "alpha3"),
        observables={"H": lambda al, s: params.energy(al), "norm": lambda al, s: float(np.linalg.norm(al))},
    )


def example_metric(reduced: AlmostCosymplectic, ratio: float) -> AlmostContactMetric:
    """Metric with ``g(xi, xi) = 1``, ``g(xi, ker eta) = 0`` and the round metric
    of area form ``|ratio| sin(theta) dtheta dphi`` on ``ker eta``; ``phi`` is
    then ``g^-1 omega``."""
    from .geometry import EndoField, MetricField

    chart = reduced.chart
    rho2 = abs(ratio)

    def parts(x):
        xi = reeb_vector(reduced, x)
        eta = reduced.eta(x)
        P = np.eye(3) - np.outer(xi, eta)
        h = np.diag([rho2, rho2 * np.sin(x[0]) ** 2, 0.0])
        return P.T @ h @ P + np.outer(eta, eta), xi, eta

    g = MetricField(chart, lambda x: parts(x)[0], jet=False, name="g_example")
    phi = EndoField(chart, lambda x: np.linalg.solve(parts(x)[0], reduced.omega(x)), jet=False, name="phi_example")
    xi = reeb_field(reduced)
    return AlmostContactMetric(chart, g, phi, xi, reduced.eta)


@dataclass
class RigidBodyReport:
    params: RigidBodyParams
    zeta: np.ndarray
    checks: VerificationReport
    flow: FlowResult
    oracle: FlowResult
    ratio: float

    @property
    def passed(self) -> bool:
        return self.checks.passed

    def to_dict(self) -> dict:
        return {
            "M": list(self.params.M),
            "zeta": [float(v) for v in self.zeta],
            "area_ratio": self.ratio,
            "report": self.checks.to_dict(),
            "flow": self.flow.summary(),
        }


def rigid_body_scenario(
    params: RigidBodyParams,
    zeta=(0.0, 0.0, 1.0),
    start=(0.8, 0.3, 0.0),
    T: float = 1.0,
    h: float = 1e-3,
    samples: int = 30,
    seed: int = 0,
    defect_samples: int = 20,
) -> RigidBodyReport:
    """Action and moment checks, reduction at ``zeta``, reduced flow, and the
    comparison with the direct Euler integrator."""
    from .actions import verify_moment_map
    from .reduction import basic_form_check, cosymplectic_reduce

    zeta = np.asarray(zeta, dtype=float)
    datum = rigid_body_datum(params, zeta)
    report = VerificationReport("rigid_body", meta={"M": list(params.M), "zeta": zeta.tolist()})
    report.extend(verify_cosymplectic(datum.structure, samples=samples, seed=seed), "ambient.")
    report.extend(verify_moment_map(datum.moment, datum.structure, samples=samples, seed=seed), "moment.")
    report.extend(basic_form_check(datum, samples=samples, seed=seed), "basic.")
    reduced = cosymplectic_reduce(datum, certify_samples=samples, seed=seed)
    report.extend(verify_cosymplectic(reduced, samples=samples, seed=seed), "reduced.")
    spread, ratio = area_ratio_check(reduced, samples, seed)
    report.checks.append(spread)

    def alpha_of(x):
        return sphere_momentum(x, zeta).astype(float)

    flow = rk4(
        lambda x: reeb_vector(reduced, x),
        start,
        T,
        h,
        reduced.chart,
        observables={
            "H": lambda x, s: params.energy(alpha_of(x)),
            "norm_alpha": lambda x, s: float(np.linalg.norm(alpha_of(x))),
            "t_defect": lambda x, s: x[-1] - start[-1] - s,
        },
    )
    oracle = euler_oracle(params, alpha_of(np.asarray(start, dtype=float)), T, h)
    H0, n0 = flow.logs["H"][0], flow.logs["norm_alpha"][0]
    acc = ResidualAccumulator("energy_drift", 1e-9)
    for x, v in zip(flow.states, flow.logs["H"]):
        acc.add(abs(v - H0), x)
    report.checks.append(acc.result())
    acc = ResidualAccumulator("norm_drift", 1e-9)
    for x, v in zip(flow.states, flow.logs["norm_alpha"]):
        acc.add(abs(v - n0), x)
    report.checks.append(acc.result())
    acc = ResidualAccumulator("euler_agreement", 1e-6)
    if flow.truncated or len(oracle.states) != len(flow.states):
        acc.add(float("inf"), flow.final)
    else:
        for x, al in zip(flow.states, oracle.states):
            acc.add(float(np.max(np.abs(alpha_of(x) - al))), x)
    report.checks.append(acc.result())
    tflag = ResidualAccumulator("truncated", 0.5)
    tflag.add(float(flow.truncated), flow.final)
    report.checks.append(tflag.result())
    acm = example_metric(reduced, ratio)
    inner = _interior_points(flow.states, reduced.chart, defect_samples)
    report.checks.append(geodesic_defect(acm, acm.xi, points=inner, tol=1e-4))
    return RigidBodyReport(params, zeta, report, flow, oracle, ratio)


def _interior_points(states, chart: Chart, count: int) -> np.ndarray:
    idx = np.linspace(0, len(states) - 1, min(count, len(states))).round().astype(int)
    pts = [states[i] for i in idx if chart.contains(states[i], tol=-1e-3)]
    return np.asarray(pts) if pts else chart.sample(count)

"""Matrix Lie groups acting on charts, fundamental fields and moment maps.

Coadjoint conventions: a covector mu in g* is stored by its values on the
algebra basis, ``mu[a] = mu(A_a)``.  Then ``Ad*_g mu = mu o Ad_{g^-1}`` has
coordinates ``Ad(g^-1)^T mu`` where ``Ad(g)[a, b]`` expands ``g A_b g^-1`` in
the basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import jet as _jet
from .geometry import FD_STEP, Chart, ScalarField, VectorField, as_array
from .report import CheckResult, ResidualAccumulator, Tolerances, VerificationReport
from .structures import (
    AlmostContactMetric,
    AlmostCosymplectic,
    HyperKahlerStructure,
    KahlerStructure,
    ThreeCosymplectic,
    hamiltonian_vector,
    reeb_vector,
    sample_points,
)


class MatrixLieGroup:
    """Connected matrix group given by a basis of its Lie algebra.

    An empty basis (``size`` required) models the trivial group.
    """

    def __init__(self, basis, size: int | None = None, name: str = "", closure_tol: float = 1e-10):
        basis = np.asarray(basis, dtype=float)
        if basis.size == 0:
            if size is None:
                raise ValueError("the trivial group needs an explicit matrix size")
            basis = np.zeros((0, size, size))
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise ValueError("algebra basis must be a stack of square matrices")
        self.basis = basis
        self.name = name
        self.dim = basis.shape[0]
        self.size = basis.shape[1]
        flat = basis.reshape(self.dim, self.size * self.size).T
        if self.dim and np.linalg.matrix_rank(flat) < self.dim:
            raise ValueError("algebra basis is linearly dependent")
        self._flat = flat
        C = np.zeros((self.dim, self.dim, self.dim))
        worst = 0.0
        for a in range(self.dim):
            for b in range(self.dim):
                comm = basis[a] @ basis[b] - basis[b] @ basis[a]
                coef, worst = self._expand(comm, worst)
                C[a, b] = coef
        if worst > closure_tol:
            raise ValueError(f"commutators leave the algebra span (residual {worst:.3e})")
        self.structure_constants = C

    def _expand(self, M, worst=0.0):
        if self.dim == 0:
            return np.zeros(0), max(worst, float(np.max(np.abs(M), initial=0.0)))
        coef = np.linalg.lstsq(self._flat, M.ravel(), rcond=None)[0]
        res = float(np.max(np.abs(self._flat @ coef - M.ravel())))
        return coef, max(worst, res)

    @property
    def abelian(self) -> bool:
        return not np.any(self.structure_constants)

    def algebra(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float).reshape(self.dim)
        return np.tensordot(coeffs, self.basis, axes=1) if self.dim else np.zeros((self.size, self.size))

    def exp(self, coeffs) -> np.ndarray:
        return expm(self.algebra(coeffs))

    def identity(self) -> np.ndarray:
        return np.eye(self.size)

    def bracket(self, a, b) -> np.ndarray:
        """Coordinates of [A, B] for coordinate vectors a, b."""
        return np.einsum("a,b,abc->c", np.asarray(a, float), np.asarray(b, float), self.structure_constants)

    def adjoint(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        ginv = np.linalg.inv(g)
        M = np.zeros((self.dim, self.dim))
        for b in range(self.dim):
            M[:, b] = self._expand(g @ self.basis[b] @ ginv)[0]
        return M

    def coadjoint(self, g, mu) -> np.ndarray:
        """Coordinates of Ad*_g mu = mu o Ad_{g^-1}."""
        return self.adjoint(np.linalg.inv(g)).T @ np.asarray(mu, dtype=float)

    def sample(self, count: int, seed: int = 0, scale: float = 0.5):
        """``(coefficients, elements)`` with coefficients uniform in [-scale, scale]."""
        rng = np.random.default_rng(seed)
        coeffs = rng.uniform(-scale, scale, size=(count, self.dim))
        return coeffs, [self.exp(c) for c in coeffs]

    def to_dict(self):
        return {"name": self.name, "dim": self.dim, "matrix_size": self.size, "abelian": self.abelian}


def circle_group() -> MatrixLieGroup:
    return MatrixLieGroup([[[0.0, -1.0], [1.0, 0.0]]], name="U(1)")


def translation_group(dim: int = 1) -> MatrixLieGroup:
    """R^dim as unipotent (dim+1)x(dim+1) matrices; translation vector in the last column."""
    basis = np.zeros((dim, dim + 1, dim + 1))
    for a in range(dim):
        basis[a, a, dim] = 1.0
    return MatrixLieGroup(basis, name=f"R{dim}")


def so3_group() -> MatrixLieGroup:
    return MatrixLieGroup([hat(e) for e in np.eye(3)], name="SO(3)")


def trivial_group() -> MatrixLieGroup:
    return MatrixLieGroup([], size=1, name="trivial")


def hat(v):
    """so(3) matrix of the cross product with v (works on jets)."""
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]], dtype=object if _jet_like(v) else float)


def _jet_like(v) -> bool:
    return any(isinstance(x, _jet.Jet) for x in np.ravel(np.asarray(v, dtype=object)))


@dataclass
class GroupAction:
    """Left action ``act(g, p)`` of ``group`` on ``chart``.

    ``act`` must accept jet arrays in ``p``.  With ``jet_group=True`` it must
    also accept a matrix whose entries are jets (for the fundamental field via
    a dual seed); otherwise central differences in the group parameter are
    used.
    """

    group: MatrixLieGroup
    chart: Chart
    act: Callable
    jet_group: bool = True
    name: str = ""

    def __call__(self, g, p) -> np.ndarray:
        return np.asarray(self.act(np.asarray(g, dtype=float), np.asarray(p, dtype=float)), dtype=float).reshape(
            self.chart.dim
        )

    def point_jacobian(self, g, p):
        """``(g.p, d(g.)/dp)``."""
        g = np.asarray(g, dtype=float)
        vals, D = _jet.split(self.act(g, _jet.seed(p)), self.chart.dim)
        return vals.reshape(self.chart.dim), D.reshape(self.chart.dim, self.chart.dim)

    def to_dict(self):
        return {"name": self.name, "group": self.group.to_dict(), "chart": self.chart.name}


def fundamental_vector(action: GroupAction, coeffs, p) -> np.ndarray:
    """``A*_p = d/ds act(exp(sA), p)`` at s = 0."""
    group = action.group
    n = action.chart.dim
    if group.dim == 0:
        return np.zeros(n)
    A = group.algebra(coeffs)
    p = np.asarray(p, dtype=float)
    if action.jet_group:
        size = group.size
        g = np.empty((size, size), dtype=object)
        for i in range(size):
            for j in range(size):
                g[i, j] = _jet.Jet(1.0 if i == j else 0.0, np.array([A[i, j]]))
        _, D = _jet.split(action.act(g, p), 1)
        return D.reshape(n)
    h = 1e-6
    return (action(expm(h * A), p) - action(expm(-h * A), p)) / (2 * h)


def fundamental_vector_field(action: GroupAction, coeffs) -> VectorField:
    coeffs = np.asarray(coeffs, dtype=float)
    return VectorField(action.chart, lambda x: fundamental_vector(action, coeffs, x), jet=False, name="A*")


def fundamental_matrix(action: GroupAction, p) -> np.ndarray:
    """Columns are the fundamental vectors of the algebra basis at p."""
    n, k = action.chart.dim, action.group.dim
    out = np.zeros((n, k))
    for a in range(k):
        out[:, a] = fundamental_vector(action, np.eye(k)[a], p)
    return out


# ---------------------------------------------------------------------------
# moment maps


@dataclass
class MomentMapData:
    action: GroupAction
    mu: Callable  # point -> dim_g components, jet-capable when ``jet``
    jet: bool = True
    name: str = "mu"

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.mu(np.asarray(p, dtype=float)), dtype=float).reshape(self.action.group.dim)

    def component(self, a: int) -> ScalarField:
        return ScalarField(
            self.action.chart, lambda x: as_array(self.mu(x), x)[a], jet=self.jet, name=f"{self.name}^{a}"
        )

    def differential(self, p) -> np.ndarray:
        """Rows are d(mu^a) at p."""
        k, n = self.action.group.dim, self.action.chart.dim
        if k == 0:
            return np.zeros((0, n))
        p = np.asarray(p, dtype=float)
        if self.jet:
            _, D = _jet.split(self.mu(_jet.seed(p)), n)
            return D.reshape(k, n)
        D = np.empty((k, n))
        for i in range(n):
            step = np.zeros(n)
            step[i] = FD_STEP
            D[:, i] = (self(p + step) - self(p - step)) / (2 * FD_STEP)
        return D


@dataclass
class TripleMomentMap:
    """mu = mu_1 i + mu_2 j + mu_3 k for one action."""

    action: GroupAction
    maps: tuple

    def __post_init__(self):
        if len(self.maps) != 3:
            raise ValueError("a 3-cosymplectic moment map has three components")


def _tensor_table(structure):
    """(name, kind, field) for every structure tensor."""
    if isinstance(structure, ThreeCosymplectic):
        out = [("g", "metric", structure.g)]
        for a, (phi, xi, eta) in enumerate(structure.triples, 1):
            out += [(f"phi{a}", "endo", phi), (f"xi{a}", "vector", xi), (f"eta{a}", "form1", eta)]
        return out
    if isinstance(structure, AlmostContactMetric):
        return [
            ("g", "metric", structure.g),
            ("phi", "endo", structure.phi),
            ("xi", "vector", structure.xi),
            ("eta", "form1", structure.eta),
            ("omega", "form2", structure.omega),
        ]
    if isinstance(structure, AlmostCosymplectic):
        return [("eta", "form1", structure.eta), ("omega", "form2", structure.omega)]
    if isinstance(structure, HyperKahlerStructure):
        return [("h", "metric", structure.h)] + [(f"J{a}", "endo", J) for a, J in enumerate(structure.Js, 1)]
    if isinstance(structure, KahlerStructure):
        return [("h", "metric", structure.h), ("J", "endo", structure.J), ("Omega", "form2", structure.Omega)]
    raise TypeError(f"unsupported structure {type(structure).__name__}")


def _transport_residual(kind, T_y, T_p, J):
    """Deviation of the pullback (or pushforward) of a tensor from itself."""
    if kind == "form1":
        return T_y @ J - T_p
    if kind in ("form2", "metric"):
        return J.T @ T_y @ J - T_p
    if kind == "endo":
        return J @ T_p - T_y @ J
    return J @ T_p - T_y


def verify_action_preserves(
    action: GroupAction, structure, samples=50, seed=0, points=None, elements=3, tol: Tolerances | None = None
) -> VerificationReport:
    """Pullback invariance ``L_g* T = T`` at sampled near-identity elements, plus
    the infinitesimal form ``L_{A*} T = 0`` by a central difference of the flow."""
    tol = tol or Tolerances()
    pts = sample_points(action.chart, samples, seed, points)
    table = _tensor_table(structure)
    report = VerificationReport("action_preserves", meta={"action": action.to_dict()})
    group = action.group
    if group.dim == 0:
        report.degenerate = True
        return report
    coeffs, gs = group.sample(elements, seed + 1)
    fin = {name: ResidualAccumulator(f"preserves_{name}", tol.jet) for name, _, _ in table}
    inf = {name: ResidualAccumulator(f"lie_derivative_{name}", tol.fd) for name, _, _ in table}
    h = FD_STEP
    basis_elems = [(expm(h * A), expm(-h * A)) for A in group.basis]
    for p in pts:
        base = {name: f(p) for name, _, f in table}
        for g in gs:
            y, J = action.point_jacobian(g, p)
            if not action.chart.contains(y):
                continue
            for name, kind, f in table:
                fin[name].add(np.max(np.abs(_transport_residual(kind, f(y), base[name], J)), initial=0.0), p)
        for gp, gm in basis_elems:
            yp, Jp = action.point_jacobian(gp, p)
            ym, Jm = action.point_jacobian(gm, p)
            for name, kind, f in table:
                rp = _transport_residual(kind, f(yp), base[name], Jp)
                rm = _transport_residual(kind, f(ym), base[name], Jm)
                inf[name].add(np.max(np.abs((rp - rm) / (2 * h)), initial=0.0), p)
    for name, _, _ in table:
        report.add(fin[name].result())
        report.add(inf[name].result())
    return report


def verify_moment_map(
    data: MomentMapData, structure: AlmostCosymplectic, samples=100, seed=0, points=None, elements=2, tol=None
) -> VerificationReport:
    """Equivariance, ``A* = X_{mu^A}``, ``d mu^A(xi) = 0`` and the infinitesimal
    equivariance ``d mu^B(A*) = -mu^{[A,B]}`` at sampled points."""
    tol = tol or Tolerances()
    action = data.action
    group = action.group
    pts = sample_points(action.chart, samples, seed, points)
    report = VerificationReport(
        "moment_map",
        meta={"pairing": "mu[a] = mu(A_a) on the algebra basis; Ad*_g mu = Ad(g^-1)^T mu", "group": group.to_dict()},
    )
    if group.dim == 0:
        report.degenerate = True
        return report
    _, gs = group.sample(elements, seed + 1)
    eq = ResidualAccumulator("equivariance", tol.jet)
    ham = ResidualAccumulator("hamiltonian", tol.jet)
    reeb = ResidualAccumulator("reeb_annihilates", tol.jet)
    inf = ResidualAccumulator("infinitesimal_equivariance", tol.jet)
    comps = [data.component(a) for a in range(group.dim)]
    C = group.structure_constants
    # Kähler moment maps: d(mu^A) = Omega(A*, -), no Reeb condition
    symplectic = isinstance(structure, KahlerStructure)
    for p in pts:
        mu_p = data(p)
        for g in gs:
            y = action(g, p)
            if action.chart.contains(y):
                eq.add(np.max(np.abs(data(y) - group.coadjoint(g, mu_p))), p)
        F = fundamental_matrix(action, p)
        dmu = data.differential(p)
        xi = None if symplectic else reeb_vector(structure, p)
        for a in range(group.dim):
            if symplectic:
                X = np.linalg.solve(-structure.Omega(p), dmu[a])
            else:
                X = hamiltonian_vector(structure, comps[a], p)
            ham.add(np.max(np.abs(F[:, a] - X)), p)
            if xi is not None:
                reeb.add(abs(dmu[a] @ xi), p)
        # dmu[b] . A_a* = -sum_c C[a, b, c] mu_c
        inf.add(np.max(np.abs(dmu @ F + np.einsum("abc,c->ba", C, mu_p)), initial=0.0), p)
    for acc in (eq, ham, inf) if symplectic else (eq, ham, reeb, inf):
        report.add(acc.result())
    return report


def verify_hyperkahler_moment_map(data: TripleMomentMap, structure: HyperKahlerStructure, samples=100, seed=0, points=None, tol=None):
    pts = sample_points(data.action.chart, samples, seed, points)
    report = VerificationReport("hyperkahler_moment_map")
    for a in range(3):
        sub = verify_moment_map(data.maps[a], structure.kahler(a), points=pts, seed=seed, tol=tol)
        report.extend(sub, prefix=f"mu{a + 1}.")
    report.degenerate = data.action.group.dim == 0
    return report


def verify_3cosym_moment_map(data: TripleMomentMap, structure: ThreeCosymplectic, samples=100, seed=0, points=None, tol=None):
    tol = tol or Tolerances()
    pts = sample_points(data.action.chart, samples, seed, points)
    report = VerificationReport("3cosym_moment_map")
    for a in range(3):
        sub = verify_moment_map(data.maps[a], structure.triple(a).cosymplectic(), points=pts, seed=seed, tol=tol)
        report.extend(sub, prefix=f"mu{a + 1}.")
    if data.action.group.dim == 0:
        report.degenerate = True
        return report
    accs = {}
    for a in range(3):
        for b in range(3):
            if a != b:
                accs[(a, b)] = ResidualAccumulator(f"cross_dmu{b + 1}_xi{a + 1}", tol.jet)
    for p in pts:
        dmus = [m.differential(p) for m in data.maps]
        xis = [structure.triples[a][1](p) for a in range(3)]
        for (a, b), acc in accs.items():
            acc.add(np.max(np.abs(dmus[b] @ xis[a])), p)
    for acc in accs.values():
        report.add(acc.result())
    return report


def centrality(group: MatrixLieGroup, zeta, samples=20, seed=0, tol: float = 1e-10) -> CheckResult:
    """max |Ad*_g zeta - zeta| over sampled elements."""
    acc = ResidualAccumulator("zeta_central", tol)
    zeta = np.asarray(zeta, dtype=float)
    if group.dim == 0:
        return acc.result()
    coeffs, gs = group.sample(samples, seed)
    for c, g in zip(coeffs, gs):
        acc.add(np.max(np.abs(group.coadjoint(g, zeta) - zeta)), c)
    return acc.result()


def isotropy_basis(group: MatrixLieGroup, zeta, tol: float = 1e-10) -> np.ndarray:
    """Basis (rows, algebra coordinates) of the algebra of G_zeta: ad*_A zeta = 0."""
    zeta = np.asarray(zeta, dtype=float)
    # (ad*_A zeta)_b = -sum_c C[a, b, c] zeta_c  for A = A_a
    M = -np.einsum("abc,c->ba", group.structure_constants, zeta)
    if group.dim == 0:
        return np.zeros((0, 0))
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return Vt[rank:]


def orbit_injectivity(action: GroupAction, points, elements=10, seed=0, min_scale=0.1, tol=1e-6) -> CheckResult:
    """Spot check of free action: ``|g.p - p|`` stays away from zero for sampled
    ``g`` with coefficient norm at least ``min_scale``.  Not a certificate."""
    acc = ResidualAccumulator("orbit_injectivity", tol, bound="min")
    group = action.group
    if group.dim == 0:
        return acc.result()
    rng = np.random.default_rng(seed)
    for p in np.atleast_2d(points):
        for _ in range(elements):
            c = rng.uniform(-0.5, 0.5, group.dim)
            norm = np.linalg.norm(c)
            if norm < min_scale:
                c = c / max(norm, 1e-300) * min_scale
            acc.add(np.linalg.norm(action(group.exp(c), p) - p), p)
    return acc.result()

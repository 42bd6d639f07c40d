"""Charts, tensor fields and the first-order differential operators.

Fields are pointwise evaluators.  An evaluator receives a 1-D array of
coordinates (floats, or :class:`~cosym.jet.Jet` objects when the field is
jet-capable) and returns the field's components as a nested sequence.

Index conventions (coordinate basis ``e_i``):

* ``VectorField``: ``X[i]``.
* ``KForm`` of degree k: fully antisymmetric ``alpha[i1, ..., ik]``.
* ``MetricField``: symmetric ``g[i, j]``.
* ``EndoField``: ``phi[j, k]`` with ``phi(e_k) = sum_j phi[j, k] e_j``.
* Derivative arrays append one trailing axis: ``D[..., l] = d/dx_l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jet as _jet

FD_STEP = 1e-5
MAX_CONDITION = 1e12


class DomainError(ValueError):
    """A point lies outside the coordinate box of its chart."""


class ChartMismatchError(TypeError):
    """Two objects that must share a chart do not."""


class DegenerateMetricError(ArithmeticError):
    def __init__(self, point, condition):
        self.point = np.asarray(point, dtype=float)
        self.condition = float(condition)
        super().__init__(
            f"metric condition number {self.condition:.3e} exceeds "
            f"{MAX_CONDITION:.0e} at {self.point.tolist()}"
        )


@dataclass(frozen=True)
class Chart:
    name: str
    dim: int
    lower: tuple
    upper: tuple
    coord_names: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"chart {self.name!r}: dim must be >= 1")
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        names = tuple(self.coord_names) or tuple(f"x{i}" for i in range(self.dim))
        if len(lower) != self.dim or len(upper) != self.dim or len(names) != self.dim:
            raise ValueError(f"chart {self.name!r}: bounds/names must have length {self.dim}")
        for lo, hi in zip(lower, upper):
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ValueError(f"chart {self.name!r}: invalid bounds ({lo}, {hi})")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "coord_names", names)

    @classmethod
    def box(cls, name: str, axes: Sequence[tuple]) -> "Chart":
        """Build a chart from ``(coord_name, lower, upper)`` triples."""
        names = [a[0] for a in axes]
        return cls(name, len(axes), [a[1] for a in axes], [a[2] for a in axes], names)

    def contains(self, p, tol: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(
            np.all(p >= np.asarray(self.lower) - tol) and np.all(p <= np.asarray(self.upper) + tol)
        )

    def check(self, p):
        if np.shape(p) != (self.dim,):
            raise DomainError(f"point of shape {np.shape(p)} on {self.dim}-dim chart {self.name!r}")
        if not self.contains(p):
            raise DomainError(f"point {np.asarray(p).tolist()} outside chart {self.name!r}")

    def sample(self, count: int, seed: int = 0, margin: float = 0.01) -> np.ndarray:
        """Seeded uniform points in the box shrunk by ``margin`` of each width."""
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        pad = margin * (hi - lo)
        rng = np.random.default_rng(seed)
        return rng.uniform(lo + pad, hi - pad, size=(count, self.dim))

    def product(self, other: "Chart", name: str | None = None) -> "Chart":
        return Chart(
            name or f"{self.name}x{other.name}",
            self.dim + other.dim,
            self.lower + other.lower,
            self.upper + other.upper,
            self.coord_names + other.coord_names,
        )

    def to_dict(self):
        return {
            "name": self.name,
            "dim": self.dim,
            "coords": list(self.coord_names),
            "lower": list(self.lower),
            "upper": list(self.upper),
        }


def _same_chart(a: Chart, b: Chart):
    if a.dim != b.dim or a.name != b.name:
        raise ChartMismatchError(f"chart {a.name!r} (dim {a.dim}) != {b.name!r} (dim {b.dim})")


class TensorField:
    """A tensor-valued evaluator on a chart.

    ``jet=True`` declares the evaluator safe to call on jet arrays; first
    derivatives then come from one jet evaluation.  Otherwise (fields built
    from linear solves or from other derivatives) central differences with
    step :data:`FD_STEP` are used.
    """

    def __init__(self, chart: Chart, evaluator: Callable, shape: tuple, jet: bool = True, name: str = ""):
        self.chart = chart
        self.evaluator = evaluator
        self.shape = tuple(shape)
        self.jet = jet
        self.name = name

    def __call__(self, p) -> np.ndarray:
        out = np.asarray(self.evaluator(np.asarray(p, dtype=float)), dtype=float)
        if out.shape != self.shape:
            out = out.reshape(self.shape)
        return out

    def derivatives(self, p, h: float = FD_STEP):
        """Return ``(values, D)`` with ``D[..., l]`` the partial along coordinate l."""
        p = np.asarray(p, dtype=float)
        n = self.chart.dim
        if self.jet:
            values, partials = _jet.split(self.evaluator(_jet.seed(p)), n)
            return values.reshape(self.shape), partials.reshape(self.shape + (n,))
        values = self(p)
        D = np.empty(self.shape + (n,))
        for l in range(n):
            step = np.zeros(n)
            step[l] = h
            D[..., l] = (self(p + step) - self(p - step)) / (2.0 * h)
        return values, D

    def __repr__(self):
        kind = type(self).__name__
        return f"<{kind} {self.name or '?'} on {self.chart.name} shape={self.shape} jet={self.jet}>"


class ScalarField(TensorField):
    def __init__(self, chart, evaluator, jet=True, name=""):
        super().__init__(chart, evaluator, (), jet, name)


class VectorField(TensorField):
    def __init__(self, chart, evaluator, jet=True, name=""):
        super().__init__(chart, evaluator, (chart.dim,), jet, name)


class KForm(TensorField):
    def __init__(self, chart, degree, evaluator, jet=True, name=""):
        if not 0 <= degree <= chart.dim + 1:
            raise ValueError(f"degree {degree} invalid on {chart.dim}-dim chart")
        self.degree = degree
        self.degenerate = degree == chart.dim + 1
        super().__init__(chart, evaluator, (chart.dim,) * degree, jet, name)


class MetricField(TensorField):
    def __init__(self, chart, evaluator, jet=True, name=""):
        super().__init__(chart, evaluator, (chart.dim, chart.dim), jet, name)


class EndoField(TensorField):
    def __init__(self, chart, evaluator, jet=True, name=""):
        super().__init__(chart, evaluator, (chart.dim, chart.dim), jet, name)


def constant_field(kind, chart: Chart, value, **kw):
    """Wrap a constant array as a field of the given kind (jet-capable)."""
    value = np.asarray(value, dtype=float)
    evaluator = lambda x, _v=value: _v
    if kind is KForm:
        return KForm(chart, value.ndim, evaluator, **kw)
    return kind(chart, evaluator, **kw)


def one_form(chart: Chart, components: Callable, jet=True, name="") -> KForm:
    return KForm(chart, 1, components, jet=jet, name=name)


def two_form(chart: Chart, upper: Callable, jet=True, name="") -> KForm:
    """2-form from an evaluator giving a full (antisymmetric) matrix."""
    return KForm(chart, 2, upper, jet=jet, name=name)


@dataclass
class SmoothMap:
    source: Chart
    target: Chart
    evaluator: Callable
    jet: bool = True
    name: str = ""

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float).reshape(self.target.dim)

    def jacobian(self, x, h: float = FD_STEP):
        """Return ``(F(x), J)`` with ``J[a, i] = dF^a/dx^i``."""
        x = np.asarray(x, dtype=float)
        if self.jet:
            y, J = _jet.split(self.evaluator(_jet.seed(x)), self.source.dim)
            return y.reshape(self.target.dim), J.reshape(self.target.dim, self.source.dim)
        y = self(x)
        J = np.empty((self.target.dim, self.source.dim))
        for i in range(self.source.dim):
            step = np.zeros(self.source.dim)
            step[i] = h
            J[:, i] = (self(x + step) - self(x - step)) / (2.0 * h)
        return y, J

    def compose(self, inner: "SmoothMap") -> "SmoothMap":
        """``self o inner``."""
        _same_chart(inner.target, self.source)
        outer_eval, inner_eval = self.evaluator, inner.evaluator
        return SmoothMap(
            inner.source,
            self.target,
            lambda x: outer_eval(as_array(inner_eval(x), x)),
            jet=self.jet and inner.jet,
            name=f"{self.name}o{inner.name}",
        )


def identity_map(chart: Chart) -> SmoothMap:
    return SmoothMap(chart, chart, lambda x: x, name="id")


def _is_jet(x) -> bool:
    return isinstance(x, np.ndarray) and x.dtype == object


# ---------------------------------------------------------------------------
# operators


def partials(f: ScalarField, p) -> np.ndarray:
    f.chart.check(p)
    return f.derivatives(p)[1]


def exterior_derivative(alpha: KForm) -> KForm:
    """``(d alpha)_{i0..ik} = sum_j (-1)^j d_{ij} alpha_{i0..^ij..ik}``."""
    n, k = alpha.chart.dim, alpha.degree
    if k >= n:
        zero = np.zeros((n,) * (k + 1))
        return KForm(alpha.chart, k + 1, lambda x: zero, name=f"d{alpha.name}")

    def evaluator(x):
        _, D = alpha.derivatives(x)
        out = np.zeros((n,) * (k + 1))
        for j in range(k + 1):
            out += (-1) ** j * np.moveaxis(D, -1, j)
        return out

    return KForm(alpha.chart, k + 1, evaluator, jet=False, name=f"d{alpha.name}")


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i``."""
    _same_chart(X.chart, Y.chart)

    def evaluator(x):
        Xv, DX = X.derivatives(x)
        Yv, DY = Y.derivatives(x)
        return DY @ Xv - DX @ Yv

    return VectorField(X.chart, evaluator, jet=False, name=f"[{X.name},{Y.name}]")


def as_array(result, x, shape=None) -> np.ndarray:
    """Evaluator output as an array whose dtype follows the input point."""
    out = np.asarray(result, dtype=object if _is_jet(x) else float)
    return out if shape is None else out.reshape(shape)


def apply_endo(phi: EndoField, X: VectorField) -> VectorField:
    _same_chart(phi.chart, X.chart)

    def ev(x):
        return as_array(phi.evaluator(x), x, phi.shape) @ as_array(X.evaluator(x), x, X.shape)

    return VectorField(X.chart, ev, jet=phi.jet and X.jet, name=f"{phi.name}{X.name}")


def scale_field(f: ScalarField, X: VectorField) -> VectorField:
    _same_chart(f.chart, X.chart)

    def ev(x):
        return as_array(X.evaluator(x), x, X.shape) * f.evaluator(x)

    return VectorField(X.chart, ev, jet=f.jet and X.jet, name=f"{f.name}{X.name}")


class Nijenhuis:
    """``N(X, Y) = phi^2[X,Y] + [phiX, phiY] - phi[phiX, Y] - phi[X, phiY]``."""

    def __init__(self, phi: EndoField):
        self.phi = phi

    def components(self, p) -> np.ndarray:
        """``N[k, i, j] = N(e_i, e_j)^k`` from first derivatives of phi."""
        phi, D = self.phi.derivatives(p)
        t1 = np.einsum("kjl,li->kij", D, phi)
        t2 = np.einsum("kil,lj->kij", D, phi)
        t3 = np.einsum("km,mij->kij", phi, D)
        t4 = np.einsum("km,mji->kij", phi, D)
        return t1 - t2 + t3 - t4

    def __call__(self, X: VectorField, Y: VectorField) -> VectorField:
        phi = self.phi
        pX, pY = apply_endo(phi, X), apply_endo(phi, Y)
        b_xy = lie_bracket(X, Y)
        b_pp = lie_bracket(pX, pY)
        b_px = lie_bracket(pX, Y)
        b_xp = lie_bracket(X, pY)

        def ev(x):
            P = phi(x)
            return P @ P @ b_xy(x) + b_pp(x) - P @ b_px(x) - P @ b_xp(x)

        return VectorField(X.chart, ev, jet=False, name="N")


def nijenhuis(phi: EndoField) -> Nijenhuis:
    return Nijenhuis(phi)


def _metric_inverse(gv, p):
    cond = np.linalg.cond(gv)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateMetricError(p, cond)
    return np.linalg.inv(gv)


def christoffel(g: MetricField, p) -> np.ndarray:
    """``Gamma[k, i, j]``, exactly symmetric in ``(i, j)``."""
    gv, Dg = g.derivatives(p)
    ginv = _metric_inverse(gv, p)
    Dg = 0.5 * (Dg + Dg.transpose(1, 0, 2))
    # term[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    term = Dg.transpose(1, 2, 0) + Dg.transpose(1, 0, 2) - Dg.transpose(2, 0, 1)
    return 0.5 * np.einsum("kl,lij->kij", ginv, term)


def covariant_derivative_endo(g: MetricField, phi: EndoField, p) -> np.ndarray:
    """``C[i, j, k] = (nabla_i phi)^j_k``."""
    _same_chart(g.chart, phi.chart)
    G = christoffel(g, p)
    P, D = phi.derivatives(p)
    return (
        D.transpose(2, 0, 1)
        + np.einsum("jil,lk->ijk", G, P)
        - np.einsum("lik,jl->ijk", G, P)
    )


def covariant_derivative_vector(g: MetricField, X: VectorField, p) -> np.ndarray:
    """``C[i, k] = (nabla_i X)^k``."""
    G = christoffel(g, p)
    Xv, D = X.derivatives(p)
    return D.T + np.einsum("kij,j->ik", G, Xv)


def pullback(F: SmoothMap, alpha: KForm) -> KForm:
    """``(F* alpha)(v1..vk) = alpha(dF v1, ..., dF vk)`` on ``F.source``."""
    _same_chart(F.target, alpha.chart)
    k = alpha.degree

    def evaluator(x):
        y, J = F.jacobian(x)
        out = alpha(y)
        for _ in range(k):
            # contract the leading target index; the new source index goes last
            out = np.tensordot(out, J, axes=([0], [0]))
        return out

    return KForm(F.source, k, evaluator, jet=False, name=f"{F.name}*{alpha.name}")


def pullback_metric(F: SmoothMap, g: MetricField) -> MetricField:
    def evaluator(x):
        y, J = F.jacobian(x)
        return J.T @ g(y) @ J

    return MetricField(F.source, evaluator, jet=False, name=f"{F.name}*{g.name}")

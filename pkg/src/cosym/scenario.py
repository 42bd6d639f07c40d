"""Scenario files: JSON descriptions of one verification, reduction, flow,
commutation or rigid-body run."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import ExpressionError, compile_array
from .geometry import Chart, EndoField, KForm, MetricField, ScalarField, VectorField
from .report import Tolerances

KINDS = ("verify", "reduce", "flow", "commute", "rigid-body")
STRUCTURE_TYPES = ("almost-cosymplectic", "cosymplectic", "almost-contact-metric", "cokahler", "kahler")


class ScenarioError(ValueError):
    """Malformed scenario; the message names the offending field."""

    def __init__(self, field_path: str, message: str, source: str = ""):
        self.field = field_path
        where = f"{source}: " if source else ""
        super().__init__(f"{where}field {field_path!r}: {message}")


@dataclass
class Scenario:
    kind: str
    seed: int
    samples: int = 50
    builtin: str | None = None
    structure: dict | None = None
    system: dict | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    params: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    source: str = ""


def _require(data, key, kind, source, path=None):
    path = path or key
    if key not in data:
        raise ScenarioError(path, "is required", source)
    value = data[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ScenarioError(path, f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}", source)
    return value


def parse_scenario(data: dict, source: str = "") -> Scenario:
    from .fixtures import BUILTINS

    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object", source)
    kind = _require(data, "kind", str, source)
    if kind not in KINDS:
        raise ScenarioError("kind", f"must be one of {list(KINDS)}, got {kind!r}", source)
    sampling = _require(data, "sampling", dict, source)
    seed = _require(sampling, "seed", int, source, "sampling.seed")
    samples = sampling.get("count", 50)
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 1:
        raise ScenarioError("sampling.count", "must be a positive integer", source)
    try:
        tol = Tolerances.from_dict(data.get("tolerances"))
    except (TypeError, ValueError) as exc:
        raise ScenarioError("tolerances", str(exc), source) from None
    builtin = data.get("builtin")
    if builtin is not None:
        if not isinstance(builtin, str) or builtin not in BUILTINS:
            raise ScenarioError("builtin", f"unknown builtin {builtin!r}", source)
    structure = data.get("structure")
    if kind == "verify" and (builtin is None) == (structure is None):
        raise ScenarioError("builtin", "verify needs exactly one of 'builtin' or 'structure'", source)
    if kind == "reduce":
        if builtin is None or BUILTINS[builtin][0] != "reduction":
            raise ScenarioError("builtin", "reduce needs a builtin of kind 'reduction'", source)
    system = data.get("system")
    if kind == "flow" and builtin is None and system is None:
        raise ScenarioError("system", "flow needs 'builtin' or an inline 'system'", source)
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError("params", "must be an object", source)
    output = data.get("output", {})
    if not isinstance(output, dict):
        raise ScenarioError("output", "must be an object", source)
    sc = Scenario(kind, seed, samples, builtin, structure, system, tol, params, output, source)
    # build inline parts eagerly so errors surface at load time
    if structure is not None:
        build_structure(structure, source)
    if system is not None:
        build_system(system, source)
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError("<file>", f"cannot read scenario: {exc.strerror}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<json>", f"{exc.msg} at line {exc.lineno}, column {exc.colno}", str(path)) from None
    return parse_scenario(data, str(path))


def effective_seed(scenario_seed: int, flag: int | None = None) -> int:
    """Flag beats COSYM_SEED beats the scenario file."""
    if flag is not None:
        return flag
    env = os.environ.get("COSYM_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ScenarioError("COSYM_SEED", f"not an integer: {env!r}") from None
    return scenario_seed


# -- inline structures -----------------------------------------------------------


def _chart(spec, source, path="structure.coords") -> Chart:
    if not isinstance(spec, list) or not spec:
        raise ScenarioError(path, "expected a list of [name, lower, upper]", source)
    axes = []
    for i, ax in enumerate(spec):
        if not (isinstance(ax, list) and len(ax) == 3 and isinstance(ax[0], str)):
            raise ScenarioError(f"{path}[{i}]", "expected [name, lower, upper]", source)
        axes.append((ax[0], float(ax[1]), float(ax[2])))
    try:
        return Chart.box("inline", axes)
    except ValueError as exc:
        raise ScenarioError(path, str(exc), source) from None


def _field(cls, chart, spec, key, source, shape):
    try:
        ev = compile_array(spec, chart.coord_names)
    except ExpressionError as exc:
        raise ScenarioError(f"structure.{key}", str(exc), source) from None
    arr = np.asarray(spec, dtype=object)
    if arr.shape != shape:
        raise ScenarioError(f"structure.{key}", f"expected shape {shape}, got {arr.shape}", source)
    if cls is KForm:
        return KForm(chart, len(shape), ev, name=key)
    return cls(chart, ev, name=key)


def build_structure(spec: dict, source: str = ""):
    from .structures import AlmostContactMetric, AlmostCosymplectic, KahlerStructure

    if not isinstance(spec, dict):
        raise ScenarioError("structure", "must be an object", source)
    stype = _require(spec, "type", str, source, "structure.type")
    if stype not in STRUCTURE_TYPES:
        raise ScenarioError("structure.type", f"must be one of {list(STRUCTURE_TYPES)}", source)
    chart = _chart(spec.get("coords"), source)
    n = chart.dim

    def need(key):
        if key not in spec:
            raise ScenarioError(f"structure.{key}", f"is required for type {stype!r}", source)
        return spec[key]

    if stype == "kahler":
        h = _field(MetricField, chart, need("h"), "h", source, (n, n))
        J = _field(EndoField, chart, need("J"), "J", source, (n, n))
        return KahlerStructure(chart, h, J)
    eta = _field(KForm, chart, need("eta"), "eta", source, (n,))
    if stype in ("almost-cosymplectic", "cosymplectic"):
        omega = _field(KForm, chart, need("omega"), "omega", source, (n, n))
        return AlmostCosymplectic(chart, eta, omega)
    g = _field(MetricField, chart, need("g"), "g", source, (n, n))
    phi = _field(EndoField, chart, need("phi"), "phi", source, (n, n))
    xi = _field(VectorField, chart, need("xi"), "xi", source, (n,))
    return AlmostContactMetric(chart, g, phi, xi, eta)


def build_system(spec, source: str = ""):
    """Inline ``{"dof": n, "H": expr, "box": b}`` on the Darboux base; ``H``
    may use p1, q1, ..., t."""
    from .dynamics import TIME_AXIS, canonical_base, cosymplectize
    from .expr import Expression

    if not isinstance(spec, dict):
        raise ScenarioError("system", "must be an object", source)
    dof = spec.get("dof", 1)
    if not isinstance(dof, int) or isinstance(dof, bool) or dof < 1:
        raise ScenarioError("system.dof", "must be a positive integer", source)
    H_src = _require(spec, "H", str, source, "system.H")
    base, om = canonical_base(dof, float(spec.get("box", 2.0)))
    chart = base.product(Chart.box("time", [TIME_AXIS]), name=f"{base.name}xR")
    try:
        expr = Expression(H_src, chart.coord_names)
    except ExpressionError as exc:
        raise ScenarioError("system.H", str(exc), source) from None
    H = ScalarField(chart, lambda x: expr(x) + 0.0 * x[0], name="H")
    return cosymplectize(base, om, H, name="inline")

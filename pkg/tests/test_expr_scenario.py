import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cosym import jet
from cosym.expr import Expression, ExpressionError, compile_array
from cosym.scenario import ScenarioError, build_structure, build_system, effective_seed, load_scenario, parse_scenario
from cosym.structures import verify_cokahler

SCENARIOS = sorted((__import__("pathlib").Path(__file__).parent.parent / "scenarios").glob("*.json"))


@pytest.mark.parametrize(
    "source, value",
    [
        ("1 + 2*x", 3.0),
        ("x^2 + y**2", 5.0),
        ("-x^2", -1.0),
        ("2^3^2", 512.0),
        ("sin(pi/2) + cos(0)", 2.0),
        ("exp(log(y))", 2.0),
        ("sqrt(y*8) - tanh(0) + tan(0)", 4.0),
        ("e", math.e),
    ],
)
def test_expression_values(source, value):
    assert Expression(source, ("x", "y"))([1.0, 2.0]) == pytest.approx(value)


@pytest.mark.parametrize(
    "source, fragment",
    [
        ("x +", "cannot parse"),
        ("z", "unknown name"),
        ("foo(x)", "unknown function"),
        ("sin(x, y)", "exactly one"),
        ("x < y", "unsupported"),
        ("'a'", "non-numeric"),
        ("__import__('os')", "unknown function"),
        ("x.real", "unsupported syntax"),
        ("x % 2", "unsupported operator"),
        ("not x", "unsupported unary"),
    ],
)
def test_expression_rejects(source, fragment):
    with pytest.raises(ExpressionError, match=fragment):
        Expression(source, ("x", "y"))


def test_expression_error_reports_column():
    with pytest.raises(ExpressionError, match="column 5"):
        Expression("x + bogus", ("x",))


def test_coordinate_names_cannot_shadow_builtins():
    with pytest.raises(ExpressionError, match="shadow"):
        Expression("pi", ("pi",))


@given(st.floats(-2, 2), st.floats(0.1, 2))
def test_expression_jet_derivative(x, y):
    f = Expression("x^2 * sin(y)", ("x", "y"))
    value, grad = jet.split(f(jet.seed([x, y])), 2)
    assert float(value) == pytest.approx(x * x * math.sin(y))
    assert grad == pytest.approx([2 * x * math.sin(y), x * x * math.cos(y)], abs=1e-12)


def test_compile_array_mixes_numbers_and_expressions():
    ev = compile_array([[1, "x"], ["-x", 0]], ("x",))
    assert np.array(ev([2.0]), dtype=float).tolist() == [[1.0, 2.0], [-2.0, 0.0]]
    with pytest.raises(ExpressionError):
        compile_array([None], ("x",))


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_shipped_scenarios_load(path):
    sc = load_scenario(path)
    assert sc.kind in ("verify", "reduce", "flow", "commute", "rigid-body")


def test_inline_structure_verifies():
    sc = load_scenario([p for p in SCENARIOS if p.stem == "inline-cokahler"][0])
    s = build_structure(sc.structure)
    assert verify_cokahler(s, samples=20).passed


def _base(**kw):
    data = {"kind": "verify", "builtin": "flat-cokahler-r3", "sampling": {"seed": 1}}
    data.update(kw)
    return data


@pytest.mark.parametrize(
    "data, field",
    [
        ({"sampling": {"seed": 1}}, "kind"),
        (_base(kind="dance"), "kind"),
        ({"kind": "verify", "builtin": "flat-cokahler-r3"}, "sampling"),
        (_base(sampling={}), "sampling.seed"),
        (_base(sampling={"seed": "7"}), "sampling.seed"),
        (_base(sampling={"seed": True}), "sampling.seed"),
        (_base(sampling={"seed": 1, "count": 0}), "sampling.count"),
        (_base(builtin="nope"), "builtin"),
        (_base(kind="reduce"), "builtin"),
        (_base(tolerances={"bogus": 1}), "tolerances"),
        (_base(params=[]), "params"),
        ({"kind": "flow", "sampling": {"seed": 1}}, "system"),
        ({"kind": "flow", "sampling": {"seed": 1}, "system": {"H": "p1 +"}}, "system.H"),
        ({"kind": "flow", "sampling": {"seed": 1}, "system": {"H": "p1", "dof": 0}}, "system.dof"),
        ([], "<root>"),
    ],
)
def test_scenario_errors_name_the_field(data, field):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(data)
    assert info.value.field == field


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"type": "sasakian"}, "structure.type"),
        ({"coords": []}, "structure.coords"),
        ({"coords": [["x", 0]]}, "structure.coords[0]"),
        ({"eta": [0, 1]}, "structure.eta"),
        ({"g": [[1, 0, 0], [0, "y +", 0], [0, 0, 1]]}, "structure.g"),
        ({"xi": None}, "structure.xi"),
    ],
)
def test_inline_structure_errors(patch, field):
    spec = json.loads((SCENARIOS[0].parent / "inline-cokahler.json").read_text())["structure"]
    spec.update(patch)
    if patch.get("xi", 0) is None:
        del spec["xi"]
    with pytest.raises(ScenarioError) as info:
        build_structure(spec)
    assert info.value.field == field


def test_json_syntax_error_reports_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "verify",\n  "sampling": {"seed": 1,}}')
    with pytest.raises(ScenarioError, match="line 2"):
        load_scenario(bad)
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(tmp_path / "missing.json")


def test_seed_precedence(monkeypatch):
    monkeypatch.delenv("COSYM_SEED", raising=False)
    assert effective_seed(3) == 3
    monkeypatch.setenv("COSYM_SEED", "11")
    assert effective_seed(3) == 11
    assert effective_seed(3, 5) == 5
    monkeypatch.setenv("COSYM_SEED", "eleven")
    with pytest.raises(ScenarioError, match="COSYM_SEED"):
        effective_seed(3)


def test_inline_system_matches_builtin_oscillator():
    from cosym.dynamics import harmonic_oscillator
    from cosym.structures import reeb_vector

    s = build_system({"dof": 1, "H": "0.5*(p1^2 + q1^2)"})
    ref = harmonic_oscillator()
    x = np.array([0.3, -0.6, 0.1])
    assert np.allclose(reeb_vector(s.cosym, x), reeb_vector(ref.cosym, x), atol=1e-12)

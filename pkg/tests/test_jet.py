import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cosym import jet

reals = st.floats(-2.0, 2.0, allow_nan=False)


def _d(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


@pytest.mark.parametrize(
    "jf, nf, lo, hi",
    [
        (jet.sin, math.sin, -3, 3),
        (jet.cos, math.cos, -3, 3),
        (jet.tan, math.tan, -1.2, 1.2),
        (jet.exp, math.exp, -2, 2),
        (jet.log, math.log, 0.1, 4),
        (jet.sqrt, math.sqrt, 0.1, 4),
        (jet.tanh, math.tanh, -3, 3),
        (jet.arccos, math.acos, -0.9, 0.9),
    ],
)
def test_unary_derivatives_match_differences(jf, nf, lo, hi):
    for x in np.linspace(lo, hi, 7):
        j = jf(jet.Jet(x, np.array([1.0])))
        assert j.value == pytest.approx(nf(x), abs=1e-14)
        assert j.partials[0] == pytest.approx(_d(nf, x), rel=1e-6, abs=1e-8)


@given(reals, reals, st.floats(0.5, 2.0))
def test_arithmetic_rules(a, b, c):
    x, y = jet.seed([a, b])
    z = (x * y - x / c + 3.0) * x + y ** 2 - 2.0 / (c + y * y)
    # d/dx and d/dy by hand
    dx = 2 * a * b - 2 * a / c + 3.0
    dy = a * a + 2 * b + 2.0 * 2 * b / (c + b * b) ** 2
    assert z.partials == pytest.approx([dx, dy], rel=1e-10, abs=1e-10)


@given(reals, reals)
def test_arctan2_gradient(y0, x0):
    if x0 * x0 + y0 * y0 < 1e-3:
        return
    y, x = jet.seed([y0, x0])
    r = jet.arctan2(y, x)
    r2 = x0 * x0 + y0 * y0
    assert r.value == pytest.approx(math.atan2(y0, x0))
    assert r.partials == pytest.approx([x0 / r2, -y0 / r2])


def test_jet_times_array_broadcasts():
    x = jet.Jet(2.0, np.array([1.0, 0.0]))
    out = x * np.array([1.0, 3.0])
    assert out.dtype == object and out[1].value == 6.0 and list(out[1].partials) == [3.0, 0.0]
    vals, parts = jet.split(np.array([1.0, 3.0]) - x, 2)
    assert vals.tolist() == [-1.0, 1.0] and parts[:, 0].tolist() == [-1.0, -1.0]


def test_split_mixes_constants_and_jets():
    x, y = jet.seed([1.0, 2.0])
    vals, parts = jet.split([[x * y, 5.0], [0.0, y]], 2)
    assert vals.tolist() == [[2.0, 5.0], [0.0, 2.0]]
    assert parts[0, 0].tolist() == [2.0, 1.0] and parts[0, 1].tolist() == [0.0, 0.0]


@pytest.mark.parametrize("f", [jet.sqrt, lambda v: jet.arccos(v + 1.0)])
def test_non_differentiable_points_raise(f):
    with pytest.raises(ZeroDivisionError):
        f(jet.Jet(0.0, np.array([1.0])))

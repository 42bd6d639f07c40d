"""Nonlinear test fields on a 3-dim box shared by the operator tests."""

import numpy as np

from cosym import jet
from cosym.geometry import Chart, EndoField, KForm, MetricField, VectorField

CHART = Chart.box("box3", [("x", -1, 1), ("y", -1, 1), ("z", -1, 1)])


def _one(x):
    return np.array([jet.sin(x[1]) * x[2], x[0] * x[0] * jet.exp(-x[2]), jet.cos(x[0] * x[1])], dtype=object)


def _two(x):
    a, b, c = x[0] * x[1] * x[2], jet.sin(x[2]) + x[0] * x[1], jet.exp(x[1] * 0.5) * x[2] + x[0] * x[0]
    return np.array([[0.0 * a, a, b], [-a, 0.0 * a, c], [-b, -c, 0.0 * a]], dtype=object)


def _metric(x):
    xy = 0.3 * x[0] * x[1]
    return np.array(
        [[1.0 + x[0] * x[0], xy, 0.0 * xy], [xy, jet.exp(x[1]), 0.1 * x[2]], [0.0 * xy, 0.1 * x[2], 2.0 + jet.sin(x[2])]],
        dtype=object,
    )


def _endo(x):
    c, s = jet.cos(x[2]), jet.sin(x[2])
    return np.array([[x[0] * s, -c, 0.2 * x[1]], [c, s, x[0]], [x[1] * x[2], 0.0 * c, 1.0 + 0.0 * c]], dtype=object)


def _vector(x):
    return np.array([x[1] * x[2], jet.sin(x[0]), x[0] * x[0] - x[2]], dtype=object)


ALPHA = KForm(CHART, 1, _one, name="alpha")
BETA = KForm(CHART, 2, _two, name="beta")
METRIC = MetricField(CHART, _metric, name="g")
ENDO = EndoField(CHART, _endo, name="phi")
VECTOR = VectorField(CHART, _vector, name="X")

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("cosym", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("cosym")


def central_difference(f, p, h=1e-6):
    """Independent finite-difference oracle: D[..., l] = df/dx_l."""
    p = np.asarray(p, dtype=float)
    base = np.asarray(f(p), dtype=float)
    out = np.empty(base.shape + (p.size,))
    for l in range(p.size):
        e = np.zeros_like(p)
        e[l] = h
        out[..., l] = (np.asarray(f(p + e), dtype=float) - np.asarray(f(p - e), dtype=float)) / (2 * h)
    return out


@pytest.fixture
def fd():
    return central_difference


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "CRITERIA_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

"""Verification and comparison reports with deterministic JSON output."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

SCHEMA_VERSION = 1


@dataclass
class Tolerances:
    """Default residual budgets by numeric layer."""

    algebraic: float = 1e-10
    jet: float = 1e-8
    fd: float = 1e-4
    nondegeneracy: float = 1e-10

    def derivative(self, *fields) -> float:
        return self.jet if all(getattr(f, "jet", True) for f in fields) else self.fd

    @classmethod
    def from_dict(cls, data: dict | None) -> "Tolerances":
        data = dict(data or {})
        unknown = set(data) - {"algebraic", "jet", "fd", "nondegeneracy"}
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        for key, value in data.items():
            if not float(value) > 0:
                raise ValueError(f"tolerance {key!r} must be positive")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass
class CheckResult:
    """Residual statistics of one check over a sample set.

    ``bound="max"`` checks pass when the largest residual is at most the
    tolerance; ``bound="min"`` checks (nondegeneracy) pass when the smallest
    value exceeds it.
    """

    check_name: str
    samples: int
    value: float
    tolerance: float
    worst_point: list | None = None
    bound: str = "max"
    flagged: list = field(default_factory=list)
    degenerate: bool = False

    @property
    def passed(self) -> bool:
        if self.degenerate:
            return True
        if not math.isfinite(self.value):
            return False
        if self.bound == "max":
            return self.value <= self.tolerance
        return self.value > self.tolerance

    def to_dict(self) -> dict:
        out = {"check_name": self.check_name, "samples": self.samples}
        out["max_residual" if self.bound == "max" else "min_value"] = self.value
        out["tolerance"] = self.tolerance
        out["pass"] = self.passed
        out["worst_point"] = self.worst_point
        if self.flagged:
            out["flagged"] = self.flagged
        if self.degenerate:
            out["degenerate"] = True
        return out


class ResidualAccumulator:
    """Collects per-point residuals and remembers the worst offender."""

    def __init__(self, name: str, tolerance: float, bound: str = "max"):
        self.name = name
        self.tolerance = tolerance
        self.bound = bound
        self.count = 0
        self.worst = -math.inf if bound == "max" else math.inf
        self.worst_point = None
        self.flagged: list = []

    def add(self, residual, point):
        r = float(residual)
        self.count += 1
        worse = r > self.worst if self.bound == "max" else r < self.worst
        if worse or (math.isnan(r) and not math.isnan(self.worst)):
            self.worst = r
            self.worst_point = [float(v) for v in np.ravel(point)]

    def flag(self, point, reason: str):
        self.flagged.append({"point": [float(v) for v in np.ravel(point)], "reason": reason})

    def result(self) -> CheckResult:
        value = self.worst
        if self.count == 0:
            value = 0.0 if self.bound == "max" else math.inf
        return CheckResult(
            self.name, self.count, value, self.tolerance, self.worst_point, self.bound, list(self.flagged)
        )


@dataclass
class VerificationReport:
    name: str
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, check_name: str) -> CheckResult:
        for c in self.checks:
            if c.check_name == check_name:
                return c
        raise KeyError(check_name)

    def __contains__(self, check_name: str) -> bool:
        return any(c.check_name == check_name for c in self.checks)

    def add(self, check: CheckResult):
        self.checks.append(check)
        return check

    def extend(self, other: "VerificationReport", prefix: str = ""):
        for c in other.checks:
            c = CheckResult(**{**c.__dict__})
            c.check_name = prefix + c.check_name
            self.checks.append(c)

    def failures(self) -> list:
        return [c.check_name for c in self.checks if not c.passed]

    def max_residual(self, prefix: str = "") -> float:
        vals = [c.value for c in self.checks if c.bound == "max" and c.check_name.startswith(prefix)]
        return max(vals) if vals else 0.0

    def to_dict(self) -> dict:
        out = {"name": self.name, "pass": self.passed}
        if self.degenerate:
            out["degenerate"] = True
        if self.meta:
            out["meta"] = self.meta
        out["checks"] = [c.to_dict() for c in self.checks]
        return out


@dataclass
class ComparisonReport:
    """Componentwise comparison of one tensor computed along two paths."""

    path_a: str
    path_b: str
    tensor: str
    grid_size: int
    max_abs_deviation: float
    tolerance: float
    worst_point: list | None = None

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_abs_deviation) and self.max_abs_deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "path_a": self.path_a,
            "path_b": self.path_b,
            "tensor": self.tensor,
            "grid_size": self.grid_size,
            "max_abs_deviation": self.max_abs_deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "worst_point": self.worst_point,
        }


def compare_tensors(path_a, path_b, tensor, grid: Iterable, fa, fb, tolerance) -> ComparisonReport:
    worst, worst_pt, n = 0.0, None, 0
    for x in grid:
        n += 1
        dev = float(np.max(np.abs(np.asarray(fa(x)) - np.asarray(fb(x))), initial=0.0))
        if dev > worst or worst_pt is None:
            worst, worst_pt = max(dev, worst), [float(v) for v in x]
    return ComparisonReport(path_a, path_b, tensor, n, worst, tolerance, worst_pt)


# ---------------------------------------------------------------------------
# serialization


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return '"NaN"'
        if math.isinf(v):
            return '"Infinity"' if v > 0 else '"-Infinity"'
        return format(v, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if hasattr(obj, "to_dict"):
        return _encode(obj.to_dict())
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj)


def envelope(kind: str, body: dict) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": kind, **body}

"""First-order jets (multivariate dual numbers).

A :class:`Jet` carries a value together with its gradient with respect to the
coordinates of one chart.  Field evaluators written with the arithmetic
operators and the functions in this module (``sin``, ``cos``, ...) accept
either float arrays or arrays of jets, so one evaluator yields both the
components of a tensor and their first partial derivatives.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Jet",
    "seed",
    "split",
    "sin",
    "cos",
    "tan",
    "exp",
    "log",
    "sqrt",
    "arccos",
    "arctan2",
    "tanh",
]


class Jet:
    __slots__ = ("value", "partials")
    # Keep numpy scalars from swallowing jets in mixed expressions.
    __array_ufunc__ = None

    def __init__(self, value, partials):
        self.value = float(value)
        self.partials = partials

    @classmethod
    def constant(cls, value, dim):
        return cls(value, np.zeros(dim))

    def __repr__(self):
        return f"Jet({self.value!r}, {self.partials!r})"

    def _boxed(self):
        box = np.empty((), dtype=object)
        box[()] = self
        return box

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return self._boxed() + other
        if isinstance(other, Jet):
            return Jet(self.value + other.value, self.partials + other.partials)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.value + other, self.partials)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return self._boxed() - other
        if isinstance(other, Jet):
            return Jet(self.value - other.value, self.partials - other.partials)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.value - other, self.partials)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, np.ndarray):
            return other - self._boxed()
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(other - self.value, -self.partials)
        return NotImplemented

    def __neg__(self):
        return Jet(-self.value, -self.partials)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return self._boxed() * other
        if isinstance(other, Jet):
            return Jet(
                self.value * other.value,
                self.value * other.partials + other.value * self.partials,
            )
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.value * other, self.partials * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return self._boxed() / other
        if isinstance(other, Jet):
            if other.value == 0.0:
                raise ZeroDivisionError("jet division by a jet with zero value")
            inv = 1.0 / other.value
            return Jet(
                self.value * inv,
                (self.partials - self.value * inv * other.partials) * inv,
            )
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.value / other, self.partials / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, np.ndarray):
            return other / self._boxed()
        if isinstance(other, (int, float, np.floating, np.integer)):
            if self.value == 0.0:
                raise ZeroDivisionError("division by a jet with zero value")
            return Jet(other / self.value, -other / self.value**2 * self.partials)
        return NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return exp(exponent * log(self))
        if isinstance(exponent, (int, np.integer)) or float(exponent).is_integer():
            n = int(exponent)
            if n == 0:
                return Jet(1.0, np.zeros_like(self.partials))
            return Jet(self.value**n, n * self.value ** (n - 1) * self.partials)
        return Jet(
            self.value**exponent,
            exponent * self.value ** (exponent - 1) * self.partials,
        )

    def __rpow__(self, base):
        return exp(self * math.log(base))

    # Comparisons act on the value; needed for branch choices in evaluators.
    def __lt__(self, other):
        return self.value < _val(other)

    def __le__(self, other):
        return self.value <= _val(other)

    def __gt__(self, other):
        return self.value > _val(other)

    def __ge__(self, other):
        return self.value >= _val(other)

    def __float__(self):
        return self.value

    def __abs__(self):
        return -self if self.value < 0 else self


def _val(x):
    return x.value if isinstance(x, Jet) else x


def seed(point) -> np.ndarray:
    """Object array of jets seeded with the identity gradient at ``point``."""
    point = np.asarray(point, dtype=float)
    n = point.shape[0]
    eye = np.eye(n)
    out = np.empty(n, dtype=object)
    for i in range(n):
        out[i] = Jet(point[i], eye[i])
    return out


def split(result, dim: int):
    """Separate an evaluator result into float values and partials.

    ``result`` may be a scalar, a nested sequence, or an array mixing plain
    numbers (constants) and jets.  Returns ``(values, partials)`` where
    ``partials`` has one trailing axis of length ``dim``.
    """
    arr = np.asarray(result, dtype=object)
    values = np.empty(arr.shape, dtype=float)
    partials = np.zeros(arr.shape + (dim,), dtype=float)
    for idx in np.ndindex(arr.shape):
        entry = arr[idx]
        if isinstance(entry, Jet):
            values[idx] = entry.value
            partials[idx] = entry.partials
        else:
            values[idx] = float(entry)
    return values, partials


def sin(x):
    if isinstance(x, Jet):
        return Jet(math.sin(x.value), math.cos(x.value) * x.partials)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return Jet(math.cos(x.value), -math.sin(x.value) * x.partials)
    return np.cos(x)


def tan(x):
    if isinstance(x, Jet):
        c = math.cos(x.value)
        return Jet(math.tan(x.value), x.partials / (c * c))
    return np.tan(x)


def exp(x):
    if isinstance(x, Jet):
        e = math.exp(x.value)
        return Jet(e, e * x.partials)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        return Jet(math.log(x.value), x.partials / x.value)
    return np.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        r = math.sqrt(x.value)
        if r == 0.0:
            raise ZeroDivisionError("sqrt jet is not differentiable at 0")
        return Jet(r, x.partials / (2.0 * r))
    return np.sqrt(x)


def tanh(x):
    if isinstance(x, Jet):
        t = math.tanh(x.value)
        return Jet(t, (1.0 - t * t) * x.partials)
    return np.tanh(x)


def arccos(x):
    if isinstance(x, Jet):
        v = min(1.0, max(-1.0, x.value))
        s = math.sqrt(1.0 - v * v)
        if s == 0.0:
            raise ZeroDivisionError("arccos jet is not differentiable at +-1")
        return Jet(math.acos(v), -x.partials / s)
    return np.arccos(np.clip(x, -1.0, 1.0))


def arctan2(y, x):
    if isinstance(y, Jet) or isinstance(x, Jet):
        yv, xv = _val(y), _val(x)
        r2 = xv * xv + yv * yv
        n = y.partials.shape[0] if isinstance(y, Jet) else x.partials.shape[0]
        dy = y.partials if isinstance(y, Jet) else np.zeros(n)
        dx = x.partials if isinstance(x, Jet) else np.zeros(n)
        return Jet(math.atan2(yv, xv), (xv * dy - yv * dx) / r2)
    return np.arctan2(y, x)

"""Arithmetic expressions for inline scenario coefficients.

Grammar: numbers, coordinate names, ``pi``, ``e``, ``+ - * /``, ``^`` or
``**`` for powers, parentheses, and the functions below.  Expressions are
parsed with :mod:`ast` and anything outside the whitelist is rejected, so
scenario files never reach ``eval``.
"""

from __future__ import annotations

import ast
import math

from . import jet

FUNCTIONS = {
    "sin": jet.sin,
    "cos": jet.cos,
    "tan": jet.tan,
    "exp": jet.exp,
    "log": jet.log,
    "sqrt": jet.sqrt,
    "tanh": jet.tanh,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


class ExpressionError(ValueError):
    pass


class Expression:
    """A compiled expression in the given variables; callable on a point
    (floats or jets) indexed like ``variables``."""

    def __init__(self, source, variables):
        self.source = str(source)
        self.variables = tuple(variables)
        clash = set(self.variables) & (set(FUNCTIONS) | set(CONSTANTS))
        if clash:
            raise ExpressionError(f"coordinate names shadow built-ins: {sorted(clash)}")
        try:
            # ``^`` is XOR in Python with the wrong precedence; read it as a power
            tree = ast.parse(self.source.strip().replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.source!r}: {exc.msg} at column {exc.offset}") from None
        self._index = {name: i for i, name in enumerate(self.variables)}
        self._check(tree.body)
        self._tree = tree.body

    def _fail(self, node, what):
        col = getattr(node, "col_offset", 0) + 1
        raise ExpressionError(f"{what} in {self.source!r} at column {col}")

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                self._fail(node, "non-numeric literal")
        elif isinstance(node, ast.Name):
            if node.id not in self._index and node.id not in CONSTANTS:
                self._fail(node, f"unknown name {node.id!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                self._fail(node, "unsupported operator")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.UAdd, ast.USub)):
                self._fail(node, "unsupported unary operator")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                self._fail(node, "unknown function")
            if len(node.args) != 1 or node.keywords:
                self._fail(node, f"{node.func.id} takes exactly one argument")
            self._check(node.args[0])
        else:
            self._fail(node, f"unsupported syntax {type(node).__name__}")

    def _eval(self, node, x):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            i = self._index.get(node.id)
            return CONSTANTS[node.id] if i is None else x[i]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, x), self._eval(node.right, x))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, x)
            return -v if isinstance(node.op, ast.USub) else v
        return FUNCTIONS[node.func.id](self._eval(node.args[0], x))

    def __call__(self, x):
        return self._eval(self._tree, x)

    def __repr__(self):
        return f"Expression({self.source!r})"


def compile_array(entries, variables):
    """Nested lists of numbers/strings -> evaluator returning an object array."""
    import numpy as np

    def build(e):
        if isinstance(e, list):
            return [build(v) for v in e]
        if isinstance(e, (int, float)) and not isinstance(e, bool):
            return float(e)
        if isinstance(e, str):
            return Expression(e, variables)
        raise ExpressionError(f"entry {e!r} is neither a number nor an expression")

    compiled = build(entries)

    def ev(x):
        def go(c):
            if isinstance(c, list):
                return [go(v) for v in c]
            return c(x) if isinstance(c, Expression) else c + 0.0 * x[0]

        return np.array(go(compiled), dtype=object)

    return ev

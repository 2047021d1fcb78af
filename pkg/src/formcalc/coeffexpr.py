"""A fixed small grammar for coefficient rules over x.

Problem definitions carry coefficients as expression strings.  The
grammar is deliberately tiny: +, -, *, /, ^ (also **), exp, sin, cos,
numeric literals, pi and the variable x.  Parsing goes through the ast
module with a whitelist; anything else is rejected.
"""

from __future__ import annotations

import ast
import math
from typing import Callable

import numpy as np

_ALLOWED_CALLS = {"exp": np.exp, "sin": np.sin, "cos": np.cos}
_ALLOWED_NAMES = {"pi": math.pi, "x": None}


class ExpressionError(ValueError):
    pass


def _check(node: ast.AST):
    if isinstance(node, ast.Expression):
        _check(node.body)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
            raise ExpressionError("operator outside the grammar")
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.UAdd, ast.USub)):
            raise ExpressionError("unary operator outside the grammar")
        _check(node.operand)
    elif isinstance(node, ast.Call):
        if (not isinstance(node.func, ast.Name)
                or node.func.id not in _ALLOWED_CALLS
                or len(node.args) != 1 or node.keywords):
            raise ExpressionError("call outside the grammar")
        _check(node.args[0])
    elif isinstance(node, ast.Name):
        if node.id not in _ALLOWED_NAMES:
            raise ExpressionError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError("only numeric literals allowed")
    else:
        raise ExpressionError(f"syntax outside the grammar: {type(node).__name__}")


def compile_rule(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression string to a vectorized function of x."""
    src = text.replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}") from exc
    _check(tree)
    code = compile(tree, "<coefficient-rule>", "eval")
    env = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "pi": math.pi,
           "__builtins__": {}}

    def fn(x):
        x = np.asarray(x, dtype=float)
        out = eval(code, env, {"x": x})
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()

    return fn

"""
Small arithmetic expression grammar for coefficients and forcing terms.

Accepted: numbers, the named variables, pi, + - * / with unary minus and
parentheses, and calls to sin, cos, exp. Expressions are parsed once with `ast`
and evaluated with numpy so they work on whole coordinate arrays.
"""

import ast
import logging
from typing import Callable, Sequence

import numpy as np

from tools.errors import ConfigError

logger = logging.getLogger(__name__)

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_CONSTANTS = {"pi": np.pi}
_BINARY = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}


def _compile(node: ast.AST, variables: frozenset) -> Callable[[dict], np.ndarray]:
    if isinstance(node, ast.Expression):
        return _compile(node.body, variables)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        value = float(node.value)
        return lambda env: value
    if isinstance(node, ast.Name):
        if node.id in variables:
            name = node.id
            return lambda env: env[name]
        if node.id in _CONSTANTS:
            value = _CONSTANTS[node.id]
            return lambda env: value
        raise ConfigError(f"Unknown name '{node.id}' in expression")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        operand = _compile(node.operand, variables)
        if isinstance(node.op, ast.USub):
            return lambda env: np.negative(operand(env))
        return operand
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        op = _BINARY[type(node.op)]
        left, right = _compile(node.left, variables), _compile(node.right, variables)
        return lambda env: op(left(env), right(env))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCTIONS
            and len(node.args) == 1 and not node.keywords):
        func = _FUNCTIONS[node.func.id]
        arg = _compile(node.args[0], variables)
        return lambda env: func(arg(env))
    raise ConfigError(f"Unsupported syntax in expression: {ast.dump(node)[:60]}")


def compile_expression(text: str, variables: Sequence[str] = ("x1", "x2")) -> Callable[..., np.ndarray]:
    """
    Compile text into a vectorized function of the named variables

    Raises:
        ConfigError: On syntax outside the grammar
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as e:
        raise ConfigError(f"Cannot parse expression '{text}': {e.msg}") from e
    evaluate = _compile(tree, frozenset(variables))
    names = tuple(variables)

    def expression(*args) -> np.ndarray:
        env = dict(zip(names, args))
        shape = np.broadcast(*[np.asarray(a) for a in args]).shape if args else ()
        return np.broadcast_to(np.asarray(evaluate(env), dtype=np.float64), shape).copy()

    return expression

"""Immutable symbolic expression kernel.

Construction helpers, canonical normalization, differentiation, substitution,
high-precision numeric evaluation and textual serialization for the closed
expression class used by the solvable-equation generator.
"""

from .nodes import (
    Expr,
    FunctionApp,
    Integer,
    Parameter,
    Power,
    Product,
    Rational,
    SquareRoot,
    Sum,
    UnevaluatedIntegral,
    Variable,
    as_expr,
    const_fraction,
    contains,
    cos,
    cosh,
    cot,
    coth,
    exp,
    free_symbols,
    integer,
    integral,
    param,
    rational,
    sin,
    sinh,
    sqrt,
    tan,
    tanh,
    x,
)
from .normal import is_zero, normalize, substitute, to_frac
from .calculus import differentiate
from .numeric import eval_numeric, eval_with_error
from .serialize import parse_prefix, to_latex, to_prefix, to_text

__all__ = [
    "Expr",
    "FunctionApp",
    "Integer",
    "Parameter",
    "Power",
    "Product",
    "Rational",
    "SquareRoot",
    "Sum",
    "UnevaluatedIntegral",
    "Variable",
    "as_expr",
    "const_fraction",
    "contains",
    "cos",
    "cosh",
    "cot",
    "coth",
    "differentiate",
    "eval_numeric",
    "eval_with_error",
    "exp",
    "free_symbols",
    "integer",
    "integral",
    "is_zero",
    "normalize",
    "param",
    "parse_prefix",
    "rational",
    "sin",
    "sinh",
    "sqrt",
    "substitute",
    "tan",
    "tanh",
    "to_frac",
    "to_latex",
    "to_prefix",
    "to_text",
    "x",
]

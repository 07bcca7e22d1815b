"""Syntactic differentiation over the kernel class."""

from __future__ import annotations

from ..errors import UnsupportedExpressionError
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
    rational,
    x,
)
from .normal import normalize

_ZERO = Integer(0)
_ONE = Integer(1)


def differentiate(e: Expr, var: Variable = x) -> Expr:
    """Derivative of e with respect to var, in normal form."""
    return normalize(_d(as_expr(e), var))


def _d(e: Expr, v: Variable) -> Expr:
    if isinstance(e, (Integer, Rational, Parameter)):
        return _ZERO
    if isinstance(e, Variable):
        return _ONE if e == v else _ZERO
    if isinstance(e, Sum):
        return Sum(tuple(_d(t, v) for t in e.terms))
    if isinstance(e, Product):
        terms = []
        fs = e.factors
        for i, f in enumerate(fs):
            terms.append(Product(fs[:i] + (_d(f, v),) + fs[i + 1:]))
        return Sum(tuple(terms))
    if isinstance(e, Power):
        q = const_fraction(normalize(e.exponent))
        if q is None:
            raise UnsupportedExpressionError(
                "cannot differentiate a power with non-constant exponent"
            )
        if q == 0:
            return _ZERO
        return Product((rational(q), Power(e.base, rational(q - 1)), _d(e.base, v)))
    if isinstance(e, SquareRoot):
        # d sqrt(u) = u' / (2 sqrt(u))
        return Product(
            (Rational(1, 2), Power(SquareRoot(e.arg), Integer(-1)), _d(e.arg, v))
        )
    if isinstance(e, FunctionApp):
        inner = _d(e.arg, v)
        u = e.arg
        if e.kind == "exp":
            outer = e
        elif e.kind == "sin":
            outer = FunctionApp("cos", u)
        elif e.kind == "cos":
            outer = Product((Integer(-1), FunctionApp("sin", u)))
        elif e.kind == "sinh":
            outer = FunctionApp("cosh", u)
        else:  # cosh
            outer = FunctionApp("sinh", u)
        return Product((outer, inner))
    if isinstance(e, UnevaluatedIntegral):
        if e.var == v:
            return e.integrand
        if not contains(e.integrand, v):
            return _ZERO
        raise UnsupportedExpressionError(
            "cannot differentiate an integral with respect to a free parameter"
        )
    raise UnsupportedExpressionError(f"unsupported node kind {type(e).__name__}")

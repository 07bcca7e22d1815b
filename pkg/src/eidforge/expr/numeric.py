"""High-precision numeric evaluation (the verification oracle's foundation).

Evaluation is deterministic for a fixed working precision.  Unevaluated
integrals are resolved by adaptive quadrature from a configurable base point;
the arbitrary additive constant this introduces is absorbed by the solution
constants at the assembly layer, so residual checks are unaffected.
"""

from __future__ import annotations

import os
from fractions import Fraction

import mpmath as mp

from ..errors import EvaluationError, PoleError
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
    const_fraction,
)

DEFAULT_PRECISION_BITS = 64


def working_precision() -> int:
    """Default precision in bits; EIDFORGE_PRECISION overrides."""
    env = os.environ.get("EIDFORGE_PRECISION")
    if env:
        try:
            return max(32, int(env))
        except ValueError:
            pass
    return DEFAULT_PRECISION_BITS


def _to_name(sym) -> str:
    if isinstance(sym, (Variable, Parameter)):
        return sym.name
    return str(sym)


class Evaluator:
    """Reusable evaluator; caches quadrature results across points."""

    def __init__(self, bindings: dict, precision: int | None = None,
                 integral_base=1.0):
        self.bindings = {_to_name(k): v for k, v in bindings.items()}
        self.precision = precision or working_precision()
        self.integral_base = integral_base
        self._quad_cache: dict = {}

    def __call__(self, e: Expr):
        with mp.workprec(self.precision + 20):
            val = self._eval(e)
        with mp.workprec(self.precision):
            return +val

    def _bind(self, name, subexpr):
        try:
            v = self.bindings[name]
        except KeyError:
            raise EvaluationError(f"unbound symbol {name!r}") from None
        if isinstance(v, Fraction):
            return mp.mpf(v.numerator) / v.denominator
        return mp.mpf(v)

    def _eval(self, e: Expr):
        if isinstance(e, Integer):
            return mp.mpf(e.value)
        if isinstance(e, Rational):
            return mp.mpf(e.num) / e.den
        if isinstance(e, (Variable, Parameter)):
            return self._bind(e.name, e)
        if isinstance(e, Sum):
            return mp.fsum(self._eval(t) for t in e.terms)
        if isinstance(e, Product):
            out = mp.mpf(1)
            for f in e.factors:
                out *= self._eval(f)
            return out
        if isinstance(e, Power):
            q = const_fraction(e.exponent)
            base = self._eval(e.base)
            if q is None:
                expo = self._eval(e.exponent)
            else:
                expo = q
            if (q is None or q < 0) and abs(base) < mp.mpf(2) ** (-self.precision):
                raise PoleError("denominator vanishes at evaluation point", e.base)
            if q is not None and q.denominator == 1:
                return base ** q.numerator
            if base < 0:
                raise EvaluationError(
                    "fractional power of a negative value is not real"
                )
            return mp.power(base, mp.mpf(expo.numerator) / expo.denominator
                            if q is not None else expo)
        if isinstance(e, SquareRoot):
            v = self._eval(e.arg)
            if v < 0:
                raise EvaluationError("negative radicand; check sign context")
            return mp.sqrt(v)
        if isinstance(e, FunctionApp):
            v = self._eval(e.arg)
            if e.kind in ("sin", "cos") and mp.mag(v) > self.precision + 32:
                raise EvaluationError(
                    "trigonometric argument too large for reliable evaluation"
                )
            return getattr(mp, e.kind)(v)
        if isinstance(e, UnevaluatedIntegral):
            return self._integral(e)
        raise EvaluationError(f"cannot evaluate node kind {type(e).__name__}")

    def _integral(self, e: UnevaluatedIntegral):
        var = e.var.name
        upper = self.bindings.get(var)
        if upper is None:
            raise EvaluationError(f"unbound integration variable {var!r}")
        upper = mp.mpf(upper) if not isinstance(upper, Fraction) else (
            mp.mpf(upper.numerator) / upper.denominator)
        key = e.sort_key()
        cached = self._quad_cache.get(key)
        outer = self.bindings.get(var)

        def integrand(t):
            self.bindings[var] = t
            try:
                return self._eval(e.integrand)
            finally:
                self.bindings[var] = outer

        if cached is None:
            base = mp.mpf(self.integral_base)
            val = mp.quad(integrand, [base, upper])
            self._quad_cache[key] = (upper, val)
            return val
        prev_x, prev_val = cached
        if upper == prev_x:
            return prev_val
        val = prev_val + mp.quad(integrand, [prev_x, upper])
        self._quad_cache[key] = (upper, val)
        return val


def eval_numeric(e: Expr, point: dict, precision: int | None = None,
                 integral_base=1.0):
    """Evaluate with every free symbol bound; returns an mpf."""
    return Evaluator(point, precision, integral_base)(e)


def eval_with_error(e: Expr, point: dict, precision: int | None = None,
                    integral_base=1.0):
    """Value plus a crude error bound from re-evaluation at doubled precision."""
    precision = precision or working_precision()
    v1 = Evaluator(point, precision, integral_base)(e)
    v2 = Evaluator(point, 2 * precision, integral_base)(e)
    return v2, abs(v2 - v1)

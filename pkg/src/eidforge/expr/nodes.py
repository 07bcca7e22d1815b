"""Immutable expression tree nodes.

The kernel is deliberately closed: rationals, one independent variable,
named parameters, sums, products, powers, the five transcendental kernels
exp/sin/cos/sinh/cosh, square roots, and unevaluated integrals.  Everything
else (tan, sec, logs, ...) must be expressed through these.

Trees built with the helper constructors or operators are *raw*: cheap to
build, not canonical.  `eidforge.expr.normalize` turns any tree into the
canonical normal form; structural equality of normal forms is the kernel's
notion of mathematical equality.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import UnsupportedExpressionError

FUNCTION_KINDS = ("exp", "sin", "cos", "sinh", "cosh")


class Expr:
    """Base class; all nodes are immutable and hashable."""

    __slots__ = ("_hash", "_key")

    def _init_cache(self):
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("expression nodes are immutable")

    # -- ordering / identity ------------------------------------------------

    def sort_key(self):
        """Total order key: (kind rank, payload...), recursively comparable."""
        if self._key is None:
            object.__setattr__(self, "_key", self._make_key())
        return self._key

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.sort_key()))
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self.sort_key() == other.sort_key()

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    # -- arithmetic sugar ---------------------------------------------------

    def __add__(self, other):
        return Sum((self, as_expr(other)))

    def __radd__(self, other):
        return Sum((as_expr(other), self))

    def __sub__(self, other):
        return Sum((self, Product((INT_NEG_ONE, as_expr(other)))))

    def __rsub__(self, other):
        return Sum((as_expr(other), Product((INT_NEG_ONE, self))))

    def __mul__(self, other):
        return Product((self, as_expr(other)))

    def __rmul__(self, other):
        return Product((as_expr(other), self))

    def __truediv__(self, other):
        return Product((self, Power(as_expr(other), INT_NEG_ONE)))

    def __rtruediv__(self, other):
        return Product((as_expr(other), Power(self, INT_NEG_ONE)))

    def __pow__(self, other):
        return Power(self, as_expr(other))

    def __neg__(self):
        return Product((INT_NEG_ONE, self))

    def __repr__(self):
        from .serialize import to_prefix

        return f"Expr({to_prefix(self)})"

    def children(self):
        return ()


class Integer(Expr):
    __slots__ = ("value",)

    def __init__(self, value: int):
        if not isinstance(value, int):
            raise UnsupportedExpressionError(f"Integer needs an int, got {value!r}")
        object.__setattr__(self, "value", value)
        self._init_cache()

    def _make_key(self):
        return (0, self.value)


class Rational(Expr):
    """Exact non-integer rational; always in lowest terms with den > 1."""

    __slots__ = ("num", "den")

    def __init__(self, num: int, den: int):
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        self._init_cache()

    def _make_key(self):
        return (1, self.num, self.den)


class Variable(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str = "x"):
        object.__setattr__(self, "name", name)
        self._init_cache()

    def _make_key(self):
        return (2, self.name)


class Parameter(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._init_cache()

    def _make_key(self):
        return (3, self.name)


class FunctionApp(Expr):
    __slots__ = ("kind", "arg")

    def __init__(self, kind: str, arg: Expr):
        if kind not in FUNCTION_KINDS:
            raise UnsupportedExpressionError(f"unsupported function kind {kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "arg", arg)
        self._init_cache()

    def _make_key(self):
        return (4, self.kind, self.arg.sort_key())

    def children(self):
        return (self.arg,)


class SquareRoot(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        object.__setattr__(self, "arg", arg)
        self._init_cache()

    def _make_key(self):
        return (5, self.arg.sort_key())

    def children(self):
        return (self.arg,)


class UnevaluatedIntegral(Expr):
    """An antiderivative left symbolic: d/dvar of it is the integrand."""

    __slots__ = ("integrand", "var")

    def __init__(self, integrand: Expr, var: Variable):
        if not isinstance(var, Variable):
            raise UnsupportedExpressionError("integral variable must be a Variable")
        object.__setattr__(self, "integrand", integrand)
        object.__setattr__(self, "var", var)
        self._init_cache()

    def _make_key(self):
        return (6, self.integrand.sort_key(), self.var.sort_key())

    def children(self):
        return (self.integrand, self.var)


class Power(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: Expr):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)
        self._init_cache()

    def _make_key(self):
        return (7, self.base.sort_key(), self.exponent.sort_key())

    def children(self):
        return (self.base, self.exponent)


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        object.__setattr__(self, "factors", tuple(factors))
        self._init_cache()

    def _make_key(self):
        return (8, tuple(f.sort_key() for f in self.factors))

    def children(self):
        return self.factors


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        object.__setattr__(self, "terms", tuple(terms))
        self._init_cache()

    def _make_key(self):
        return (9, tuple(t.sort_key() for t in self.terms))

    def children(self):
        return self.terms


# -- helper constructors ----------------------------------------------------


def integer(value: int) -> Expr:
    return Integer(int(value))


def rational(num, den=1) -> Expr:
    """Exact rational from ints or a Fraction; collapses to Integer when whole."""
    f = Fraction(num, den)
    if f.denominator == 1:
        return Integer(f.numerator)
    return Rational(f.numerator, f.denominator)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise UnsupportedExpressionError("booleans are not expressions")
    if isinstance(value, int):
        return Integer(value)
    if isinstance(value, Fraction):
        return rational(value)
    raise UnsupportedExpressionError(f"cannot convert {value!r} to an expression")


def const_fraction(e: Expr):
    """Fraction value of a constant node, or None."""
    if isinstance(e, Integer):
        return Fraction(e.value)
    if isinstance(e, Rational):
        return Fraction(e.num, e.den)
    return None


x = Variable("x")

INT_ZERO = Integer(0)
INT_ONE = Integer(1)
INT_NEG_ONE = Integer(-1)
HALF = Rational(1, 2)


def param(name: str) -> Parameter:
    return Parameter(name)


def sqrt(e) -> Expr:
    return SquareRoot(as_expr(e))


def exp(e) -> Expr:
    return FunctionApp("exp", as_expr(e))


def sin(e) -> Expr:
    return FunctionApp("sin", as_expr(e))


def cos(e) -> Expr:
    return FunctionApp("cos", as_expr(e))


def sinh(e) -> Expr:
    return FunctionApp("sinh", as_expr(e))


def cosh(e) -> Expr:
    return FunctionApp("cosh", as_expr(e))


def tan(e) -> Expr:
    """Display-level tangent: stored as sin/cos."""
    e = as_expr(e)
    return Product((sin(e), Power(cos(e), INT_NEG_ONE)))


def cot(e) -> Expr:
    e = as_expr(e)
    return Product((cos(e), Power(sin(e), INT_NEG_ONE)))


def tanh(e) -> Expr:
    e = as_expr(e)
    return Product((sinh(e), Power(cosh(e), INT_NEG_ONE)))


def coth(e) -> Expr:
    e = as_expr(e)
    return Product((cosh(e), Power(sinh(e), INT_NEG_ONE)))


def integral(integrand, var=x) -> Expr:
    return UnevaluatedIntegral(as_expr(integrand), var)


def free_symbols(e: Expr) -> set:
    """All Variable/Parameter nodes appearing in the tree."""
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, (Variable, Parameter)):
            out.add(node)
        stack.extend(node.children())
    return out


def contains(e: Expr, target: Expr) -> bool:
    stack = [e]
    while stack:
        node = stack.pop()
        if node == target:
            return True
        stack.extend(node.children())
    return False

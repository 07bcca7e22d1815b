"""Textual forms: parenthesized prefix (round-trips), infix text, LaTeX.

Prefix grammar, one expression per line:

    expr   := int | int/int | name | '(' head expr* ')'
    head   := '+' | '*' | '^' | 'sqrt' | 'int' | 'exp' | 'sin' | 'cos'
              | 'sinh' | 'cosh'

``x`` is the independent variable; any other bare name is a parameter.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ParseError
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
    rational,
)

# -- prefix emitter -----------------------------------------------------------


def to_prefix(e: Expr) -> str:
    if isinstance(e, Integer):
        return str(e.value)
    if isinstance(e, Rational):
        return f"{e.num}/{e.den}"
    if isinstance(e, (Variable, Parameter)):
        return e.name
    if isinstance(e, Sum):
        return "(+ " + " ".join(to_prefix(t) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(* " + " ".join(to_prefix(f) for f in e.factors) + ")"
    if isinstance(e, Power):
        return f"(^ {to_prefix(e.base)} {to_prefix(e.exponent)})"
    if isinstance(e, SquareRoot):
        return f"(sqrt {to_prefix(e.arg)})"
    if isinstance(e, FunctionApp):
        return f"({e.kind} {to_prefix(e.arg)})"
    if isinstance(e, UnevaluatedIntegral):
        return f"(int {to_prefix(e.integrand)} {e.var.name})"
    raise ParseError(f"cannot serialize node kind {type(e).__name__}")


# -- prefix parser ------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")
_INT = re.compile(r"^-?\d+$")
_RAT = re.compile(r"^(-?\d+)/(\d+)$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        out.append(m.group(1))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"unexpected input at {text[pos:]!r}")
    return out


def parse_prefix(text: str) -> Expr:
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression text")
    expr, rest = _parse(tokens)
    if rest:
        raise ParseError(f"trailing tokens: {' '.join(rest)}")
    return expr


def _atom_token(tok: str) -> Expr:
    if _INT.match(tok):
        return Integer(int(tok))
    m = _RAT.match(tok)
    if m:
        return rational(Fraction(int(m.group(1)), int(m.group(2))))
    if _NAME.match(tok):
        return Variable(tok) if tok == "x" else Parameter(tok)
    raise ParseError(f"bad token {tok!r}")


def _parse(tokens):
    tok = tokens[0]
    if tok == ")":
        raise ParseError("unexpected ')'")
    if tok != "(":
        return _atom_token(tok), tokens[1:]
    if len(tokens) < 2:
        raise ParseError("unterminated '('")
    head, rest = tokens[1], tokens[2:]
    args = []
    while rest and rest[0] != ")":
        arg, rest = _parse(rest)
        args.append(arg)
    if not rest:
        raise ParseError("missing ')'")
    rest = rest[1:]
    return _apply_head(head, args), rest


def _apply_head(head: str, args) -> Expr:
    if head == "+":
        if not args:
            raise ParseError("empty sum")
        return args[0] if len(args) == 1 else Sum(tuple(args))
    if head == "*":
        if not args:
            raise ParseError("empty product")
        return args[0] if len(args) == 1 else Product(tuple(args))
    if head == "^":
        if len(args) != 2:
            raise ParseError("'^' takes base and exponent")
        return Power(args[0], args[1])
    if head == "sqrt":
        if len(args) != 1:
            raise ParseError("'sqrt' takes one argument")
        return SquareRoot(args[0])
    if head in ("exp", "sin", "cos", "sinh", "cosh"):
        if len(args) != 1:
            raise ParseError(f"{head!r} takes one argument")
        return FunctionApp(head, args[0])
    if head == "int":
        if len(args) != 2 or not isinstance(args[1], Variable):
            raise ParseError("'int' takes integrand and a variable")
        return UnevaluatedIntegral(args[0], args[1])
    raise ParseError(f"unknown operator {head!r}")


# -- infix renderers ------------------------------------------------------------

_GREEK = {
    "lambda": r"\lambda", "alpha": r"\alpha", "beta": r"\beta", "mu": r"\mu",
    "nu": r"\nu", "ell": r"\ell",
}
_SUBSCRIPT = re.compile(r"^([A-Za-z]+)(\d+)$")


def _latex_name(name: str) -> str:
    if name in _GREEK:
        return _GREEK[name]
    m = _SUBSCRIPT.match(name)
    if m:
        return f"{_latex_name(m.group(1))}_{{{m.group(2)}}}"
    if len(name) > 1:
        return rf"\mathrm{{{name}}}"
    return name


def _split_fraction(e: Product):
    num, den = [], []
    for f in e.factors:
        if isinstance(f, Power):
            q = const_fraction(f.exponent)
            if q is not None and q < 0:
                den.append(f.base if q == -1 else Power(f.base, rational(-q)))
                continue
        num.append(f)
    return num, den


class _Renderer:
    """Shared precedence-aware infix rendering for text and LaTeX."""

    latex = False

    def render(self, e: Expr, prec: int = 0) -> str:
        s, p = self._node(e)
        return self.group(s) if p < prec else s

    def _node(self, e: Expr):
        if isinstance(e, Integer):
            return str(e.value), 100 if e.value >= 0 else 5
        if isinstance(e, Rational):
            return self.fraction(str(e.num), str(e.den)), self.frac_prec
        if isinstance(e, (Variable, Parameter)):
            return self.name(e.name), 100
        if isinstance(e, Sum):
            return self.sum(e), 10
        if isinstance(e, Product):
            return self.product(e), 20
        if isinstance(e, Power):
            q = const_fraction(e.exponent)
            if q is not None and q < 0:
                inner = (e.base if q == -1
                         else Power(e.base, rational(-q)))
                return self.fraction("1", self.render(inner, 21)), self.frac_prec
            return self.power(e.base, e.exponent), 30
        if isinstance(e, SquareRoot):
            return self.sqrt(e.arg), 100
        if isinstance(e, FunctionApp):
            return self.func(e.kind, e.arg), 40
        if isinstance(e, UnevaluatedIntegral):
            return self.integral(e), 20
        raise ParseError(f"cannot render node kind {type(e).__name__}")

    def sum(self, e: Sum) -> str:
        parts = []
        for i, t in enumerate(e.terms):
            s = self.render(t, 11)
            if i and not s.startswith("-"):
                parts.append("+ " + s)
            elif i:
                parts.append("- " + s[1:].strip())
            else:
                parts.append(s)
        return " ".join(parts)

    def product(self, e: Product) -> str:
        num, den = _split_fraction(e)
        sign = ""
        if num:
            head = num[0]
            if isinstance(head, Integer) and head.value < 0:
                sign = "-"
                num = num[1:] if head.value == -1 else [Integer(-head.value)] + num[1:]
            elif isinstance(head, Rational) and head.num < 0:
                sign = "-"
                num = [Rational(-head.num, head.den)] + num[1:]
        if den:
            n = self.product(Product(tuple(num))) if num else "1"
            d = self.product(Product(tuple(den)))
            return sign + self.fraction(n, d)
        if not num:
            return sign + "1" if sign else "1"
        if len(num) == 1:
            return sign + self.render(num[0], 20)
        return sign + self.times.join(self.render(f, 21) for f in num)

    def integral(self, e: UnevaluatedIntegral) -> str:
        body = self.render(e.integrand, 11)
        return self.int_fmt.format(body=body, var=e.var.name)


class _TextRenderer(_Renderer):
    times = "*"
    frac_prec = 20
    int_fmt = "integral({body}, {var})"

    def group(self, s):
        return f"({s})"

    def name(self, n):
        return n

    def fraction(self, n, d):
        if " " in d or "*" in d or "/" in d:
            d = f"({d})"
        if " " in n or "/" in n:
            n = f"({n})"
        return f"{n}/{d}"

    def power(self, base, expo):
        return f"{self.render(base, 31)}^{self.render(expo, 31)}"

    def sqrt(self, arg):
        return f"sqrt({self.render(arg)})"

    def func(self, kind, arg):
        return f"{kind}({self.render(arg)})"


class _LatexRenderer(_Renderer):
    latex = True
    times = " "
    frac_prec = 100
    int_fmt = r"\int {body} \, d{var}"

    def group(self, s):
        return rf"\left({s}\right)"

    def name(self, n):
        return _latex_name(n)

    def fraction(self, n, d):
        return rf"\frac{{{n}}}{{{d}}}"

    def power(self, base, expo):
        if isinstance(base, FunctionApp) and base.kind != "exp":
            q = const_fraction(expo)
            if q is not None and q.denominator == 1 and q > 0:
                return (rf"\{base.kind}^{{{q.numerator}}}"
                        rf"{self.group(self.render(base.arg))}")
        return f"{self.render(base, 31)}^{{{self.render(expo)}}}"

    def sqrt(self, arg):
        return rf"\sqrt{{{self.render(arg)}}}"

    def func(self, kind, arg):
        if kind == "exp":
            return rf"e^{{{self.render(arg)}}}"
        return rf"\{kind}{self.group(self.render(arg))}"


def to_text(e: Expr) -> str:
    return _TextRenderer().render(e)


def to_latex(e: Expr) -> str:
    return _LatexRenderer().render(e)

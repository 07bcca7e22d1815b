"""Expression kernel: construction, normalization, calculus, evaluation."""

import math
from fractions import Fraction

import pytest

import mpmath as mp

from eidforge.errors import (
    EvaluationError,
    ParseError,
    PoleError,
    UnsupportedExpressionError,
)
from eidforge.expr import (
    Integer,
    Power,
    Rational,
    cos,
    cosh,
    differentiate,
    eval_numeric,
    eval_with_error,
    exp,
    integer,
    integral,
    is_zero,
    normalize,
    param,
    parse_prefix,
    rational,
    sin,
    sinh,
    sqrt,
    substitute,
    to_latex,
    to_prefix,
    to_text,
    x,
)

l = param("l")
a, b, m, n = param("a"), param("b"), param("m"), param("n")
lam = param("lambda")
c1, c2 = param("c1"), param("c2")


class TestNormalize:
    def test_pythagorean(self):
        assert normalize(sin(x) ** 2 + cos(x) ** 2) == Integer(1)

    def test_hyperbolic_pythagorean(self):
        assert normalize(cosh(x) ** 2 - sinh(x) ** 2) == Integer(1)

    def test_exp_cancellation(self):
        assert normalize(exp(sqrt(l) * x) * exp(-sqrt(l) * x)) == Integer(1)

    def test_exp_combining(self):
        assert normalize(exp(2 * x) * exp(3 * x)) == normalize(exp(5 * x))

    def test_log_derivative_form(self):
        # the second-step log-derivative of the two-step worked chain
        y1 = cos(x) - sin(x) / x
        w = normalize(differentiate(y1) / y1)
        assert w == normalize(-1 / x - x * sin(x) / (x * cos(x) - sin(x)))
        dw = differentiate(w)
        paper = 1 / x ** 2 - (x ** 2 - sin(x) ** 2) / (x * cos(x) - sin(x)) ** 2
        assert dw == normalize(paper)

    def test_idempotent(self):
        e = normalize(sin(2 * x) * cos(x) + x ** integer(3) / (x + 1))
        assert normalize(e) == e

    def test_rational_folding(self):
        assert normalize(rational(1, 2) + rational(1, 3)) == Rational(5, 6)

    def test_collect_like_terms(self):
        assert normalize(a * x + 2 * x - a * x) == normalize(2 * x)

    def test_sqrt_square_content(self):
        assert normalize(sqrt(4 * l)) == normalize(2 * sqrt(l))
        assert normalize(sqrt(rational(9, 4))) == Rational(3, 2)
        assert normalize(sqrt(integer(8))) == normalize(2 * sqrt(integer(2)))

    def test_sqrt_squares_reduce(self):
        assert normalize(sqrt(l) * sqrt(l)) == l
        assert normalize(sqrt(-l) ** 2) == normalize(-l)

    def test_denominator_factoring(self):
        assert normalize(1 / (x * x + 2 * x + 1)) == normalize((x + 1) ** -2)

    def test_odd_even_argument_normalization(self):
        assert normalize(sin(-x)) == normalize(-sin(x))
        assert normalize(cos(-x)) == normalize(cos(x))
        assert normalize(sinh(-x) + sinh(x)) == Integer(0)

    def test_exponential_denominator_value(self):
        # factor-level exponential shifts must not change the value
        e = 1 / (a * exp(m * x) + b * exp(-m * x))
        n = normalize(e)
        binds = {"a": 1.3, "b": 0.7, "m": 2.0, "x": 0.9}
        v1 = eval_numeric(e, binds, 128)
        v2 = eval_numeric(n, binds, 128)
        assert abs(v1 - v2) <= 1e-30
        assert normalize(n * (a * exp(m * x) + b * exp(-m * x))) == Integer(1)

    def test_zero_denominator_rejected(self):
        with pytest.raises(ZeroDivisionError):
            normalize(1 / (x - x))

    def test_symbolic_exponent_rejected(self):
        with pytest.raises(UnsupportedExpressionError):
            normalize(Power(x, n))

    def test_unknown_function_kind_rejected(self):
        from eidforge.expr import FunctionApp

        with pytest.raises(UnsupportedExpressionError):
            FunctionApp("tan", x)


class TestDifferentiate:
    def test_table_derivative(self):
        assert differentiate(sin(x)) == normalize(cos(x))

    def test_inverse_power(self):
        # the chain step where ytilde0 = x gives (y'/y)' = -1/x^2
        w = normalize(differentiate(x) / x)
        assert differentiate(w) == normalize(-1 / x ** 2)

    def test_tanh_derivative_finite_difference(self):
        e = sinh(x) / cosh(x)
        d = differentiate(e)
        assert d == normalize(1 / cosh(x) ** 2)
        h = Fraction(1, 10 ** 9)
        for i in range(10):
            pt = Fraction(3, 10) + Fraction(17, 100) * i
            with mp.workprec(150):
                fd = (eval_numeric(e, {"x": pt + h}, 128)
                      - eval_numeric(e, {"x": pt - h}, 128)) / (2 * mp.mpf(1e-9))
            dv = eval_numeric(d, {"x": pt}, 128)
            assert abs(fd - dv) < 1e-8

    def test_integral_derivative(self):
        ig = integral(1 / cosh(x) ** 4)
        assert differentiate(ig) == normalize(cosh(x) ** -4)

    def test_product_and_chain_rule(self):
        e = x * exp(m * x)
        assert differentiate(e) == normalize(exp(m * x) + m * x * exp(m * x))

    def test_sqrt_rule(self):
        d = differentiate(sqrt(x))
        assert d == normalize(1 / (2 * sqrt(x)))

    def test_unsupported_power(self):
        with pytest.raises(UnsupportedExpressionError):
            differentiate(Power(x, x))


class TestSubstitute:
    def test_linear(self):
        assert substitute(a * x + b, {a: integer(1), b: integer(0)}) == x

    def test_family_specialization(self):
        # generalized rational coefficient at a=1, b=0
        general = l + n * (n + 1) * a ** 2 / (a * x + b) ** 2
        special = substitute(general, {a: integer(1), b: integer(0),
                                       n: integer(1)})
        assert special == normalize(l + 2 / x ** 2)

    def test_substitute_then_differentiate(self):
        e = substitute(sin(m * x), {m: integer(2)})
        assert differentiate(e) == normalize(2 * cos(2 * x))

    def test_commutes_with_normalize(self):
        e = (a * x + b) ** 2 / (a * x) + sin(m * x) * a
        binds = {a: integer(2), b: rational(1, 2)}
        assert substitute(normalize(e), binds) == substitute(e, binds)

    def test_bad_key(self):
        with pytest.raises(UnsupportedExpressionError):
            substitute(x, {integer(1): x})


class TestEvalNumeric:
    def test_sin_half_pi(self):
        v = eval_numeric(sin(x), {"x": math.pi / 2})
        assert abs(v - 1) < 1e-15

    def test_pole_error(self):
        with pytest.raises(PoleError):
            eval_numeric(1 / x, {"x": 0.0})

    def test_unbound_symbol(self):
        with pytest.raises(EvaluationError):
            eval_numeric(a * x, {"x": 1.0})

    def test_chain_coefficient_high_precision(self):
        # the generated two-step coefficient, evaluated both directly and in
        # literal display form, at doubled precision
        coeff = normalize(
            lam ** 2 - 2 * (x ** 2 - sin(x) ** 2)
            / (x * cos(x) - sin(x)) ** 2)
        binds = {"lambda": 1.0, "x": 1.0}
        v, err = eval_with_error(coeff, binds, 64)
        literal = (lam ** 2 - 2 * (x ** 2 - sin(x) ** 2)
                   / (x * cos(x) - sin(x)) ** 2)
        v2 = eval_numeric(literal, binds, 128)
        assert mp.isfinite(v)
        assert abs(v - v2) < 1e-12
        assert err < 1e-12

    def test_integral_quadrature(self):
        e = integral(1 / cosh(x) ** 2)
        v = eval_numeric(e, {"x": 1.0}, integral_base=0.0)
        assert abs(v - mp.tanh(1)) < 1e-12

    def test_negative_radicand(self):
        with pytest.raises(EvaluationError):
            eval_numeric(sqrt(l), {"l": -2.0})

    def test_env_precision_override(self, monkeypatch):
        from eidforge.expr.numeric import working_precision

        monkeypatch.setenv("EIDFORGE_PRECISION", "128")
        assert working_precision() == 128
        monkeypatch.setenv("EIDFORGE_PRECISION", "junk")
        assert working_precision() == 64


class TestSerialization:
    def test_prefix_round_trip(self):
        e = normalize(sin(m * x) ** 2 / (a * x + b) + exp(-sqrt(l) * x))
        assert normalize(parse_prefix(to_prefix(e))) == e

    def test_prefix_stable(self):
        e1 = to_prefix(normalize(x ** 2 + sin(x) * 3 + 1))
        e2 = to_prefix(normalize(1 + 3 * sin(x) + x * x))
        assert e1 == e2

    def test_latex_functions(self):
        s = to_latex(normalize(2 / cosh(x) ** 2))
        assert "\\cosh" in s and "\\frac" in s

    def test_latex_names(self):
        assert to_latex(lam) == "\\lambda"
        assert to_latex(c1) == "c_{1}"

    def test_text_renders_fraction(self):
        assert to_text(normalize(1 / x ** 2)) == "1/x^2"

    def test_parse_errors(self):
        for bad in ("", "(+ 1", "(foo 1 2)", "(^ x)", ")"):
            with pytest.raises(ParseError):
                parse_prefix(bad)

    def test_parse_integral(self):
        e = parse_prefix("(int (^ (cosh x) -4) x)")
        assert differentiate(e) == normalize(cosh(x) ** -4)

    def test_is_zero(self):
        assert is_zero(sin(x) ** 2 + cos(x) ** 2 - 1)
        assert not is_zero(sin(x) ** 2 - cos(x) ** 2)

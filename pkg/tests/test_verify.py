"""The numeric oracle: residuals, Wronskians, operator identities, quadrature."""

import mpmath as mp

from eidforge.diffop import FirstOrderOp, OperatorChain
from eidforge.expr import (
    cos,
    cosh,
    exp,
    integer,
    normalize,
    param,
    rational,
    sin,
    sqrt,
    x,
)
from eidforge.families import FamilySpec, reduction_integral, solution_operator
from eidforge.verify import (
    VerificationReport,
    operator_identity_check,
    quadrature,
    residual,
    sample_points,
    wronskian_check,
)

l = param("l")
lam = param("lambda")
c1, c2 = param("c1"), param("c2")


class TestSamplePoints:
    def test_deterministic(self):
        assert sample_points((0.5, 2.0), 20, 3) == sample_points((0.5, 2.0), 20, 3)

    def test_seed_changes_points(self):
        assert sample_points((0.5, 2.0), 20, 3) != sample_points((0.5, 2.0), 20, 4)

    def test_inside_window_and_sorted(self):
        pts = sample_points((0.5, 2.0), 50, 0)
        assert all(0.5 <= p <= 2.0 for p in pts)
        assert pts == sorted(pts)


class TestResidual:
    def test_generating_equation_exact(self):
        rep = residual(normalize(-l), exp(sqrt(l) * x), {"l": 2.0},
                       tolerance=1e-12)
        assert rep.passed and rep.max_residual < 1e-14

    def test_worked_chain_solution(self):
        coeff = normalize(lam ** 2 - 2 * (x ** 2 - sin(x) ** 2)
                          / (x * cos(x) - sin(x)) ** 2)
        y2 = (
            c1 * (-lam ** 2 * x * cos(lam * x) * cos(x)
                  + (lam ** 2 - 1) * cos(lam * x) * sin(x)
                  - lam * x * sin(lam * x) * sin(x))
            + c2 * (-lam ** 2 * x * cos(x) * sin(lam * x)
                    + (lam ** 2 - 1) * sin(lam * x) * sin(x)
                    + lam * x * cos(lam * x) * sin(x))
        ) / (x * cos(x) - sin(x))
        rep = residual(coeff, normalize(y2),
                       {"lambda": 1.0, "c1": 1.0, "c2": 1.0},
                       window=(0.5, 2.0), tolerance=1e-8)
        assert rep.passed

    def test_wrong_sign_potential_fails_loudly(self):
        spec = FamilySpec("hyperbolic", n=1)
        iterated, _ = solution_operator(spec)
        from eidforge.families import potential, seed_solution

        sol = iterated.apply(seed_solution("expon", l, c1, c2))
        wrong = normalize(-(l + 2 / cosh(x) ** 2))  # flipped well sign
        rep = residual(wrong, sol, {"l": 2.3, "c1": 0.7, "c2": -0.4},
                       window=(0.1, 2.0), tolerance=1e-8)
        assert not rep.passed
        assert rep.max_residual > 1e-3

    def test_wrong_sign_resonance_fails_loudly(self):
        from eidforge.families import degenerate_solution, potential

        spec = FamilySpec("hyperbolic", n=1, l=integer(4))
        sol = degenerate_solution(spec)
        wrong = normalize(potential(spec).coeff + 8)  # l -> -4 in effect
        rep = residual(wrong, sol, {"c1": 1.0, "c2": 0.7},
                       window=(0.1, 2.0), tolerance=1e-9)
        assert not rep.passed
        assert rep.max_residual > 1e-3

    def test_window_shifts_away_from_pole(self):
        # a coefficient with an exact pole at the first sample point
        from fractions import Fraction

        pole_at = sample_points((0.5, 2.0), 20, 0)[0]
        coeff = normalize(
            -(l + 2 / (x - rational(Fraction(pole_at))) ** 2))
        sol = exp(sqrt(l) * x)
        rep = residual(coeff, sol, {"l": 1.3}, window=(0.5, 2.0),
                       tolerance=1e-8)
        assert rep.window != (0.5, 2.0)

    def test_report_shape(self):
        rep = residual(normalize(-l), exp(sqrt(l) * x), {"l": 2.0}, points=7)
        assert isinstance(rep, VerificationReport)
        assert len(rep.per_point) == 7
        assert rep.kind == "residual"
        assert bool(rep) == rep.passed


class TestWronskian:
    def test_sin_cos_pair(self):
        rep = wronskian_check(cos(x), sin(x), {}, window=(0.2, 1.5))
        assert rep.passed
        assert abs(rep.per_point[0][1] - 1.0) < 1e-12

    def test_power_pair(self):
        # x^2 and x^-1: W = -3, constant
        rep = wronskian_check(normalize(x ** 2), normalize(1 / x), {},
                              window=(0.5, 3.0))
        assert rep.passed
        assert abs(rep.per_point[0][1] + 3.0) < 1e-12

    def test_dependent_pair_fails(self):
        rep = wronskian_check(sin(x), normalize(2 * sin(x)), {},
                              window=(0.2, 1.5))
        assert not rep.passed


class TestOperatorIdentity:
    def test_identity_chains(self):
        chain = OperatorChain([FirstOrderOp.shifted_derivative(1 / x)])
        rep = operator_identity_check(chain, chain, [sin(x)], {},
                                      window=(0.5, 2.0))
        assert rep.passed and rep.max_residual == 0.0

    def test_exponential_family_identity(self):
        spec = FamilySpec("exponential", n=3, a=integer(1), b=integer(1))
        iterated, chain_form = solution_operator(spec)
        rep = operator_identity_check(chain_form, iterated, [sin(x)], {},
                                      window=(0.1, 2.0), tolerance=1e-9)
        assert rep.passed

    def test_off_by_one_exponent_fails(self):
        spec = FamilySpec("hyperbolic", n=2)
        iterated, chain_form = solution_operator(spec)
        from eidforge.families import IteratedOp, base_eigenfunction

        wrong = IteratedOp(base_eigenfunction(spec).ytilde0, spec.n)
        rep = operator_identity_check(chain_form, wrong, [sin(x)], {},
                                      window=(0.1, 2.0), tolerance=1e-9)
        assert not rep.passed
        assert rep.max_residual > 1e-3


class TestQuadrature:
    def test_sech_squared(self):
        v = quadrature(normalize(1 / cosh(x) ** 2), 0, 1, {})
        assert abs(v - mp.tanh(1)) < 1e-12

    def test_sech_fourth_against_closed_form(self):
        from eidforge.expr import eval_numeric

        F = reduction_integral("sech", 1)
        v = quadrature(normalize(cosh(x) ** -4), 0, 1, {})
        d = eval_numeric(F, {"x": 1.0}, 96) - eval_numeric(F, {"x": 0.0}, 96)
        assert abs(v - d) < 1e-10

    def test_csc_squared(self):
        from eidforge.expr import cot, eval_numeric

        v = quadrature(normalize(sin(x) ** -2), 0.5, 1.0, {})
        anti = normalize(-cot(x))
        d = eval_numeric(anti, {"x": 1.0}, 96) - eval_numeric(anti, {"x": 0.5}, 96)
        assert abs(v - d) < 1e-10


class TestDeterminism:
    def test_residual_reports_identical(self):
        spec = FamilySpec("hyperbolic", n=2)
        iterated, _ = solution_operator(spec)
        from eidforge.families import potential, seed_solution

        sol = iterated.apply(seed_solution("expon", l, c1, c2))
        kw = dict(window=(0.1, 2.0), points=12, tolerance=1e-8, seed=5)
        r1 = residual(potential(spec).coeff, sol,
                      {"l": 2.0, "c1": 1.0, "c2": 1.0}, **kw)
        r2 = residual(potential(spec).coeff, sol,
                      {"l": 2.0, "c1": 1.0, "c2": 1.0}, **kw)
        assert r1.per_point == r2.per_point
        assert r1.max_residual == r2.max_residual

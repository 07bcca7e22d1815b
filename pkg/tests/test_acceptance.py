"""Acceptance criteria, one test per criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -s` to see the status lines.
Every tolerance is pinned here; nothing is deferred to calibration.
"""

import pathlib
import random
from fractions import Fraction

import mpmath as mp
import pytest

from eidforge.cli import run as cli_run
from eidforge.diffop import FirstOrderOp, OperatorChain
from eidforge.eid import (
    NormalODE,
    chain,
    commutation_residual,
    first_integral,
    forward_op,
    intertwining_residual,
    inverse_op,
    transfer_matrix,
)
from eidforge.errors import DegenerateTransformError, EidforgeError
from eidforge.expr import (
    Integer,
    Power,
    cos,
    cosh,
    differentiate,
    eval_numeric,
    exp,
    integer,
    is_zero,
    normalize,
    param,
    rational,
    sin,
    sinh,
    sqrt,
    substitute,
    to_prefix,
    x,
)
from eidforge.families import (
    FAMILY_KINDS,
    FamilySpec,
    base_eigenfunction,
    degenerate_solution,
    identity_residual,
    potential,
    reduction_integral,
    resonant_lambda,
    seed_solution,
    solution_operator,
)
from eidforge.generate import GenerateRequest, generate
from eidforge.verify import quadrature, residual, sample_points
from helpers import basis_match, random_tree, standard_point

GOLDEN = pathlib.Path(__file__).parent / "golden"

l, lam = param("l"), param("lambda")
c1, c2 = param("c1"), param("c2")
ZERO = Integer(0)


def _report(name, detail):
    print(f"\n{name}: PASS ({detail})")


def _draw_params(rng, kind, n):
    """a, b in [-2,2] (not both 0), m in {1,2}, l in [0.5,9] off-resonance."""
    while True:
        a = Fraction(rng.randint(-20, 20), 10)
        b = Fraction(rng.randint(-20, 20), 10)
        if a or b:
            break
    m = rng.choice([1, 2])
    forbidden = {Fraction(m * m * (k + 1) ** 2) for k in range(n + 1)}
    while True:
        lv = Fraction(rng.randint(5, 90), 10)
        if lv not in forbidden:
            break
    return rational(a), rational(b), integer(m), rational(lv)


def test_ac1_family_correctness_sweep():
    """Criterion 1: generated solutions solve their equations, < 1e-8."""
    rng = random.Random(101)
    worst = 0.0
    count = 0
    for kind in FAMILY_KINDS:
        for n in range(5):
            for _draw in range(5):
                a, b, m, lv = _draw_params(rng, kind, n)
                spec = FamilySpec(kind, n=n, a=a, b=b, m=m, l=lv,
                                  seed_form="expon")
                prob = generate(GenerateRequest(spec))
                assert not prob.resonant
                binds = {"c1": 0.25 + rng.random(),
                         "c2": -(0.25 + rng.random())}
                rep = residual(prob.ode, prob.solution, binds,
                               window=spec.window, points=20,
                               tolerance=1e-8, seed=7)
                assert rep.passed, (kind, n, rep.max_residual)
                worst = max(worst, rep.max_residual)
                count += 1
    assert count == 100
    _report("AC1 family correctness sweep",
            f"{count} problems, worst residual {worst:.2e} < 1e-8")


def test_ac2_resonance_sweep():
    """Criterion 2: quadrature-form solutions at resonance, < 1e-9."""
    rng = random.Random(202)
    worst = 0.0
    count = 0
    for kind in FAMILY_KINDS:
        for n in range(5):
            for _draw in range(5):
                a, b, m, _lv = _draw_params(rng, kind, n)
                probe = FamilySpec(kind, n=n, a=a, b=b, m=m)
                spec = FamilySpec(kind, n=n, a=a, b=b, m=m,
                                  l=resonant_lambda(probe))
                sol = degenerate_solution(spec)
                prob = generate(GenerateRequest(spec))
                assert prob.resonant and prob.solution == sol
                binds = {"c1": 0.25 + rng.random(),
                         "c2": -(0.25 + rng.random())}
                rep = residual(potential(spec), sol, binds,
                               window=spec.window, points=20,
                               tolerance=1e-9, seed=11)
                assert rep.passed, (kind, n, rep.max_residual)
                worst = max(worst, rep.max_residual)
                count += 1
    assert count == 100
    _report("AC2 resonance sweep",
            f"{count} problems, worst residual {worst:.2e} < 1e-9")


def test_ac3_operational_identities():
    """Criterion 3: factored vs iterated operator forms, < 1e-9."""
    rng = random.Random(303)
    testfns = (sin(x), normalize(x ** 2), exp(x))
    worst = 0.0
    checks = 0
    for kind in FAMILY_KINDS:
        for n in range(5):
            a, b, m, lv = _draw_params(rng, kind, n)
            spec = FamilySpec(kind, n=n, a=a, b=b, m=m, l=lv)
            pts = sample_points(spec.window, 12, seed=3)
            for f in testfns:
                r = identity_residual(spec, f, pts)
                assert r < 1e-9, (kind, n, r)
                worst = max(worst, r)
                checks += 1
            # the n-factor variant: product from k=n..1 against the
            # derivative-inside iterated form of order n
            base = base_eigenfunction(spec)
            ops = [FirstOrderOp.shifted_derivative(
                normalize(Integer(k) * base.log_derivative))
                for k in range(1, n + 1)]
            lhs = OperatorChain(ops).apply(sin(x))
            g = sin(x)
            for _ in range(n):
                g = differentiate(normalize(g / base.ytilde0))
            rhs = normalize(Power(base.ytilde0, Integer(n)) * g)
            assert lhs == rhs, (kind, n)
            checks += 1
    # negative control: off-by-one outer exponent must fail loudly
    from eidforge.families import IteratedOp
    from eidforge.verify import operator_identity_check

    spec = FamilySpec("hyperbolic", n=2)
    _iter, chain_form = solution_operator(spec)
    wrong = IteratedOp(base_eigenfunction(spec).ytilde0, spec.n)
    rep = operator_identity_check(chain_form, wrong, [sin(x)], {},
                                  window=spec.window, tolerance=1e-9)
    assert not rep.passed and rep.max_residual > 1e-3
    _report("AC3 operational identities",
            f"{checks} checks, worst residual {worst:.2e} < 1e-9; "
            f"negative control {rep.max_residual:.2e} > 1e-3")


def test_ac4_two_step_chain_fixture():
    """Criterion 4: the worked two-step chain reproduces its target."""
    ode = NormalODE(lam ** 2)
    seed = c1 * cos(lam * x) + c2 * sin(lam * x)
    prob = chain(ode, [(x, ZERO), (cos(x) - sin(x) / x, Integer(1))],
                 seed, spectral=lam, window=(0.5, 2.0))
    target = normalize(lam ** 2 - 2 * (x ** 2 - sin(x) ** 2)
                       / (x * cos(x) - sin(x)) ** 2)
    assert prob.ode.coeff == target
    displayed = (
        c1 * (-lam ** 2 * x * cos(lam * x) * cos(x)
              + (lam ** 2 - 1) * cos(lam * x) * sin(x)
              - lam * x * sin(lam * x) * sin(x))
        + c2 * (-lam ** 2 * x * cos(x) * sin(lam * x)
                + (lam ** 2 - 1) * sin(lam * x) * sin(x)
                + lam * x * cos(lam * x) * sin(x))
    ) / (x * cos(x) - sin(x))
    assert prob.solution == normalize(displayed)
    rep = residual(prob.ode, normalize(displayed),
                   {"lambda": 1.0, "c1": 1.0, "c2": 1.0},
                   window=(0.5, 2.0), points=20, tolerance=1e-8)
    assert rep.passed
    _report("AC4 two-step chain fixture",
            f"coefficient structural match; displayed solution residual "
            f"{rep.max_residual:.2e} < 1e-8")


def test_ac5_golden_examples(capsys):
    """Criterion 5: golden CLI outputs plus solution-space equivalence."""
    invocations = {
        "example1_latex.txt": [
            "generate", "--family", "hyperbolic", "--n", "1", "--a", "1",
            "--b", "0", "--m", "1", "--seed", "expon", "--format", "latex"],
        "example3_chain.txt": [
            "generate", "--family", "rational", "--n", "2", "--form",
            "chain", "--format", "text"],
        "example4_text.txt": [
            "generate", "--family", "trigonometric", "--n", "2", "--a", "0",
            "--b", "1", "--m", "1", "--seed", "expon", "--format", "text"],
    }
    for name, argv in invocations.items():
        code = cli_run(argv)
        out = capsys.readouterr().out
        assert code == 0, name
        assert out == (GOLDEN / name).read_text(), name

    spreads = []
    # the sech-well first-order problem
    prob1 = generate(GenerateRequest(FamilySpec("hyperbolic", n=1)))
    q1 = substitute(prob1.solution, {c1: Integer(1), c2: ZERO})
    q2 = substitute(prob1.solution, {c1: ZERO, c2: Integer(1)})
    pts = sample_points((0.2, 1.9), 10)
    for target in (
        normalize(exp(sqrt(l) * x) * (sqrt(l) * cosh(x) - sinh(x)) / cosh(x)),
        normalize(-(sqrt(l) * cosh(x) + sinh(x))
                  / (exp(sqrt(l) * x) * cosh(x))),
    ):
        _u, _v, spread = basis_match(target, q1, q2, {"l": 2.3}, pts)
        assert spread < 1e-9
        spreads.append(spread)

    # the power-law problem in operator form: the alternative displayed seed
    # spans the standard seed space, and applying the operator to it lands in
    # the generated solution space
    prob3 = generate(GenerateRequest(FamilySpec("rational", n=2)))
    alt_seed = normalize((c1 * exp(2 * sqrt(l) * x) + c2) / exp(sqrt(l) * x))
    assert alt_seed == normalize(c1 * exp(sqrt(l) * x)
                                 + c2 * exp(-sqrt(l) * x))
    iterated, _ = solution_operator(FamilySpec("rational", n=2))
    alt_sol = iterated.apply(alt_seed)
    assert alt_sol == prob3.solution

    # the cosecant-well second-order problem
    prob4 = generate(GenerateRequest(
        FamilySpec("trigonometric", n=2, a=ZERO, b=Integer(1))))
    q1 = substitute(prob4.solution, {c1: Integer(1), c2: ZERO})
    q2 = substitute(prob4.solution, {c1: ZERO, c2: Integer(1)})
    pts = sample_points((0.3, 1.3), 10)
    num1 = (3 * cos(x) ** 2 - 3 * sqrt(l) * cos(x) * sin(x)
            + l * sin(x) ** 2 + sin(x) ** 2)
    num2 = (3 * cos(x) ** 2 + 3 * sqrt(l) * cos(x) * sin(x)
            + l * sin(x) ** 2 + sin(x) ** 2)
    for target in (normalize(exp(sqrt(l) * x) * num1 / sin(x) ** 2),
                   normalize(num2 / (exp(sqrt(l) * x) * sin(x) ** 2))):
        _u, _v, spread = basis_match(target, q1, q2, {"l": 2.7}, pts)
        assert spread < 1e-9
        spreads.append(spread)
    _report("AC5 golden examples",
            f"3 golden invocations byte-identical; basis-match spreads "
            f"max {max(spreads):.2e} < 1e-9")


def test_ac6_transfer_matrix_suite():
    """Criterion 6: matrix apparatus on twenty valid transformation triples."""
    rng = random.Random(606)
    triples = 0
    degenerate_seen = 0
    while triples < 20:
        kind = rng.choice(FAMILY_KINDS)
        n = rng.randint(0, 3)
        a, b, m, lv = _draw_params(rng, kind, n)
        spec = FamilySpec(kind, n=n + 1, a=a, b=b, m=m, l=lv)
        lower = FamilySpec(kind, n=n, a=a, b=b, m=m, l=lv)
        base = base_eigenfunction(spec)
        ytilde = normalize(base.ytilde0 ** Integer(n + 1))
        alpha = normalize(Integer(n + 1) * base.log_derivative)
        a0 = potential(lower).coeff
        b0 = potential(spec).coeff
        assert b0 == normalize(a0 + 2 * differentiate(alpha))

        T = transfer_matrix(alpha, Integer(1), a0)
        res = intertwining_residual(T, a0, b0)
        assert all(e == ZERO for row in res for e in row), (kind, n)
        K = first_integral(alpha, Integer(1), a0)
        assert T.det() == K, (kind, n)
        r1, r2 = commutation_residual(alpha, Integer(1), K, sin(x), a0=a0)
        assert r1 == ZERO and r2 == ZERO, (kind, n)

        assert not is_zero(K)
        fwd = forward_op(alpha, Integer(1))
        inv = inverse_op(alpha, Integer(1), K)
        seed = seed_solution("expon", lv, rational(Fraction(1, 2)),
                             rational(Fraction(-3, 4)))
        y = solution_operator(lower)[0].apply(seed)
        back = inv.apply(fwd.apply(y))
        diff = normalize(back - y)
        for p in sample_points(spec.window, 10, seed=13):
            try:
                v = eval_numeric(diff, {"x": p}, 96)
                scale = eval_numeric(y, {"x": p}, 96)
            except EidforgeError:
                continue
            assert abs(v) <= 1e-9 * max(1, abs(scale)), (kind, n)
        triples += 1

        # the same step taken at its own eigenvalue is degenerate
        eigen = potential(FamilySpec(kind, n=n, a=a, b=b, m=m,
                                     l=resonant_lambda(lower))).coeff
        K0 = first_integral(alpha, Integer(1), eigen)
        assert is_zero(K0), (kind, n)
        with pytest.raises(DegenerateTransformError):
            inverse_op(alpha, Integer(1), K0)
        degenerate_seen += 1
    _report("AC6 transfer matrix suite",
            f"{triples} valid triples: intertwining zero, det T = K, "
            f"commutation zero, round trips < 1e-9; "
            f"{degenerate_seen} degenerate K = 0 cases raised")


def test_ac7_reduction_integrals():
    """Criterion 7: closed antiderivatives differentiate back; quadrature."""
    kernels = {"sech": cosh(x), "csch": sinh(x), "sec": cos(x), "csc": sin(x)}
    windows = {"sech": (0.2, 1.1), "csch": (0.4, 1.2),
               "sec": (0.1, 0.9), "csc": (0.5, 1.3)}
    worst = 0.0
    for kind, base in kernels.items():
        for n in range(6):
            F = reduction_integral(kind, n)
            integrand = normalize(Power(base, integer(-2 * n - 2)))
            assert differentiate(F) == integrand, (kind, n)
            lo, hi = windows[kind]
            q = quadrature(integrand, lo, hi, {})
            d = (eval_numeric(F, {"x": hi}, 96)
                 - eval_numeric(F, {"x": lo}, 96))
            gap = abs(q - d)
            assert gap < 1e-10, (kind, n, gap)
            worst = max(worst, float(gap))
    _report("AC7 reduction integrals",
            f"4 kinds, n <= 5: exact derivatives; quadrature gap "
            f"{worst:.2e} < 1e-10")


def test_ac8_kernel_soundness():
    """Criterion 8: idempotence, finite differences, value preservation,
    each over 1000 randomized kernel expressions."""
    rng = random.Random(808)
    idems = 0
    while idems < 1000:
        e = random_tree(rng, 3)
        try:
            n1 = normalize(e)
        except (EidforgeError, ZeroDivisionError):
            continue
        assert normalize(n1) == n1, to_prefix(e)
        idems += 1

    values = 0
    rng = random.Random(809)
    while values < 1000:
        e = random_tree(rng, 3)
        try:
            n1 = normalize(e)
        except (EidforgeError, ZeroDivisionError):
            continue
        pt = standard_point(rng)
        try:
            v1 = eval_numeric(e, pt, 128)
            v2 = eval_numeric(n1, pt, 128)
        except (EidforgeError, ZeroDivisionError):
            continue
        if abs(v1) > 1e12:
            continue
        assert abs(v1 - v2) <= 1e-12 * max(1, abs(v1)), to_prefix(e)
        values += 1

    fd_checked = 0
    h = Fraction(1, 10 ** 9)
    rng = random.Random(810)
    while fd_checked < 1000:
        e = random_tree(rng, 3)
        try:
            d = differentiate(e)
        except (EidforgeError, ZeroDivisionError):
            continue
        pt = standard_point(rng)
        xk = Fraction(pt["x"]).limit_denominator(10 ** 6)
        binds = dict(pt)
        try:
            with mp.workprec(140):
                binds["x"] = xk + h
                va = eval_numeric(e, binds, 120)
                binds["x"] = xk - h
                vb = eval_numeric(e, binds, 120)
                fd = (va - vb) / (2 * mp.mpf(1) / 10 ** 9)
                binds["x"] = xk
                dv = eval_numeric(d, binds, 120)
        except (EidforgeError, ZeroDivisionError):
            continue
        if abs(dv) > 1e9 or abs(va) > 1e15:
            continue
        assert abs(fd - dv) <= max(1e-7, 1e-7 * abs(dv)), to_prefix(e)
        fd_checked += 1
    _report("AC8 kernel soundness",
            f"idempotence, value preservation and finite differences on "
            f"{idems}/{values}/{fd_checked} trees")

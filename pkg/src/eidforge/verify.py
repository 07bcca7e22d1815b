"""Independent numeric oracle for every symbolic claim the generator makes.

Residual substitution, Wronskian constancy, operator-identity agreement and
adaptive quadrature.  Point placement is low-discrepancy with a fixed seed,
so reports are deterministic; windows shift automatically away from poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .errors import PoleError, WindowError
from .expr import Expr, as_expr, differentiate
from .expr.numeric import Evaluator, working_precision

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SEED_STRIDE = 0.7548776662466927  # plastic-number offset decorrelates seeds

FAMILY_WINDOWS = {
    "rational": (0.5, 3.0),
    "exponential": (0.1, 2.0),
    "hyperbolic": (0.1, 2.0),
    "trigonometric": (0.1, 1.4),
}
DEFAULT_WINDOW = (0.5, 2.0)
_MAX_WINDOW_SHIFTS = 8


def sample_points(window, count: int, seed: int = 0):
    """Low-discrepancy points in the window, sorted ascending."""
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise WindowError(f"empty sampling window ({lo}, {hi})")
    count = max(int(count), 1)
    width = hi - lo
    offset = (seed * _SEED_STRIDE) % 1.0
    pts = [lo + width * ((offset + (i + 1) * _GOLDEN) % 1.0) for i in range(count)]
    return sorted(pts)


@dataclass(frozen=True)
class VerificationReport:
    max_residual: float
    per_point: tuple
    window: tuple
    bindings: dict
    passed: bool
    tolerance: float
    kind: str = "residual"

    def __bool__(self):
        return self.passed


def _shift(window):
    lo, hi = window
    width = hi - lo
    return (lo + 0.37 * width, hi + 0.37 * width)


_NEAR_POLE = 1e14


def _evaluate_rows(exprs, bindings, window, count, seed, precision):
    """Evaluate every expression at every sample point, shifting on poles.

    A pole hit or a near-pole magnitude (which would destroy the residual's
    conditioning) moves the window.  Returns (window, points, rows) with
    rows[i][j] = exprs[i] at points[j].
    """
    for _attempt in range(_MAX_WINDOW_SHIFTS):
        pts = sample_points(window, count, seed)
        ev = Evaluator(dict(bindings), precision, integral_base=window[0])
        rows = [[] for _ in exprs]
        try:
            for p in pts:
                ev.bindings["x"] = p
                for i, e in enumerate(exprs):
                    v = ev(e)
                    if abs(v) > _NEAR_POLE:
                        raise PoleError("near-pole magnitude at sample point", e)
                    rows[i].append(v)
        except (PoleError, ZeroDivisionError):
            window = _shift(window)
            continue
        return window, pts, rows
    raise WindowError(f"no pole-free window found near {window}")


def residual(ode, y: Expr, bindings: dict, window=DEFAULT_WINDOW,
             points: int = 20, tolerance: float = 1e-8,
             precision: int | None = None, seed: int = 0) -> VerificationReport:
    """Max of |y'' + A y| / max(1, |y|, |y''|) at sample points.

    The second derivative is taken symbolically and each piece is evaluated
    independently; the residual expression is never simplified to zero first.
    """
    coeff = ode.coeff if hasattr(ode, "coeff") else as_expr(ode)
    y = as_expr(y)
    d2 = differentiate(differentiate(y))
    precision = precision or working_precision()
    window, pts, (vy, vd2, va) = _evaluate_rows(
        [y, d2, coeff], bindings, window, points, seed, precision)

    def point_residual(yy, dd, aa):
        return float(abs(dd + aa * yy) / max(1, abs(yy), abs(dd)))

    per_point = []
    retry = None
    for p, yy, dd, aa in zip(pts, vy, vd2, va):
        r = point_residual(yy, dd, aa)
        if r >= tolerance:
            # double the working precision before reporting a failure; true
            # failures survive, conditioning artifacts near poles collapse
            if retry is None:
                retry = Evaluator(dict(bindings), 2 * precision,
                                  integral_base=window[0])
            retry.bindings["x"] = p
            r = point_residual(retry(y), retry(d2), retry(coeff))
        per_point.append((p, r))
    worst = max(r for _p, r in per_point)
    return VerificationReport(worst, tuple(per_point), window,
                              dict(bindings), worst < tolerance, tolerance)


def wronskian_check(y1: Expr, y2: Expr, bindings: dict, window=DEFAULT_WINDOW,
                    points: int = 20, tolerance: float = 1e-9,
                    precision: int | None = None, seed: int = 0
                    ) -> VerificationReport:
    """W = y1 y2' - y2 y1' must be numerically constant and nonzero."""
    y1, y2 = as_expr(y1), as_expr(y2)
    w = y1 * differentiate(y2) - y2 * differentiate(y1)
    precision = precision or working_precision()
    window, pts, (vals,) = _evaluate_rows([w], bindings, window, points,
                                          seed, precision)
    mean = mp.fsum(vals) / len(vals)
    var = mp.fsum((v - mean) ** 2 for v in vals) / len(vals)
    stdev = mp.sqrt(var)
    nonzero = abs(mean) > 1e-9
    rel = float(stdev / abs(mean)) if nonzero else float("inf")
    per_point = tuple((p, float(v)) for p, v in zip(pts, vals))
    return VerificationReport(rel, per_point, window, dict(bindings),
                              nonzero and rel < tolerance, tolerance,
                              kind="wronskian")


def operator_identity_check(lhs, rhs, testfns, bindings: dict,
                            window=DEFAULT_WINDOW, points: int = 20,
                            tolerance: float = 1e-9,
                            precision: int | None = None, seed: int = 0
                            ) -> VerificationReport:
    """Max normalized disagreement of two operator forms over test functions."""
    precision = precision or working_precision()
    worst = 0.0
    per_point = []
    for f in testfns:
        el = lhs.apply(f)
        er = rhs.apply(f)
        window, pts, (vl, vr) = _evaluate_rows([el, er], bindings, window,
                                               points, seed, precision)
        for p, a, b in zip(pts, vl, vr):
            r = float(abs(a - b) / max(1, abs(a)))
            per_point.append((p, r))
            worst = max(worst, r)
    return VerificationReport(worst, tuple(per_point), window, dict(bindings),
                              worst < tolerance, tolerance, kind="operator")


def quadrature(integrand: Expr, lo, hi, bindings: dict | None = None,
               precision: int | None = None):
    """Adaptive quadrature of integrand dx over [lo, hi]."""
    precision = precision or working_precision()
    ev = Evaluator(dict(bindings or {}), precision + 40)
    integrand = as_expr(integrand)

    def f(t):
        ev.bindings["x"] = t
        try:
            return ev._eval(integrand)
        except ZeroDivisionError as exc:
            raise PoleError("pole inside quadrature interval", integrand) from exc

    with mp.workprec(precision + 40):
        val, err = mp.quad(f, [mp.mpf(lo), mp.mpf(hi)], error=True)
        if err > mp.mpf(10) ** (-11) * max(1, abs(val)):
            val2 = mp.quad(f, [mp.mpf(lo), (mp.mpf(lo) + mp.mpf(hi)) / 2,
                               mp.mpf(hi)], maxdegree=10)
            val = val2
    with mp.workprec(precision):
        return +val

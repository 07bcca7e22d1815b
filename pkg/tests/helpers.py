"""Shared test utilities: random kernel trees, basis matching, bindings."""

from __future__ import annotations

import random
from fractions import Fraction

import mpmath as mp

from eidforge.expr import (
    FunctionApp,
    Power,
    Product,
    Sum,
    eval_numeric,
    integer,
    param,
    rational,
    x,
)

PARAM_NAMES = ("a", "b", "m", "l")
PARAMS = [param(n) for n in PARAM_NAMES]


def random_tree(rng: random.Random, depth: int):
    """A random expression over the kernel grammar."""
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice([
            integer(rng.randint(-4, 4)),
            rational(Fraction(rng.randint(-6, 6), rng.randint(1, 5))),
            x, x,
            rng.choice(PARAMS),
        ])
    k = rng.random()
    if k < 0.30:
        return Sum(tuple(random_tree(rng, depth - 1)
                         for _ in range(rng.randint(2, 3))))
    if k < 0.60:
        return Product(tuple(random_tree(rng, depth - 1)
                             for _ in range(rng.randint(2, 3))))
    if k < 0.75:
        return Power(random_tree(rng, depth - 1),
                     integer(rng.choice([-2, -1, 2, 3])))
    kind = rng.choice(["exp", "sin", "cos", "sinh", "cosh"])
    return FunctionApp(kind, random_tree(rng, depth - 1))


def standard_point(rng: random.Random):
    return {
        "x": 0.6 + 0.9 * rng.random(),
        "a": 1.3, "b": -0.4, "m": 2.0, "l": 1.9,
        "c1": 0.8, "c2": -0.7, "c": 0.5, "n": 2.0,
        "lambda": 1.1,
    }


def basis_match(target, basis1, basis2, bindings, points, precision=80):
    """Constant (u, v) with target = u*basis1 + v*basis2, plus the spread.

    Solves 2x2 systems on consecutive point pairs; returns (u, v, max_stdev).
    """
    us, vs = [], []
    for i in range(0, len(points) - 1, 2):
        x1, x2 = points[i], points[i + 1]
        a11 = eval_numeric(basis1, {**bindings, "x": x1}, precision)
        a12 = eval_numeric(basis2, {**bindings, "x": x1}, precision)
        b1 = eval_numeric(target, {**bindings, "x": x1}, precision)
        a21 = eval_numeric(basis1, {**bindings, "x": x2}, precision)
        a22 = eval_numeric(basis2, {**bindings, "x": x2}, precision)
        b2 = eval_numeric(target, {**bindings, "x": x2}, precision)
        det = a11 * a22 - a12 * a21
        us.append((b1 * a22 - b2 * a12) / det)
        vs.append((a11 * b2 - a21 * b1) / det)

    def spread(vals):
        mean = mp.fsum(vals) / len(vals)
        scale = max(1, abs(mean))
        return float(mp.sqrt(mp.fsum((v - mean) ** 2 for v in vals)
                             / len(vals)) / scale)

    return us[0], vs[0], max(spread(us), spread(vs))

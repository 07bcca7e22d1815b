"""Canonical normal form: expression trees <-> polynomial fractions.

A fraction is num / (dmono * prod F_i^e_i) where

* ``num`` is an expanded polynomial (quadratic atoms reduced to degree <= 1),
* ``dmono`` is a single denominator monomial over non-quadratic atoms,
* each denominator factor F_i is a multi-term, quadratic-atom-free,
  integer-primitive, squarefree polynomial, the factors pairwise coprime.

Keeping the denominator factored makes every cancellation a cheap exact
trial division and keeps gcd computations confined to factor-sized
polynomials.  Canonicality: the reduced denominator of a rational function
is unique, its monomial/squarefree-coprime decomposition is unique, and the
scale is fixed by integer-primitive factors with positive leading
coefficients plus a coefficient-one denominator monomial.  Quadratic atoms
(cos, sinh, sqrt) are conjugated out of denominators, so all division
happens in a genuine unique-factorization domain.

The module-level memo tables are append-only maps from immutable trees to
deterministic results; concurrent use can at worst duplicate a computation,
never corrupt a value.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd
from typing import NamedTuple

from ..errors import UnsupportedExpressionError
from . import poly as P
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
    rational,
)


class Frac(NamedTuple):
    num: dict
    dmono: tuple      # ((atom_key, exp), ...) sorted, non-quadratic atoms
    dfactors: tuple   # ((fkey, exp), ...) sorted; fkey freezes the factor poly


NO_DEN = ((), ())
ZERO_FRAC = Frac({}, (), ())

ATOM_EXPR: dict = {}
DIR_EXPR: dict = {}

_TOFRAC_MEMO: dict = {}
_NORMAL_MEMO: dict = {}
_CANONICAL: set = set()


def _register_atom(expr: Expr):
    key = expr.sort_key()
    ATOM_EXPR.setdefault(key, expr)
    return key


def _fkey(p: dict):
    return tuple(sorted(p.items()))


def _unkey(fkey) -> dict:
    return dict(fkey)


def den_is_one(f: Frac) -> bool:
    return not f.dmono and not f.dfactors


def den_poly(f: Frac) -> dict:
    """Expanded denominator polynomial."""
    out = {(f.dmono, ()): Fraction(1)}
    for fk, e in f.dfactors:
        out = P.p_mul(out, P.p_pow(_unkey(fk), e))
    return out


# -- factor normalization -------------------------------------------------------


def _split_by_atom(p: dict, ak):
    a, b = {}, {}
    for (atoms, evec), c in p.items():
        hit = False
        rest = []
        for k, e in atoms:
            if k == ak:
                hit = True
            else:
                rest.append((k, e))
        key = (tuple(rest), evec) if hit else (atoms, evec)
        (b if hit else a)[key] = c
    return a, b


def _conjugate_out(p: dict):
    """Multiply p by conjugates until quadratic-atom-free.

    Returns (norm, cofactor) with norm = p * cofactor quadratic-atom-free.
    """
    cofactor = dict(P.P_ONE)
    while True:
        quads = {ak for (atoms, _) in p for ak, _e in atoms if ak in P.QUADRATIC}
        if not quads:
            return p, cofactor
        ak = max(quads)
        a, b = _split_by_atom(p, ak)
        conj = P.p_sub(a, P.p_mul(b, P.p_atom(ak)))
        cofactor = P.p_mul(cofactor, conj)
        p = P.p_sub(P.p_mul(a, a), P.p_mul(P.p_mul(b, b), P.QUADRATIC[ak]))
        if not p:
            raise ZeroDivisionError("denominator reduced to zero")


def _coeff_content(p: dict) -> Fraction:
    num_g = 0
    den_l = 1
    for c in p.values():
        num_g = _int_gcd(num_g, abs(c.numerator))
        den_l = den_l * c.denominator // _int_gcd(den_l, c.denominator)
    return Fraction(num_g, den_l)


def _primitive(p: dict):
    """Scale p to integer-primitive with positive leading coefficient.

    Returns (p_scaled, scale) with p = scale * p_scaled.
    """
    c = _coeff_content(p)
    _, lc = P.p_leading(p)
    if lc < 0:
        c = -c
    if c == 1:
        return p, Fraction(1)
    return P.p_scale(p, 1 / c), c


def _mono_content(p: dict):
    """Largest monomial dividing every term (non-quadratic atoms only)."""
    amin: dict = None
    for (atoms, _), _c in p.items():
        d = {ak: e for ak, e in atoms if ak not in P.QUADRATIC}
        if amin is None:
            amin = d
        else:
            amin = {ak: min(e, d[ak]) for ak, e in amin.items() if ak in d}
        if not amin:
            return {}
    return amin or {}


def _p_partial(p: dict, var):
    """Formal partial derivative with respect to one atom."""
    out = {}
    for (atoms, evec), c in p.items():
        for i, (ak, e) in enumerate(atoms):
            if ak == var:
                rest = atoms[:i] + ((ak, e - 1),) * (e > 1) + atoms[i + 1:]
                key = (tuple(rest), evec)
                out[key] = out.get(key, 0) + c * e
                break
    return {k: c for k, c in out.items() if c}


def _sqfree_rebased(p: dict):
    """Squarefree decomposition [(factor, multiplicity)] of a rebased poly."""
    atoms = sorted(P._atom_set(p))
    if not atoms:
        return [(p, 1)]
    v = atoms[0]
    dp = _p_partial(p, v)
    if not dp:
        # free of v after all (exponent bookkeeping); recurse on the rest
        return [(p, 1)]
    g = P._gcd_core(p, dp)
    g, _ = _primitive(g)
    if P.p_is_const(g):
        return [(p, 1)]
    radical = P.p_divexact(p, g)
    if radical is None:
        return [(p, 1)]
    sub = _sqfree_decompose_core(g)
    rest = radical
    out = []
    for f, m in sub:
        q = P.p_divexact(rest, f)
        if q is not None:
            rest = q
            out.append((f, m + 1))
        else:
            out.append((f, m))
    rest, _ = _primitive(rest)
    if not P.p_is_const(rest):
        out.append((rest, 1))
    return out


def _sqfree_decompose_core(p: dict):
    # split off content with respect to the main variable first
    atoms = sorted(P._atom_set(p))
    if not atoms:
        return [(p, 1)]
    v = atoms[0]
    uni = P._as_univar(p, v)
    if len(uni) == 1 and 0 in uni:
        return _sqfree_decompose_core(uni[0])
    cont = P._gcd_list(list(uni.values()))
    cont, _ = _primitive(cont)
    if P.p_is_const(cont):
        return _sqfree_rebased(p)
    pp = P.p_divexact(p, cont)
    return _sqfree_decompose_core(cont) + _sqfree_rebased(pp)


def sqfree_factors(p: dict):
    """Squarefree decomposition of a quadratic-atom-free polynomial."""
    (rp,), aux = P._exp_rebase([p])
    parts = _sqfree_decompose_core(rp)
    if aux:
        parts = [(P._exp_unbase(f, aux), m) for f, m in parts]
    return parts


# -- denominator assembly --------------------------------------------------------


class _DenBuilder:
    """Accumulates denominator contributions, normalizing as it goes.

    Every normalization that rescales a factor multiplies ``self.mult`` (a
    polynomial) or ``self.coeff`` instead, to be applied to the numerator.
    """

    def __init__(self):
        self.mono: dict = {}
        self.factors: list = []   # [poly, exp]
        self.mult: dict = dict(P.P_ONE)
        self.coeff: Fraction = Fraction(1)

    def add_mono(self, atoms, exp: int = 1):
        for ak, e in atoms:
            if ak in P.QUADRATIC:
                # 1/q = q / rho(q): q joins the numerator, rho the denominator
                self.mult = P.p_mul(self.mult, P.p_atom(ak, e * exp))
                self.add_poly(P.QUADRATIC[ak], e * exp)
            else:
                self.mono[ak] = self.mono.get(ak, 0) + e * exp

    def add_evec(self, evec, exp: int = 1):
        if evec:
            neg = tuple(sorted((dk, -c * exp) for dk, c in evec))
            self.mult = P.p_mul(self.mult, P.p_exp_term(neg))

    def add_poly(self, p: dict, exp: int = 1):
        if not p:
            raise ZeroDivisionError("zero denominator in expression fraction")
        if len(p) == 1:
            ((atoms, evec), c), = p.items()
            self.coeff /= c ** exp
            self.add_mono(atoms, exp)
            self.add_evec(evec, exp)
            return
        p, cofactor = _conjugate_out(p)
        if not P.p_is_const(cofactor):
            self.mult = P.p_mul(self.mult, P.p_pow(cofactor, exp))
        elif cofactor != P.P_ONE:
            self.coeff *= P.p_const_value(cofactor) ** exp
        mono = _mono_content(p)
        if mono:
            div = {(tuple(sorted(mono.items())), ()): Fraction(1)}
            p = P.p_divexact(p, div)
            self.add_mono(tuple(mono.items()), exp)
        shift = P.exp_min_shift(p)
        if shift:
            # p = exp(shift) * p0, so 1/p^e carries exp(-shift*e) to the top
            p = P.p_shift_exp(p, shift)
            comp = tuple(sorted((dk, -c * exp) for dk, c in shift.items()))
            self.mult = P.p_mul(self.mult, P.p_exp_term(comp))
        p, scale = _primitive(p)
        if scale != 1:
            self.coeff /= scale ** exp
        if P.p_is_const(p):
            val = P.p_const_value(p)
            if val != 1:
                self.coeff /= val ** exp
            return
        if len(p) == 1:
            self.add_poly(p, exp)
            return
        # squarefree split; the decomposition may drop a rational unit, so
        # recover it from leading coefficients (multiplicative in the order):
        # p = unit * prod f_i^m_i  ==>  lc(p) = unit * prod lc(f_i)^m_i
        _, unit = P.p_leading(p)
        parts = []
        for f_raw, mult in sqfree_factors(p):
            f, _scale = _primitive(f_raw)
            _, lcf = P.p_leading(f)
            unit /= lcf ** mult
            parts.append((f, mult))
        if unit != 1:
            self.coeff /= unit ** exp
        for f, mult in parts:
            if P.p_is_const(f):
                continue
            if len(f) == 1:
                self.add_poly(f, mult * exp)
            else:
                self._merge_factor(f, mult * exp)

    def add_fkey(self, fk, exp: int):
        self._merge_factor(_unkey(fk), exp)

    def _merge_factor(self, f: dict, exp: int):
        """Insert a normalized factor, refining to keep the base coprime."""
        queue = [(f, exp)]
        while queue:
            f, exp = queue.pop()
            if exp == 0 or P.p_is_const(f):
                continue
            placed = False
            for item in self.factors:
                b = item[0]
                if b == f:
                    item[1] += exp
                    placed = True
                    break
                g = P.p_gcd(b, f)
                g, _ = _primitive(g)
                if P.p_is_const(g):
                    continue
                # split both against the common part
                b_rest = P.p_divexact(b, g)
                f_rest = P.p_divexact(f, g)
                if b_rest is None or f_rest is None:
                    continue
                b_rest, bs = _primitive(b_rest)
                old_exp = item[1]
                self.factors.remove(item)
                if bs != 1:
                    self.coeff /= bs ** old_exp
                if not P.p_is_const(b_rest):
                    queue.append((b_rest, old_exp))
                queue.append((g, old_exp + exp))
                f_rest, fs = _primitive(f_rest)
                if fs != 1:
                    self.coeff /= fs ** exp
                if not P.p_is_const(f_rest):
                    queue.append((f_rest, exp))
                placed = True
                break
            if not placed:
                self.factors.append([f, exp])


def _divide_coords(num: dict, g: dict):
    """num / g if every quadratic-basis coordinate divides, else None."""
    quot = {}
    for qm, c in P.quad_split(num).items():
        q = P.p_divexact(c, g)
        if q is None:
            return None
        quot[qm] = q
    return P.quad_join(quot)


def _num_content(num: dict) -> dict:
    """gcd of the numerator's quadratic-basis coordinates."""
    g: dict = {}
    for c in P.quad_split(num).values():
        g = P.p_gcd(g, c)
        if P.p_is_const(g):
            return dict(P.P_ONE)
    return g


def _finalize(num: dict, den: _DenBuilder) -> Frac:
    num = P.p_mul(num, den.mult)
    if den.coeff != 1:
        num = P.p_scale(num, den.coeff)
    if not num:
        return ZERO_FRAC
    # cancel the denominator monomial against the numerator
    if den.mono:
        nmin = None
        for (atoms, _), _c in num.items():
            d = dict(atoms)
            cur = {ak: min(d.get(ak, 0), e) for ak, e in den.mono.items()}
            nmin = cur if nmin is None else {
                ak: min(e, cur[ak]) for ak, e in nmin.items()}
            if not any(nmin.values()):
                break
        common = {ak: e for ak, e in (nmin or {}).items() if e > 0}
        if common:
            div = {(tuple(sorted(common.items())), ()): Fraction(1)}
            num = P.p_divexact(num, div)
            for ak, e in common.items():
                den.mono[ak] -= e
    # cancel factors against the numerator content, refining factors by the
    # gcd so cancellation does not depend on how the denominator was split
    gnum = _num_content(num) if den.factors else dict(P.P_ONE)
    reduced = []
    queue = list(den.factors)
    while queue:
        f, e = queue.pop()
        if e <= 0 or P.p_is_const(f):
            continue
        if P.p_is_const(gnum):
            reduced.append((f, e))
            continue
        g, _ = _primitive(P.p_gcd(gnum, f))
        if P.p_is_const(g):
            reduced.append((f, e))
            continue
        rest = P.p_divexact(f, g)
        if rest is not None and not P.p_is_const(rest):
            queue.append((rest, e))
        k = 0
        stopped = False
        while k < e:
            smaller = _divide_coords(num, g)
            if smaller is None:
                stopped = True
                break
            num = smaller
            gq = P.p_divexact(gnum, g)
            gnum = gq if gq is not None else _num_content(num)
            k += 1
        if e - k > 0:
            if stopped and k > 0:
                # g may be composite with partial multiplicities left in the
                # numerator; recompute the content and let it split further
                gnum = _num_content(num)
                queue.append((g, e - k))
            else:
                reduced.append((g, e - k))
    # canonical shape: one squarefree factor per exponent class
    classes: dict = {}
    for f, e in reduced:
        classes[e] = P.p_mul(classes[e], f) if e in classes else f
    out_factors = []
    for e, f in classes.items():
        f, scale = _primitive(f)
        if scale != 1:
            num = P.p_scale(num, 1 / scale ** e)
        out_factors.append((_fkey(f), e))
    dmono = tuple(sorted((ak, e) for ak, e in den.mono.items() if e > 0))
    return Frac(num, dmono, tuple(sorted(out_factors)))


def f_make(num: dict, den_contribs) -> Frac:
    """Fraction from a numerator polynomial and (poly_or_frackey, exp) pairs."""
    den = _DenBuilder()
    for item, e in den_contribs:
        if isinstance(item, tuple):
            den.add_fkey(item, e)
        else:
            den.add_poly(item, e)
    return _finalize(num, den)


# -- fraction arithmetic -----------------------------------------------------------


def f_const(c) -> Frac:
    return Frac(P.p_const(c), (), ())


def f_is_const(f: Frac):
    if den_is_one(f):
        return P.p_const_value(f.num)
    return None


def _den_items(f: Frac):
    """Denominator as (mono_dict, {fkey: exp})."""
    return dict(f.dmono), dict(f.dfactors)


def f_add(f1: Frac, f2: Frac) -> Frac:
    if not f1.num:
        return f2
    if not f2.num:
        return f1
    if f1.dmono == f2.dmono and f1.dfactors == f2.dfactors:
        den = _DenBuilder()
        den.mono = dict(f1.dmono)
        den.factors = [[_unkey(fk), e] for fk, e in f1.dfactors]
        return _finalize(P.p_add(f1.num, f2.num), den)
    m1, fac1 = _den_items(f1)
    m2, fac2 = _den_items(f2)
    mono_lcm = dict(m1)
    for ak, e in m2.items():
        mono_lcm[ak] = max(mono_lcm.get(ak, 0), e)
    fac_lcm = dict(fac1)
    for fk, e in fac2.items():
        fac_lcm[fk] = max(fac_lcm.get(fk, 0), e)

    def lift(num, mono, fac):
        extra_atoms = tuple(sorted(
            (ak, e - mono.get(ak, 0)) for ak, e in mono_lcm.items()
            if e > mono.get(ak, 0)))
        if extra_atoms:
            num = P.p_mul(num, {(extra_atoms, ()): Fraction(1)})
        for fk, e in fac_lcm.items():
            d = e - fac.get(fk, 0)
            if d > 0:
                num = P.p_mul(num, P.p_pow(_unkey(fk), d))
        return num

    total = P.p_add(lift(f1.num, m1, fac1), lift(f2.num, m2, fac2))
    den = _DenBuilder()
    den.mono = mono_lcm
    den.factors = [[_unkey(fk), e] for fk, e in fac_lcm.items()]
    return _finalize(total, den)


def f_neg(f: Frac) -> Frac:
    return Frac(P.p_neg(f.num), f.dmono, f.dfactors)


def f_sub(f1, f2):
    return f_add(f1, f_neg(f2))


def f_mul(f1: Frac, f2: Frac) -> Frac:
    if not f1.num or not f2.num:
        return ZERO_FRAC
    den = _DenBuilder()
    den.mono = dict(f1.dmono)
    for ak, e in f2.dmono:
        den.mono[ak] = den.mono.get(ak, 0) + e
    merged = dict(f1.dfactors)
    for fk, e in f2.dfactors:
        merged[fk] = merged.get(fk, 0) + e
    den.factors = [[_unkey(fk), e] for fk, e in merged.items()]
    return _finalize(P.p_mul(f1.num, f2.num), den)


def f_inv(f: Frac) -> Frac:
    if not f.num:
        raise ZeroDivisionError("inverse of zero expression")
    num = {(f.dmono, ()): Fraction(1)}
    for fk, e in f.dfactors:
        num = P.p_mul(num, P.p_pow(_unkey(fk), e))
    den = _DenBuilder()
    den.add_poly(f.num, 1)
    return _finalize(num, den)


def f_div(f1: Frac, f2: Frac) -> Frac:
    return f_mul(f1, f_inv(f2))


def f_ipow(f: Frac, k: int) -> Frac:
    if k == 0:
        return f_const(1)
    if k < 0:
        return f_ipow(f_inv(f), -k)
    if k == 1:
        return f
    den = _DenBuilder()
    den.mono = {ak: e * k for ak, e in f.dmono}
    den.factors = [[_unkey(fk), e * k] for fk, e in f.dfactors]
    return _finalize(P.p_pow(f.num, k), den)


# -- square roots ---------------------------------------------------------------


def _square_part(n: int):
    s, r = 1, 1
    d = 2
    m = n
    while d * d <= m:
        e = 0
        while m % d == 0:
            m //= d
            e += 1
        if e:
            s *= d ** (e // 2)
            if e % 2:
                r *= d
        d += 1
    r *= m
    return s, r


def f_sqrt(f: Frac) -> Frac:
    """Square root with canonical content extraction.

    sqrt(N/D) = sqrt(N*D)/D.  Even atom powers, common exponential content
    and rational square factors are pulled out of the radicand; the primitive
    remainder becomes a square-root atom whose square reduces back to it.
    """
    if not f.num:
        return ZERO_FRAC
    p = P.p_mul(f.num, den_poly(f))
    atom_min: dict = None
    for (atoms, _), _c in p.items():
        d = dict(atoms)
        if atom_min is None:
            atom_min = d
        else:
            atom_min = {ak: min(e, d.get(ak, 0)) for ak, e in atom_min.items()}
    pulled = {ak: e - e % 2 for ak, e in (atom_min or {}).items() if e >= 2}
    if pulled:
        div = {(tuple(sorted(pulled.items())), ()): Fraction(1)}
        p = P.p_divexact(p, div)
    shift = P.exp_min_shift(p)
    if shift:
        p = P.p_shift_exp(p, shift)
    for (_, evec), _c in p.items():
        if evec:
            raise UnsupportedExpressionError(
                "square root of an exponential-polynomial is outside the kernel class"
            )
    p, scale = _primitive(p)
    c = abs(scale)
    sign = scale < 0
    s_num, r_num = _square_part(c.numerator)
    s_den, r_den = _square_part(c.denominator)
    coeff = Fraction(s_num, s_den * r_den)
    root_const = r_num * r_den
    half_mono = tuple(sorted((ak, e // 2) for ak, e in pulled.items()))
    half_vec = tuple(sorted((dk, v / 2) for dk, v in shift.items()))
    out = {(half_mono, half_vec): coeff}
    if P.p_is_const(p):
        # constant radicand: one atom carrying the sign and squarefree part
        arg = root_const * (-1 if sign else 1)
        if arg != 1:
            out = P.p_mul(out, _sqrt_atom_poly(P.p_const(arg)))
    else:
        # split the squarefree rational part; the sign stays with the poly
        if root_const != 1:
            out = P.p_mul(out, _sqrt_atom_poly(P.p_const(root_const)))
        out = P.p_mul(out, _sqrt_atom_poly(P.p_neg(p) if sign else p))
    den = _DenBuilder()
    den.mono = dict(f.dmono)
    den.factors = [[_unkey(fk), e] for fk, e in f.dfactors]
    return _finalize(out, den)


def _sqrt_atom_poly(radicand: dict) -> dict:
    expr = SquareRoot(_build_poly_expr(radicand))
    key = _register_atom(expr)
    P.register_quadratic(key, radicand)
    return P.p_atom(key)


# -- transcendental atoms ---------------------------------------------------------


def _num_is_negative(f: Frac) -> bool:
    if not f.num:
        return False
    _, lc = P.p_leading(f.num)
    return lc < 0


def _frac_key(f: Frac):
    return (tuple(sorted(f.num.items())), f.dmono, f.dfactors)


def _exp_vector(f: Frac):
    vec: dict = {}
    if den_is_one(f):
        for mono, c in f.num.items():
            vec[("m", mono)] = vec.get(("m", mono), 0) + c
            DIR_EXPR.setdefault(("m", mono), _build_poly_expr({mono: Fraction(1)}))
    else:
        _, lc = P.p_leading(f.num)
        prim = Frac(P.p_scale(f.num, 1 / lc), f.dmono, f.dfactors)
        key = ("f", _frac_key(prim))
        vec[key] = lc
        DIR_EXPR.setdefault(key, _build_frac_expr(prim))
    return {k: v for k, v in vec.items() if v}


def _function_frac(kind: str, argf: Frac) -> Frac:
    cval = f_is_const(argf)
    if cval == 0:
        return f_const({"exp": 1, "sin": 0, "cos": 1, "sinh": 0, "cosh": 1}[kind])
    if kind == "exp":
        vec = _exp_vector(argf)
        return Frac(P.p_exp_term(tuple(sorted(vec.items()))), (), ())
    negate = _num_is_negative(argf)
    if negate:
        argf = f_neg(argf)
    arg_expr = _build_frac_expr(argf)
    if kind in ("sin", "cos"):
        sin_key = _register_atom(FunctionApp("sin", arg_expr))
        cos_key = _register_atom(FunctionApp("cos", arg_expr))
        # cos^2 u -> 1 - sin^2 u
        P.register_quadratic(cos_key, P.p_sub(dict(P.P_ONE), P.p_atom(sin_key, 2)))
        key = sin_key if kind == "sin" else cos_key
        flip = negate and kind == "sin"
    else:
        sinh_key = _register_atom(FunctionApp("sinh", arg_expr))
        cosh_key = _register_atom(FunctionApp("cosh", arg_expr))
        # sinh^2 u -> cosh^2 u - 1
        P.register_quadratic(sinh_key, P.p_sub(P.p_atom(cosh_key, 2), dict(P.P_ONE)))
        key = sinh_key if kind == "sinh" else cosh_key
        flip = negate and kind == "sinh"
    f = Frac(P.p_atom(key), (), ())
    return f_neg(f) if flip else f


# -- tree -> fraction ----------------------------------------------------------------


def to_frac(e: Expr) -> Frac:
    cached = _TOFRAC_MEMO.get(e)
    if cached is not None:
        return cached
    f = _to_frac(e)
    _TOFRAC_MEMO[e] = f
    return f


def _to_frac(e: Expr) -> Frac:
    if isinstance(e, Integer):
        return f_const(e.value)
    if isinstance(e, Rational):
        return f_const(Fraction(e.num, e.den))
    if isinstance(e, (Variable, Parameter)):
        return Frac(P.p_atom(_register_atom(e)), (), ())
    if isinstance(e, Sum):
        out = ZERO_FRAC
        for t in e.terms:
            out = f_add(out, to_frac(t))
        return out
    if isinstance(e, Product):
        out = f_const(1)
        for fct in e.factors:
            out = f_mul(out, to_frac(fct))
            if not out.num:
                return ZERO_FRAC
        return out
    if isinstance(e, Power):
        expf = to_frac(e.exponent)
        q = f_is_const(expf)
        if q is None:
            raise UnsupportedExpressionError(
                "power exponents must be rational constants"
            )
        base = to_frac(e.base)
        if q.denominator == 1:
            return f_ipow(base, q.numerator)
        if q.denominator == 2:
            return f_ipow(f_sqrt(base), q.numerator)
        raise UnsupportedExpressionError(
            f"unsupported power exponent {q}; only integers and halves"
        )
    if isinstance(e, SquareRoot):
        return f_sqrt(to_frac(e.arg))
    if isinstance(e, FunctionApp):
        return _function_frac(e.kind, to_frac(e.arg))
    if isinstance(e, UnevaluatedIntegral):
        integrand = _build_frac_expr(to_frac(e.integrand))
        atom = UnevaluatedIntegral(integrand, e.var)
        return Frac(P.p_atom(_register_atom(atom)), (), ())
    raise UnsupportedExpressionError(f"unsupported node kind {type(e).__name__}")


# -- fraction -> tree -----------------------------------------------------------------


def _build_mono_factors(monokey):
    atoms, evec = monokey
    factors = []
    for ak, e in atoms:
        atom = ATOM_EXPR[ak]
        factors.append(atom if e == 1 else Power(atom, Integer(e)))
    if evec:
        terms = []
        for dk, c in sorted(evec):
            terms.append((c, [DIR_EXPR[dk]]))
        factors.append(FunctionApp("exp", _build_sum(terms)))
    return factors


def _build_term(coeff: Fraction, factors) -> Expr:
    flat = []
    for f in factors:
        if isinstance(f, Product):
            flat.extend(f.factors)
        elif isinstance(f, Integer) and f.value == 1:
            continue  # unit factor from the constant exponential direction
        else:
            flat.append(f)
    factors = sorted(flat, key=lambda f: f.sort_key())
    if coeff == 1 and factors:
        return factors[0] if len(factors) == 1 else Product(tuple(factors))
    coeff_node = rational(coeff)
    if not factors:
        return coeff_node
    return Product((coeff_node, *factors))


def _build_sum(terms) -> Expr:
    built = [_build_term(c, f) for c, f in terms]
    if not built:
        return Integer(0)
    if len(built) == 1:
        return built[0]
    return Sum(tuple(built))


def _build_poly_expr(p: dict) -> Expr:
    if not p:
        return Integer(0)
    monos = sorted(p, key=P.mono_order_key, reverse=True)
    return _build_sum([(p[m], _build_mono_factors(m)) for m in monos])


def _build_frac_expr(f: Frac) -> Expr:
    inv_factors = [
        Power(_build_poly_expr(_unkey(fk)), Integer(-e)) for fk, e in f.dfactors
    ]
    if not f.dmono and not inv_factors:
        return _build_poly_expr(f.num)
    if not f.dfactors:
        # monomial denominator: distribute into terms with net exponents
        den_atoms = dict(f.dmono)
        terms = []
        for m in sorted(f.num, key=P.mono_order_key, reverse=True):
            atoms, evec = m
            net = dict(atoms)
            for ak, e in den_atoms.items():
                r = net.get(ak, 0) - e
                if r:
                    net[ak] = r
                else:
                    net.pop(ak, None)
            factors = []
            for ak, e in sorted(net.items()):
                atom = ATOM_EXPR[ak]
                factors.append(atom if e == 1 else Power(atom, Integer(e)))
            if evec:
                factors.extend(_build_mono_factors(((), evec)))
            terms.append((f.num[m], factors))
        return _build_sum(terms)
    for ak, e in f.dmono:
        inv_factors.append(Power(ATOM_EXPR[ak], Integer(-e)))
    num = _build_poly_expr(f.num)
    if isinstance(num, Product):
        factors = sorted(num.factors + tuple(inv_factors),
                         key=lambda t: t.sort_key())
        return Product(tuple(factors))
    if isinstance(num, Integer) and num.value == 1:
        if len(inv_factors) == 1:
            return inv_factors[0]
        return Product(tuple(sorted(inv_factors, key=lambda t: t.sort_key())))
    factors = sorted([num] + inv_factors, key=lambda t: t.sort_key())
    return Product(tuple(factors))


# -- public API -------------------------------------------------------------------------


def normalize(e: Expr) -> Expr:
    """Canonical normal form; idempotent; structural equality == math equality."""
    e = as_expr(e)
    if e in _CANONICAL:
        return e
    cached = _NORMAL_MEMO.get(e)
    if cached is not None:
        return cached
    out = _build_frac_expr(to_frac(e))
    _TOFRAC_MEMO.setdefault(out, to_frac(e))
    _NORMAL_MEMO[e] = out
    _CANONICAL.add(out)
    return out


def is_zero(e: Expr) -> bool:
    return not to_frac(e).num


def substitute(e: Expr, bindings: dict) -> Expr:
    """Simultaneous substitution of Parameter/Variable nodes, then normalize."""
    table = {}
    for k, v in bindings.items():
        if not isinstance(k, (Parameter, Variable)):
            raise UnsupportedExpressionError(
                "substitution keys must be Parameter or Variable nodes"
            )
        table[k] = as_expr(v)
    return normalize(_subst(e, table))


def _subst(e: Expr, table: dict) -> Expr:
    hit = table.get(e)
    if hit is not None:
        return hit
    if isinstance(e, (Integer, Rational, Variable, Parameter)):
        return e
    if isinstance(e, Sum):
        return Sum(tuple(_subst(t, table) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(_subst(f, table) for f in e.factors))
    if isinstance(e, Power):
        return Power(_subst(e.base, table), _subst(e.exponent, table))
    if isinstance(e, SquareRoot):
        return SquareRoot(_subst(e.arg, table))
    if isinstance(e, FunctionApp):
        return FunctionApp(e.kind, _subst(e.arg, table))
    if isinstance(e, UnevaluatedIntegral):
        new_var = table.get(e.var, e.var)
        if not isinstance(new_var, Variable):
            raise UnsupportedExpressionError(
                "cannot substitute a non-variable for an integration variable"
            )
        return UnevaluatedIntegral(_subst(e.integrand, table), new_var)
    raise UnsupportedExpressionError(f"unsupported node kind {type(e).__name__}")

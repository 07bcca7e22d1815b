"""Sparse multivariate polynomial layer underneath expression normalization.

A polynomial maps monomials to exact rational coefficients.  A monomial is a
pair (atoms, expvec):

* ``atoms``: sorted tuple of (atom_key, positive int exponent).  Atom keys are
  the recursive sort keys of canonical expression atoms (variables,
  parameters, sin/cos/sinh/cosh applications, square roots, integrals).
* ``expvec``: sorted tuple of (direction_key, Fraction).  This is the
  exponential part: the monomial carries exp(sum of coeff * direction).
  Exponentials are units, so their coefficients may be negative or
  fractional; they never participate in gcd computations except as shifted
  integer auxiliary variables.

Some atoms are *quadratic*: cos (cos^2 u -> 1 - sin^2 u), sinh
(sinh^2 v -> cosh^2 v - 1) and square roots (sqrt(e)^2 -> e).  Multiplication
reduces their exponents below 2, so every polynomial is linear in each
quadratic atom.  gcd and exact division are only ever called on polynomials
free of quadratic atoms (a genuine unique-factorization domain); the fraction
layer guarantees that by conjugating quadratic atoms out of denominators and
by splitting numerators into coordinates first.
"""

from __future__ import annotations

from fractions import Fraction

EMPTY_MONO = ((), ())

# atom_key -> reduction polynomial rho with q^2 == rho (registered by the
# normalization layer when it creates a quadratic atom)
QUADRATIC = {}


def register_quadratic(atom_key, rho):
    for (mono, evec), _ in rho.items():
        if evec:
            raise AssertionError("quadratic reduction must be exponential-free")
    QUADRATIC.setdefault(atom_key, rho)


# -- construction -------------------------------------------------------------


def p_zero():
    return {}

def p_const(c) -> dict:
    c = Fraction(c)
    return {EMPTY_MONO: c} if c else {}

P_ONE = {EMPTY_MONO: Fraction(1)}


def p_atom(atom_key, exp=1) -> dict:
    return _term(((atom_key, exp),), (), Fraction(1))


def p_exp_term(expvec, coeff=Fraction(1)) -> dict:
    return {((), tuple(expvec)): Fraction(coeff)}


def _term(atoms, expvec, coeff) -> dict:
    """Single term with quadratic reduction applied."""
    if not coeff:
        return {}
    for i, (ak, e) in enumerate(atoms):
        if e >= 2 and ak in QUADRATIC:
            rest = atoms[:i] + ((ak, 1),) * (e % 2 != 0) + atoms[i + 1:]
            rest = tuple(sorted(rest))
            out = p_mul(_term(rest, expvec, coeff), p_pow(QUADRATIC[ak], e // 2))
            return out
    return {(tuple(atoms), tuple(expvec)): coeff}


# -- arithmetic ---------------------------------------------------------------


def p_add(a: dict, b: dict) -> dict:
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def p_neg(a: dict) -> dict:
    return {k: -c for k, c in a.items()}

def p_sub(a: dict, b: dict) -> dict:
    return p_add(a, p_neg(b))


def p_scale(a: dict, c) -> dict:
    c = Fraction(c)
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def _mono_mul(m1, m2):
    (a1, e1), (a2, e2) = m1, m2
    if not a1:
        atoms = a2
    elif not a2:
        atoms = a1
    else:
        d = dict(a1)
        for ak, e in a2:
            d[ak] = d.get(ak, 0) + e
        atoms = tuple(sorted(d.items()))
    if not e1:
        evec = e2
    elif not e2:
        evec = e1
    else:
        d = dict(e1)
        for dk, c in e2:
            s = d.get(dk, 0) + c
            if s:
                d[dk] = s
            else:
                del d[dk]
        evec = tuple(sorted(d.items()))
    return atoms, evec


def p_mul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if a == P_ONE:
        return dict(b)
    if b == P_ONE:
        return dict(a)
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            atoms, evec = _mono_mul(m1, m2)
            for k, c in _term(atoms, evec, c1 * c2).items():
                s = out.get(k, 0) + c
                if s:
                    out[k] = s
                else:
                    del out[k]
    return out


def p_pow(a: dict, n: int) -> dict:
    if n < 0:
        raise ValueError("negative polynomial power")
    out = dict(P_ONE)
    base = a
    while n:
        if n & 1:
            out = p_mul(out, base)
        n >>= 1
        if n:
            base = p_mul(base, base)
    return out


def p_is_const(a: dict) -> bool:
    return not a or (len(a) == 1 and EMPTY_MONO in a)


def p_const_value(a: dict):
    """Fraction value if the polynomial is constant, else None."""
    if not a:
        return Fraction(0)
    if len(a) == 1 and EMPTY_MONO in a:
        return a[EMPTY_MONO]
    return None


# -- monomial order -----------------------------------------------------------
#
# Graded order on the atom part: total degree first, then a reverse-lex
# tiebreak (valid because of the grading; exponents are positive when
# present).  The exponential part is compared by plain lex over directions
# with absent coefficients read as zero — coefficients may be negative or
# fractional, so the sparse tuple encoding alone would not be a monomial
# order; the wrapper below does the merged walk.


class _VecKey:
    """Lex comparison of sparse rational vectors (absent = 0)."""

    __slots__ = ("vec",)

    def __init__(self, vec):
        self.vec = vec

    def _walk(self, other):
        a, b = self.vec, other.vec
        i = j = 0
        while i < len(a) or j < len(b):
            da = a[i][0] if i < len(a) else None
            db = b[j][0] if j < len(b) else None
            if da == db:
                ca, cb = a[i][1], b[j][1]
                if ca != cb:
                    return -1 if ca < cb else 1
                i += 1
                j += 1
            elif db is None or (da is not None and da < db):
                if a[i][1]:
                    return 1 if a[i][1] > 0 else -1
                i += 1
            else:
                if b[j][1]:
                    return -1 if b[j][1] > 0 else 1
                j += 1
        return 0

    def __eq__(self, other):
        return self.vec == other.vec

    def __lt__(self, other):
        return self._walk(other) < 0

    def __le__(self, other):
        return self._walk(other) <= 0

    def __gt__(self, other):
        return self._walk(other) > 0

    def __ge__(self, other):
        return self._walk(other) >= 0

    def __hash__(self):
        return hash(self.vec)


def mono_order_key(monokey):
    atoms, evec = monokey
    deg = sum(e for _, e in atoms)
    return (deg, tuple((ak, -e) for ak, e in atoms), _VecKey(evec))


def p_leading(a: dict):
    """(monokey, coeff) of the leading monomial."""
    k = max(a, key=mono_order_key)
    return k, a[k]


def _mono_divides(mt, ma):
    """Try dividing monomial ma by mt; return quotient monomial or None."""
    (ta, te), (aa, ae) = mt, ma
    da = dict(aa)
    for ak, e in ta:
        r = da.get(ak, 0) - e
        if r < 0:
            return None
        if r:
            da[ak] = r
        else:
            da.pop(ak, None)
    de = dict(ae)
    for dk, c in te:
        s = de.get(dk, 0) - c
        if s:
            de[dk] = s
        else:
            de.pop(dk, None)
    return tuple(sorted(da.items())), tuple(sorted(de.items()))


def p_divexact(a: dict, b: dict):
    """Exact division in the quadratic-atom-free ring; None if not divisible.

    Exponential parts are units: divisibility is judged after shifting both
    operands to non-negative integer exponents, and the unit difference is
    re-applied to the quotient.  Without this, division by a polynomial whose
    leading monomial carries an exponential never terminates.
    """
    if not a:
        return {}
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    bc = p_const_value(b)
    if bc is not None:
        return p_scale(a, 1 / bc)
    if any(evec for (_, evec) in a) or any(evec for (_, evec) in b):
        sa = exp_min_shift(a)
        sb = exp_min_shift(b)
        a0 = p_shift_exp(a, sa)
        b0 = p_shift_exp(b, sb)
        (ra, rb), aux = _exp_rebase([a0, b0])
        q = _divexact_core(ra, rb)
        if q is None:
            return None
        if aux:
            q = _exp_unbase(q, aux)
        unit = {d: sb.get(d, 0) - sa.get(d, 0)
                for d in set(sa) | set(sb)
                if sa.get(d, 0) != sb.get(d, 0)}
        return p_shift_exp(q, unit) if unit else q
    return _divexact_core(a, b)


def _divexact_core(a: dict, b: dict):
    lb, cb = p_leading(b)
    rem = dict(a)
    quo = {}
    while rem:
        la, ca = p_leading(rem)
        qm = _mono_divides(lb, la)
        if qm is None:
            return None
        qc = ca / cb
        quo[qm] = qc
        rem = p_sub(rem, p_mul({qm: qc}, b))
    return quo


# -- exponential handling for gcd --------------------------------------------


def exp_min_shift(a: dict) -> dict:
    """Per-direction minimum exponential coefficient over all monomials.

    Directions absent from a monomial count as 0, so the shift for a
    direction is min(0, coefficients...) unless it appears in every term.
    """
    if not a:
        return {}
    mins = {}
    counts = {}
    n = len(a)
    for (_, evec) in a:
        for dk, c in evec:
            counts[dk] = counts.get(dk, 0) + 1
            if dk not in mins or c < mins[dk]:
                mins[dk] = c
    out = {}
    for dk, m in mins.items():
        lo = m if counts[dk] == n else min(m, Fraction(0))
        if lo:
            out[dk] = lo
    return out


def p_shift_exp(a: dict, shift: dict) -> dict:
    """Multiply by exp(-sum shift[d]*d): subtract shift from every monomial."""
    if not shift:
        return dict(a)
    out = {}
    for (atoms, evec), c in a.items():
        d = dict(evec)
        for dk, s in shift.items():
            r = d.get(dk, 0) - s
            if r:
                d[dk] = r
            else:
                d.pop(dk, None)
        out[(atoms, tuple(sorted(d.items())))] = c
    return out


def _exp_rebase(polys):
    """Rewrite exponential parts as integer-exponent auxiliary atoms.

    Returns rebased copies of the input polynomials plus the mapping needed
    to undo the rebasing: aux atom key -> (direction key, lcm denominator).
    """
    dens = {}
    for p in polys:
        for (_, evec) in p:
            for dk, c in evec:
                q = Fraction(c).denominator
                dens[dk] = _lcm(dens.get(dk, 1), q)
    out = []
    for p in polys:
        np = {}
        for (atoms, evec), c in p.items():
            if evec:
                extra = tuple(((10, dk, dens[dk]), int(cc * dens[dk]))
                              for dk, cc in evec)
                atoms = tuple(sorted(atoms + extra))
            np[(atoms, ())] = c
        out.append(np)
    aux = {(10, dk, q): (dk, q) for dk, q in dens.items()}
    return out, aux


def _exp_unbase(p: dict, aux: dict) -> dict:
    out = {}
    for (atoms, evec), c in p.items():
        assert not evec
        keep = []
        back = {}
        for ak, e in atoms:
            if ak in aux:
                dk, q = aux[ak]
                back[dk] = back.get(dk, 0) + Fraction(e, q)
            else:
                keep.append((ak, e))
        out[(tuple(sorted(keep)), tuple(sorted(back.items())))] = c
    return out


def _lcm(a, b):
    from math import gcd

    return a * b // gcd(a, b)


# -- gcd -----------------------------------------------------------------------


def p_gcd(a: dict, b: dict) -> dict:
    """gcd up to a rational unit, valid on quadratic-atom-free polynomials.

    Exponential units are stripped first, so the result never claims an
    exponential factor beyond genuine polynomial structure in exp atoms.
    """
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    a = p_shift_exp(a, exp_min_shift(a))
    b = p_shift_exp(b, exp_min_shift(b))
    (ra, rb), aux = _exp_rebase([a, b])
    g = _gcd_core(ra, rb)
    return _exp_unbase(g, aux) if aux else g


def _gcd_core(a: dict, b: dict) -> dict:
    if not a:
        return b
    if not b:
        return a
    if p_is_const(a) or p_is_const(b):
        return dict(P_ONE)
    va = _atom_set(a)
    vb = _atom_set(b)
    common = va & vb
    if not common:
        return dict(P_ONE)
    v = min(common)
    ua = _as_univar(a, v)
    ub = _as_univar(b, v)
    conta = _gcd_list(list(ua.values()))
    contb = _gcd_list(list(ub.values()))
    cont = _gcd_core(conta, contb)
    ppa = {d: p_divexact(c, conta) for d, c in ua.items()}
    ppb = {d: p_divexact(c, contb) for d, c in ub.items()}
    g = _univar_gcd(ppa, ppb, v)
    return p_mul(cont, g)


def _atom_set(a: dict):
    out = set()
    for (atoms, _) in a:
        for ak, _e in atoms:
            out.add(ak)
    return out


def _as_univar(a: dict, v):
    out = {}
    for (atoms, evec), c in a.items():
        d = 0
        rest = []
        for ak, e in atoms:
            if ak == v:
                d = e
            else:
                rest.append((ak, e))
        key = (tuple(rest), evec)
        bucket = out.setdefault(d, {})
        bucket[key] = bucket.get(key, 0) + c
    return {d: {k: c for k, c in p.items() if c} for d, p in out.items()}


def _from_univar(u: dict, v) -> dict:
    out = {}
    for d, p in u.items():
        for (atoms, evec), c in p.items():
            if d:
                atoms = tuple(sorted(atoms + ((v, d),)))
            out[(atoms, evec)] = out.get((atoms, evec), 0) + c
    return {k: c for k, c in out.items() if c}


def _gcd_list(polys):
    g = {}
    for p in polys:
        g = _gcd_core(g, p)
        if p_is_const(g) and g:
            return dict(P_ONE)
    return g


def _univar_gcd(ua, ub, v):
    """Subresultant pseudo-remainder sequence on primitive-part inputs.

    The subresultant divisors keep coefficient growth polynomial without the
    per-step content computations that make the primitive PRS explode on
    coprime inputs.
    """
    if max(ua) < max(ub):
        ua, ub = ub, ua
    g = dict(P_ONE)
    h = dict(P_ONE)
    while True:
        da, db = max(ua), max(ub)
        if db == 0:
            return dict(P_ONE)
        delta = da - db
        r = _prem(ua, ub)
        if not r:
            break
        if max(r) == 0:
            return dict(P_ONE)
        divisor = p_mul(g, p_pow(h, delta))
        nxt = {}
        for d, c in r.items():
            q = p_divexact(c, divisor)
            if q is None:
                # fall back to content-stripped remainder (stays exact)
                cont = _gcd_list(list(r.values()))
                nxt = {dd: p_divexact(cc, cont) for dd, cc in r.items()}
                break
            nxt[d] = q
        g = ub[db]
        if delta == 0:
            pass  # h unchanged by a degree-preserving step of size 0
        elif delta == 1:
            h = dict(g)
        else:
            num = p_pow(g, delta)
            den = p_pow(h, delta - 1)
            q = p_divexact(num, den)
            h = q if q is not None else num
        ua, ub = ub, nxt
    cont = _gcd_list(list(ub.values()))
    pp = {d: p_divexact(c, cont) for d, c in ub.items()}
    return _from_univar(pp, v)


def _prem(ua, ub):
    """Strict pseudo-remainder: lc(b)^(deg a - deg b + 1) * a mod b."""
    da, db = max(ua), max(ub)
    lb = ub[db]
    r = dict(ua)
    for d in range(da, db - 1, -1):
        lr = r.pop(d, None)
        nr = {dd: p_mul(c, lb) for dd, c in r.items()}
        if lr is not None:
            for dd, c in ub.items():
                if dd == db:
                    continue
                t = p_mul(lr, c)
                tgt = dd + d - db
                nr[tgt] = p_sub(nr.get(tgt, {}), t) if tgt in nr else p_neg(t)
        r = {dd: c for dd, c in nr.items() if c}
        if not r:
            break
    return r


# -- numerator coordinates ----------------------------------------------------


def quad_split(a: dict):
    """Decompose over square-free quadratic-atom products.

    Returns {quad_mono: coordinate_poly} where quad_mono is a sorted tuple of
    quadratic atom keys (each to the first power) and every coordinate is
    quadratic-atom-free.
    """
    out = {}
    for (atoms, evec), c in a.items():
        quads = []
        rest = []
        for ak, e in atoms:
            if ak in QUADRATIC:
                assert e == 1, "quadratic atom exponent must be reduced"
                quads.append(ak)
            else:
                rest.append((ak, e))
        key = tuple(quads)
        bucket = out.setdefault(key, {})
        mk = (tuple(rest), evec)
        bucket[mk] = bucket.get(mk, 0) + c
    return {k: {m: c for m, c in p.items() if c} for k, p in out.items()}


def quad_join(coords: dict) -> dict:
    out = {}
    for quads, p in coords.items():
        qm = tuple((ak, 1) for ak in quads)
        for (atoms, evec), c in p.items():
            full = tuple(sorted(atoms + qm))
            key = (full, evec)
            out[key] = out.get(key, 0) + c
    return {k: c for k, c in out.items() if c}


def quad_free(a: dict) -> bool:
    return all(ak not in QUADRATIC for (atoms, _) in a for ak, _e in atoms)

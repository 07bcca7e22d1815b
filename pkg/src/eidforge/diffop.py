"""First-order linear differential operators beta*D + alpha and their chains.

Operators store their coefficients as expressions rather than closures so
chains can be printed, serialized and expanded symbolically.  The module also
carries the closed-form antiderivative pattern table used to assemble general
solutions of factorized second-order equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import UnsupportedExpressionError
from .expr import (
    Expr,
    FunctionApp,
    Integer,
    Power,
    Product,
    Sum,
    as_expr,
    const_fraction,
    contains,
    differentiate,
    exp,
    integral,
    normalize,
    rational,
    to_prefix,
    x,
)
from .expr.normal import den_is_one, to_frac, _build_poly_expr, _unkey
from .expr import poly as _poly


@dataclass(frozen=True)
class FirstOrderOp:
    """The operator beta*D + alpha acting on functions of x."""

    beta: Expr
    alpha: Expr

    def __post_init__(self):
        beta = normalize(as_expr(self.beta))
        alpha = normalize(as_expr(self.alpha))
        if isinstance(beta, Integer) and beta.value == 0:
            raise UnsupportedExpressionError(
                "beta must not vanish identically; that is a multiplication "
                "operator, not a first-order differential operator"
            )
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def shifted_derivative(cls, alpha) -> "FirstOrderOp":
        """The operator D - alpha (beta = 1)."""
        return cls(Integer(1), normalize(Integer(-1) * as_expr(alpha)))

    def reverse_partner(self) -> "FirstOrderOp":
        """The reverse-transform operator beta*D - alpha - beta'."""
        return FirstOrderOp(
            self.beta, normalize(Integer(-1) * (self.alpha + differentiate(self.beta)))
        )

    def apply(self, f: Expr) -> Expr:
        f = as_expr(f)
        return normalize(self.beta * differentiate(f) + self.alpha * f)

    def to_prefix(self) -> str:
        return f"(op {to_prefix(self.beta)} {to_prefix(self.alpha)})"

    def __str__(self):
        from .expr import Integer, to_text

        if self.beta == Integer(1):
            neg = normalize(Integer(-1) * self.alpha)
            return f"(D - {to_text(neg)})"
        return f"({to_text(self.beta)} D + {to_text(self.alpha)})"


def apply_op(op: FirstOrderOp, f: Expr) -> Expr:
    return op.apply(f)


@dataclass(frozen=True)
class OperatorChain:
    """Ordered composition of first-order operators; ops[0] is applied first."""

    ops: tuple

    def __init__(self, ops):
        object.__setattr__(self, "ops", tuple(ops))

    def apply(self, f: Expr) -> Expr:
        out = as_expr(f)
        for op in self.ops:
            out = op.apply(out)
        return normalize(out)

    def __len__(self):
        return len(self.ops)

    def __str__(self):
        """Factors printed left of the operand in application order."""
        return " ".join(str(op) for op in reversed(self.ops))


def apply_chain(chain: OperatorChain, f: Expr) -> Expr:
    return chain.apply(f)


def riccati_residual(alpha: Expr, a0: Expr, lam: Expr) -> Expr:
    """alpha' + alpha^2 + a0 - lambda; zero certifies a factorization seed."""
    alpha = as_expr(alpha)
    return normalize(differentiate(alpha) + alpha * alpha + as_expr(a0) - as_expr(lam))


# -- closed-form antiderivatives ----------------------------------------------


def _linear_combo(target: dict, basis: list):
    """Rational coefficients q_i with target = sum q_i * basis_i, or None."""
    rows: dict = {}
    for i, b in enumerate(basis):
        for mono, c in b.items():
            rows.setdefault(mono, [Fraction(0)] * len(basis))[i] = c
    for mono, c in target.items():
        rows.setdefault(mono, [Fraction(0)] * len(basis))
    monos = sorted(rows, key=_poly.mono_order_key)
    mat = [rows[m] + [target.get(m, Fraction(0))] for m in monos]
    ncols = len(basis)
    sol = [None] * ncols
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, len(mat)) if mat[r][col]), None)
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        pr = mat[row]
        for r in range(len(mat)):
            if r != row and mat[r][col]:
                k = mat[r][col] / pr[col]
                mat[r] = [a - k * b for a, b in zip(mat[r], pr)]
        row += 1
    # back-substitute from the echelon form
    for r in mat:
        lead = next((c for c in range(ncols) if r[c]), None)
        if lead is None:
            if r[-1]:
                return None
            continue
        sol[lead] = r[-1] / r[lead]
    return [s if s is not None else Fraction(0) for s in sol]


def _candidate_kernels(alpha: Expr, hints=()):
    """Candidate functions u for which alpha might be q*u'/u + k.

    Hints first, then trig/hyperbolic kernels found in the tree, then the
    canonical denominator as a last resort.
    """
    seen = []

    def push(e):
        e = normalize(e)
        if e not in seen and contains(e, x):
            seen.append(e)
    for h in hints:
        push(h)
    stack = [alpha]
    while stack:
        node = stack.pop()
        if isinstance(node, FunctionApp) and node.kind != "exp":
            pair = ("sin", "cos") if node.kind in ("sin", "cos") else ("sinh", "cosh")
            for k in pair:
                push(FunctionApp(k, node.arg))
        stack.extend(node.children())
    f = to_frac(alpha)
    for fk, _e in f.dfactors:
        push(_build_poly_expr(_unkey(fk)))
    if not den_is_one(f):
        from .expr.normal import den_poly

        push(_build_poly_expr(den_poly(f)))
    return seen


def _key_has_x(key) -> bool:
    if key == (2, "x"):
        return True
    if isinstance(key, tuple):
        return any(_key_has_x(k) for k in key)
    return False


def _mono_is_xfree(monokey) -> bool:
    atoms, evec = monokey
    if any(_key_has_x(ak) for ak, _ in atoms):
        return False
    return not any(_key_has_x(dk) for dk, _ in evec)


def _xfree_quotients(target: dict, u: dict):
    """x-free monomials mu with mu * (monomial of u) occurring in target."""
    out = set()
    for t in target:
        for v in u:
            mu = _poly._mono_divides(v, t)
            if mu is not None and _mono_is_xfree(mu):
                out.add(mu)
    out.add(_poly.EMPTY_MONO)
    return sorted(out, key=_poly.mono_order_key)


def exp_integral(alpha: Expr, hints=()) -> Expr | None:
    """Closed form of exp(integral of alpha dx), or None.

    Matches alpha = q*u'/u + k with rational q and an x-free constant k for
    kernel candidates u (polynomial, trig, hyperbolic and exponential),
    which is the shape of every logarithmic derivative the generator emits.
    """
    alpha = normalize(as_expr(alpha))
    if not contains(alpha, x):
        return normalize(exp(alpha * x))
    for u in _candidate_kernels(alpha, hints):
        du = differentiate(u)
        prod = to_frac(alpha * u)
        fu, fdu = to_frac(u), to_frac(du)
        if not (den_is_one(fu) and den_is_one(fdu) and den_is_one(prod)):
            continue
        mus = _xfree_quotients(prod.num, fu.num)
        basis = [fdu.num]
        basis += [_poly.p_mul({mu: Fraction(1)}, fu.num) for mu in mus]
        combo = _linear_combo(prod.num, basis)
        if combo is None:
            continue
        q = combo[0]
        k_poly: dict = {}
        for mu, c in zip(mus, combo[1:]):
            if c:
                k_poly = _poly.p_add(k_poly, {mu: c})
        result = Integer(1)
        if q:
            result = result * Power(u, rational(q))
        if k_poly:
            k_expr = _build_poly_expr(k_poly)
            result = result * exp(k_expr * x)
        return normalize(result)
    return None


def antiderivative(f: Expr) -> Expr:
    """Termwise closed-form antiderivative; unmatched parts stay symbolic.

    The table covers rational powers of x, exponential monomials and the
    trig/hyperbolic kernels with constant-derivative arguments: everything a
    seed solution or an inverted-derivative step needs.
    """
    f = normalize(as_expr(f))
    if isinstance(f, Sum):
        return normalize(Sum(tuple(antiderivative(t) for t in f.terms)))
    term = _antiderivative_term(f)
    return normalize(term) if term is not None else integral(f)


def _antiderivative_term(f: Expr) -> Expr | None:
    if not contains(f, x):
        return f * x
    if isinstance(f, Product):
        consts = [g for g in f.factors if not contains(g, x)]
        rest = [g for g in f.factors if contains(g, x)]
        if consts:
            inner = _antiderivative_term(
                rest[0] if len(rest) == 1 else Product(tuple(rest)))
            if inner is None:
                return None
            return Product(tuple(consts) + (inner,))
        return None
    if f == x:
        return Product((rational(Fraction(1, 2)), Power(x, Integer(2))))
    if isinstance(f, Power):
        q = const_fraction(f.exponent)
        base = f.base
        if q is None or contains(f.exponent, x):
            return None
        db = differentiate(base)
        if contains(db, x) or q == -1:
            return None
        # (u)^q with u' constant
        return normalize(Power(base, rational(q + 1)) / (rational(q + 1) * db))
    if isinstance(f, FunctionApp):
        du = differentiate(f.arg)
        if contains(du, x):
            return None
        table = {"exp": ("exp", 1), "sin": ("cos", -1), "cos": ("sin", 1),
                 "sinh": ("cosh", 1), "cosh": ("sinh", 1)}
        kind, sign = table[f.kind]
        return normalize(Integer(sign) * FunctionApp(kind, f.arg) / du)
    return None


def solution_from_factorization(alpha1: Expr, alpha2: Expr, c1: Expr,
                                c2: Expr) -> Expr:
    """General solution of (D - alpha2)(D - alpha1) y = 0.

    y = E1 * (c1 + c2 * integral(E21)) with E1 = exp(int alpha1) and
    E21 = exp(int (alpha2 - alpha1)); closed forms where the pattern table
    reaches, unevaluated integrals otherwise.
    """
    alpha1 = normalize(as_expr(alpha1))
    alpha2 = normalize(as_expr(alpha2))
    e1 = exp_integral(alpha1)
    if e1 is None:
        e1 = exp(integral(alpha1))
    diff = normalize(alpha2 - alpha1)
    e21 = exp_integral(diff)
    if e21 is None:
        e21 = exp(integral(diff))
    inner = antiderivative(e21)
    return normalize(e1 * (as_expr(c1) + as_expr(c2) * inner))

"""Antiderivatives with respect to one coordinate, all others held fixed.

Three cases are handled: Laurent polynomials in the variable (except the
``v^-1`` term, which would need a logarithm), rational functions whose
integral is again rational, and linear combinations of atom monomials whose
derivative rules close on a finite span (``sin``/``cos`` style).
"""
from __future__ import annotations

from fractions import Fraction

from .errors import UnsupportedFragment
from .symexpr import ATOM, ONE, ZERO, BundleSpec, Expr

_MAX_SPAN = 48


def antiderivative(e: Expr, v, spec: BundleSpec) -> Expr:
    """Some ``P`` with ``spec.partial(P, v) == e``; raises UnsupportedFragment."""
    if e.is_zero():
        return ZERO
    if not spec.depends_on(e, v):
        return e * Expr.var(v)
    moving = {(ATOM, k) for k, atom in enumerate(spec.atoms) if v in atom.rules}
    if not any(a in moving for a in e.variables()):
        out = _integrate_rational(e, v, spec)
    else:
        out = _integrate_atoms(e, v, spec, moving)
    if spec.partial(out, v) != e:
        raise UnsupportedFragment("antiderivative failed its own check")
    return out


def _integrate_rational(e: Expr, v, spec: BundleSpec) -> Expr:
    if v not in e.den_vars():
        out = ZERO
        for k, c in e.poly_in(v).items():
            if k == -1:
                raise UnsupportedFragment(
                    f"integrating in {spec.var_name(v)} needs a logarithm"
                )
            out = out + c * Expr.var(v, k + 1) / (k + 1)
        return out
    return _ratint(e, v, spec)


def _ratint(e: Expr, v, spec: BundleSpec) -> Expr:
    import sympy
    from sympy.integrals.rationaltools import ratint

    vs = sorted(e.variables())
    syms = {w: sympy.Symbol(f"v{k}") for k, w in enumerate(vs)}
    back = {s: w for w, s in syms.items()}

    def to_sym(p):
        return sympy.Add(
            *[
                sympy.Rational(c.numerator, c.denominator)
                * sympy.Mul(*[syms[w] ** k for w, k in m])
                for m, c in p.items()
            ]
        )

    res = ratint(to_sym(e.num) / to_sym(e.den), syms[v])
    if res.has(sympy.log) or res.has(sympy.atan) or res.has(sympy.RootSum):
        raise UnsupportedFragment(
            f"integrating in {spec.var_name(v)} leaves the rational fragment"
        )
    num, den = sympy.fraction(sympy.together(res))
    gens = sorted(syms.values(), key=lambda s: int(s.name[1:]))
    return _from_sympy_poly(num, gens, back) / _from_sympy_poly(den, gens, back)


def _from_sympy_poly(p, gens, back) -> Expr:
    import sympy

    poly = sympy.Poly(sympy.expand(p), *gens)
    terms = {}
    for exps, c in poly.terms():
        c = sympy.Rational(c)
        m = tuple((back[g], k) for g, k in zip(gens, exps) if k)
        terms[m] = Fraction(int(c.p), int(c.q))
    return Expr(terms)


def _split_by_atoms(e: Expr, moving: set) -> dict:
    """Map each monomial in the moving variables to its coefficient."""
    out: dict = {}
    den = e.denominator()
    for m, c in e.num.items():
        am = tuple((w, k) for w, k in m if w in moving)
        rest = tuple((w, k) for w, k in m if w not in moving)
        out.setdefault(am, {})[rest] = c
    return {am: Expr(p) / den for am, p in out.items()}


def _integrate_atoms(e: Expr, v, spec: BundleSpec, moving: set) -> Expr:
    if any(w in moving for w in e.den_vars()):
        raise UnsupportedFragment("atom in a denominator")
    # powers of v ride along with the atoms so that v^k * atom terms close too
    plain: dict = {}
    mixed: dict = {}
    for m, c in e.num.items():
        (mixed if any(w in moving for w, _ in m) else plain)[m] = c
    den = e.denominator()
    out = _integrate_rational(Expr(plain) / den, v, spec) if plain else ZERO
    if not mixed:
        return out
    if v in den.variables():
        raise UnsupportedFragment(
            f"atom term with {spec.var_name(v)} in a denominator"
        )
    keys = moving | {v}
    parts = _split_by_atoms(Expr(mixed) / den, keys)
    span = list(parts)
    for am in list(parts):
        # one extra power of v lets secular terms like t*(c^2 + s^2) appear
        bumped = dict(am)
        bumped[v] = bumped.get(v, 0) + 1
        up = tuple(sorted(bumped.items()))
        if up not in span:
            span.append(up)
    images = {}
    k = 0
    while k < len(span):
        am = span[k]
        dv = spec.partial(Expr({am: Fraction(1)}), v)
        img = _split_by_atoms(dv, keys) if not dv.is_zero() else {}
        for key, coef in img.items():
            if spec.depends_on(coef, v):
                raise UnsupportedFragment("atom derivative rules do not close")
            if key not in span:
                span.append(key)
                if len(span) > _MAX_SPAN:
                    raise UnsupportedFragment("atom derivative span too large")
        images[am] = img
        k += 1
    rows = [[images[b].get(r, ZERO) for b in span] for r in span]
    rhs = [parts.get(r, ZERO) for r in span]
    sol = _solve(rows, rhs)
    if sol is None:
        raise UnsupportedFragment(f"no atom antiderivative in {spec.var_name(v)}")
    for b, p in zip(span, sol):
        out = out + p * Expr({b: Fraction(1)})
    return out


def _solve(rows, rhs):
    """Gaussian elimination over Expr; free unknowns set to zero."""
    n = len(rows[0]) if rows else 0
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(a)) if not a[i][col].is_zero()), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = ONE / a[r][col]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and not a[i][col].is_zero():
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(a)):
        if not a[i][n].is_zero():
            return None
    sol = [ZERO] * n
    for i, col in enumerate(pivots):
        sol[col] = a[i][n]
    return sol

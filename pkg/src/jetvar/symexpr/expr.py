"""Canonical exact rational functions over Q.

An :class:`Expr` is ``num / den`` where ``num`` is a Laurent polynomial and
``den`` is a polynomial with no monomial factor, coprime to ``num`` and monic
in its largest monomial.  That representation is unique, so structural
equality is mathematical equality and the zero test is ``not num``.

Variables are opaque sortable keys.  The bundle layer uses ``(0, lam)`` for
base coordinates, ``(1, i, MultiIndex)`` for jet coordinates and ``(2, a)``
for atoms, which fixes the global order base < jets < atoms.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Mapping, Optional

Var = Hashable
Monomial = tuple  # sorted tuple of (var, nonzero int exponent)
Poly = dict  # Monomial -> Fraction

_ONE_MONO: Monomial = ()


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        s = d.get(v, 0) + e
        if s:
            d[v] = s
        else:
            del d[v]
    return tuple(sorted(d.items()))


def mono_pow(a: Monomial, k: int) -> Monomial:
    return tuple((v, e * k) for v, e in a) if k else ()


def poly_add(a: Poly, b: Poly, scale=1) -> Poly:
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, 0) + c * scale
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def poly_mul(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out: Poly = {}
    for m2, c2 in b.items():
        for m1, c1 in a.items():
            m = mono_mul(m1, m2)
            s = out.get(m, 0) + c1 * c2
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def poly_scale(a: Poly, c, mono: Monomial = ()) -> Poly:
    if not c:
        return {}
    if not mono:
        return {m: v * c for m, v in a.items()}
    return {mono_mul(m, mono): v * c for m, v in a.items()}


def poly_vars(p: Poly) -> set:
    return {v for m in p for v, _ in m}


def _leading(p: Poly) -> Monomial:
    return max(p)


def _monomial_content(p: Poly) -> Monomial:
    """Per-variable minimum exponent over all terms (absent counts as 0)."""
    vs = poly_vars(p)
    out = []
    for v in sorted(vs):
        e = min(dict(m).get(v, 0) for m in p)
        if e:
            out.append((v, e))
    return tuple(out)


@lru_cache(maxsize=None)
def _ring(nvars: int):
    from sympy import QQ
    from sympy.polys.rings import ring

    names = " ".join(f"v{k}" for k in range(nvars))
    R, *_ = ring(names, QQ)
    return R


def _cancel(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """Remove the polynomial gcd of two (non-Laurent) polynomials."""
    from sympy import QQ

    vs = sorted(poly_vars(num) | poly_vars(den))
    if not vs:
        return num, den
    pos = {v: k for k, v in enumerate(vs)}
    R = _ring(len(vs))

    def to_ring(p: Poly):
        terms = {}
        for m, c in p.items():
            exps = [0] * len(vs)
            for v, e in m:
                exps[pos[v]] = e
            terms[tuple(exps)] = QQ(c.numerator, c.denominator)
        return R.from_dict(terms)

    def back(rp) -> Poly:
        out = {}
        for exps, c in rp.terms():
            m = tuple((vs[k], e) for k, e in enumerate(exps) if e)
            out[m] = Fraction(int(c.numerator), int(c.denominator))
        return out

    a, b = to_ring(num).cancel(to_ring(den))
    return back(a), back(b)


class Expr:
    """Immutable canonical rational function with rational coefficients."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Optional[Poly] = None, _canonical=False):
        if _canonical:
            self.num = num
            self.den = den if den is not None else {(): Fraction(1)}
        else:
            n, d = _normalize(num, den)
            self.num, self.den = n, d
        self._hash = None

    # construction -------------------------------------------------------
    @staticmethod
    def const(c) -> "Expr":
        c = Fraction(c)
        return Expr({(): c} if c else {}, None, True)

    @staticmethod
    def var(v: Var, exp: int = 1) -> "Expr":
        return Expr({((v, exp),): Fraction(1)}, None, True)

    @staticmethod
    def from_poly(p: Poly) -> "Expr":
        return Expr({m: c for m, c in p.items() if c}, None, True)

    # queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_poly(self) -> bool:
        return len(self.den) == 1

    def is_const(self) -> bool:
        return self.is_poly() and all(not m for m in self.num)

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("not a constant")
        return self.num.get((), Fraction(0))

    def variables(self) -> set:
        return poly_vars(self.num) | poly_vars(self.den)

    def den_vars(self) -> set:
        return poly_vars(self.den)

    def is_single_var(self) -> Optional[Var]:
        if self.is_poly() and len(self.num) == 1:
            (m, c), = self.num.items()
            if c == 1 and len(m) == 1 and m[0][1] == 1:
                return m[0][0]
        return None

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "Expr":
        other = _coerce(other)
        if self.is_poly() and other.is_poly():
            return Expr(poly_add(self.num, other.num), None, True)
        if self.den == other.den:
            return Expr(poly_add(self.num, other.num), self.den)
        return Expr(
            poly_add(poly_mul(self.num, other.den), poly_mul(other.num, self.den)),
            poly_mul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr({m: -c for m, c in self.num.items()}, self.den, True)

    def __sub__(self, other) -> "Expr":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Expr":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "Expr":
        other = _coerce(other)
        if self.is_poly() and other.is_poly():
            return Expr(poly_mul(self.num, other.num), None, True)
        return Expr(poly_mul(self.num, other.num), poly_mul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> "Expr":
        if self.is_zero():
            raise ZeroDivisionError("division by an expression that normalizes to zero")
        return Expr(self.den, self.num)

    def __truediv__(self, other) -> "Expr":
        other = _coerce(other)
        if other.is_const():
            return self * Expr.const(1 / other.const_value())
        return self * other.inverse()

    def __rtruediv__(self, other) -> "Expr":
        return _coerce(other) * self.inverse()

    def __pow__(self, k: int) -> "Expr":
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return self.inverse() ** (-k)
        if self.is_poly() and len(self.num) == 1:
            (m, c), = self.num.items()
            return Expr({mono_pow(m, k): c**k}, None, True)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # equality -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Expr):
            try:
                other = _coerce(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    def __repr__(self):
        return f"Expr({self.num!r}, {self.den!r})"

    # evaluation ---------------------------------------------------------
    def evaluate(self, point: Mapping[Var, Fraction]) -> Fraction:
        n = _eval_poly(self.num, point)
        d = _eval_poly(self.den, point)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at evaluation point")
        return n / d

    def derive(self, rule: Callable[[Var], Optional["Expr"]]) -> "Expr":
        """Apply the derivation fixed by ``rule`` (image of each variable).

        ``rule`` returns ``None`` for variables the derivation annihilates.
        """
        dnum = _derive_poly(self.num, rule)
        if self.is_poly():
            return dnum
        dden = _derive_poly(self.den, rule)
        n = Expr(self.num, None, True)
        d = Expr(self.den, None, True)
        return (dnum * d - n * dden) / (d * d)

    def substitute(self, images: Mapping[Var, "Expr"]) -> "Expr":
        """Ring homomorphism replacing variables by expressions."""
        return _subst_poly(self.num, images) / _subst_poly(self.den, images)

    def numerator(self) -> "Expr":
        return Expr(self.num, None, True)

    def denominator(self) -> "Expr":
        return Expr(self.den, None, True)

    def poly_in(self, v: Var) -> dict[int, "Expr"]:
        """Coefficients of the numerator as a Laurent polynomial in ``v``.

        Only meaningful when the denominator is free of ``v``; the
        coefficients carry the denominator.
        """
        out: dict[int, Poly] = {}
        for m, c in self.num.items():
            k = 0
            rest = []
            for w, e in m:
                if w == v:
                    k = e
                else:
                    rest.append((w, e))
            bucket = out.setdefault(k, {})
            bucket[tuple(rest)] = c
        den = Expr(self.den, None, True)
        return {k: Expr(p, None, True) / den for k, p in out.items()}


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Expr.const(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Expr")


def _eval_poly(p: Poly, point) -> Fraction:
    total = Fraction(0)
    for m, c in p.items():
        t = c
        for v, e in m:
            t *= Fraction(point[v]) ** e
        total += t
    return total


def _derive_poly(p: Poly, rule) -> Expr:
    acc: Poly = {}
    slow: list[Expr] = []
    cache: dict = {}
    for m, c in p.items():
        for idx, (v, e) in enumerate(m):
            if v in cache:
                dv = cache[v]
            else:
                dv = cache[v] = rule(v)
            if dv is None or dv.is_zero():
                continue
            if e == 1:
                reduced = m[:idx] + m[idx + 1 :]
            else:
                reduced = m[:idx] + ((v, e - 1),) + m[idx + 1 :]
            coef = c * e
            if dv.is_poly():
                for m2, c2 in dv.num.items():
                    mm = mono_mul(reduced, m2)
                    s = acc.get(mm, 0) + coef * c2
                    if s:
                        acc[mm] = s
                    else:
                        acc.pop(mm, None)
            else:
                slow.append(Expr({reduced: coef}, None, True) * dv)
    out = Expr(acc, None, True)
    for s in slow:
        out = out + s
    return out


def _subst_poly(p: Poly, images) -> Expr:
    out = ZERO
    for m, c in p.items():
        t = Expr.const(c)
        for v, e in m:
            img = images.get(v)
            t = t * (Expr.var(v, e) if img is None else img**e)
        out = out + t
    return out


def _normalize(num: Poly, den: Optional[Poly]) -> tuple[Poly, Poly]:
    num = {m: Fraction(c) for m, c in num.items() if c}
    one = {(): Fraction(1)}
    if not num:
        return {}, one
    if den is None:
        return num, one
    den = {m: Fraction(c) for m, c in den.items() if c}
    if not den:
        raise ZeroDivisionError("division by an expression that normalizes to zero")
    if len(den) == 1:
        (m, c), = den.items()
        return poly_scale(num, 1 / c, mono_pow(m, -1)), one
    # strip monomial content of the denominator
    g = _monomial_content(den)
    if g:
        ginv = mono_pow(g, -1)
        den = poly_scale(den, 1, ginv)
        num = poly_scale(num, 1, ginv)
    # clear negative exponents of the numerator
    lows = {}
    for m in num:
        for v, e in m:
            if e < 0 and e < lows.get(v, 0):
                lows[v] = e
    if lows:
        h = tuple(sorted((v, -e) for v, e in lows.items()))
        num = poly_scale(num, 1, h)
        den = poly_scale(den, 1, h)
    num, den = _cancel(num, den)
    if len(den) == 1:
        (m, c), = den.items()
        return poly_scale(num, 1 / c, mono_pow(m, -1)), one
    g = _monomial_content(den)
    if g:
        ginv = mono_pow(g, -1)
        den = poly_scale(den, 1, ginv)
        num = poly_scale(num, 1, ginv)
    lc = den[_leading(den)]
    if lc != 1:
        num = poly_scale(num, 1 / lc)
        den = poly_scale(den, 1 / lc)
    return num, den


ZERO = Expr({}, None, True)
ONE = Expr.const(1)


def expr_sum(items: Iterable[Expr]) -> Expr:
    acc: Poly = {}
    rest = ZERO
    for e in items:
        if e.is_poly():
            for m, c in e.num.items():
                s = acc.get(m, 0) + c
                if s:
                    acc[m] = s
                else:
                    acc.pop(m, None)
        else:
            rest = rest + e
    return Expr(acc, None, True) + rest

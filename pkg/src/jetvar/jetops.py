"""Total derivatives, the Euler-Lagrange operator, and d_H-exactness.

All sums over multi-indices run over *symmetric* indices, each jet
coordinate ``y^i_L`` counted once, and use plain partials with respect to
that coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, prod
from typing import Sequence

from .antiderivative import antiderivative
from .errors import InternalInconsistency, NotExact, UnsupportedFragment
from .multiindex import MultiIndex, indices_up_to
from .symexpr import ATOM, BASE, JET, ZERO, BundleSpec, Expr, expr_sum


@dataclass(frozen=True)
class Lagrangian:
    """Horizontal density ``density * dx^1 ^ ... ^ dx^n``."""

    spec: BundleSpec
    density: Expr

    @property
    def order(self) -> int:
        return self.spec.jet_order(self.density)


@dataclass(frozen=True)
class SourceForm:
    """Components ``delta_i L`` of ``delta_i L theta^i ^ omega``."""

    spec: BundleSpec
    components: tuple

    def __getitem__(self, i: int) -> Expr:
        return self.components[i]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __sub__(self, other: "SourceForm") -> "SourceForm":
        return SourceForm(self.spec, tuple(a - b for a, b in zip(self.components, other.components)))


def total_derivative(e: Expr, lam: int, spec: BundleSpec) -> Expr:
    return spec.total_derivative(e, lam)


def total_derivative_multi(e: Expr, lam: MultiIndex | Sequence[int], spec: BundleSpec) -> Expr:
    directions = lam.directions() if isinstance(lam, MultiIndex) else tuple(lam)
    for d in directions:
        e = spec.total_derivative(e, d)
    return e


def total_divergence(components: Sequence[Expr], spec: BundleSpec) -> Expr:
    """``sum_lam d_lam sigma^lam``."""
    return expr_sum(spec.total_derivative(c, lam) for lam, c in enumerate(components))


def jet_vars(e: Expr, spec: BundleSpec, field: int | None = None) -> list:
    out = [v for v in spec.coordinates_of(e) if v[0] == JET]
    if field is not None:
        out = [v for v in out if v[1] == field]
    return sorted(out)


def euler_lagrange(L: Lagrangian | Expr, spec: BundleSpec | None = None) -> SourceForm:
    if isinstance(L, Lagrangian):
        spec, density = L.spec, L.density
    else:
        density = L
    comps = []
    for i in range(spec.m):
        terms = []
        for v in jet_vars(density, spec, i):
            lam = v[2]
            p = spec.partial(density, v)
            if p.is_zero():
                continue
            t = total_derivative_multi(p, lam, spec)
            terms.append(-t if lam.degree() % 2 else t)
        comps.append(expr_sum(terms))
    return SourceForm(spec, tuple(comps))


def is_variationally_trivial(L: Lagrangian) -> bool:
    return euler_lagrange(L).is_zero()


def invert_total_divergence(h: Expr, spec: BundleSpec) -> tuple:
    """Components ``sigma^lam`` with ``sum_lam d_lam sigma^lam == h`` exactly."""
    if not euler_lagrange(h, spec).is_zero():
        raise NotExact("density has a nonzero Euler-Lagrange expression")
    if h.is_zero():
        return tuple([ZERO] * spec.n)
    if spec.n == 1:
        sigma = (_invert_1d(h, spec),)
    else:
        sigma = _invert_homotopy(h, spec)
    if total_divergence(sigma, spec) != h:
        raise InternalInconsistency("reconstructed divergence does not match")
    return sigma


def _invert_1d(h: Expr, spec: BundleSpec) -> Expr:
    t = (BASE, 0)
    sigma = ZERO
    for _ in range(10_000):
        if h.is_zero():
            return sigma
        jets = jet_vars(h, spec)
        if not jets:
            return sigma + antiderivative(h, t, spec)
        top = max(v[2].degree() for v in jets)
        v = max(w for w in jets if w[2].degree() == top)
        if top == 0:
            raise NotExact("density depends on undifferentiated fields")
        lower = (JET, v[1], v[2].minus_direction(0))
        c = spec.partial(h, v)
        if spec.depends_on(c, v):
            raise NotExact("density is not affine in its top jet variable")
        P = antiderivative(c, lower, spec)
        sigma = sigma + P
        h = h - spec.total_derivative(P, 0)
        if spec.depends_on(h, v):
            raise InternalInconsistency("integration by parts did not remove top variable")
    raise InternalInconsistency("integration by parts did not terminate")


def _check_polynomial_fragment(h: Expr, spec: BundleSpec) -> None:
    for v in h.den_vars():
        if v[0] == JET or (v[0] == ATOM and spec.has_jets(Expr.var(v))):
            raise UnsupportedFragment("denominator depends on fibre jets")
    for m in h.num:
        for v, e in m:
            if v[0] == JET and e < 0:
                raise UnsupportedFragment("negative power of a fibre jet")
            if v[0] == ATOM and spec.has_jets(Expr.var(v)):
                raise UnsupportedFragment("atom depending on fibre jets")


def _homogeneous_parts(h: Expr) -> dict:
    parts: dict = {}
    den = h.denominator()
    for m, c in h.num.items():
        d = sum(e for v, e in m if v[0] == JET)
        parts.setdefault(d, {})[m] = c
    return {d: Expr(p) / den for d, p in parts.items()}


def higher_euler(f: Expr, i: int, J: MultiIndex, spec: BundleSpec) -> Expr:
    """Higher Euler operator ``E_i^J f``."""
    terms = []
    for v in jet_vars(f, spec, i):
        lam = v[2]
        if not lam.contains(J):
            continue
        K = lam - J
        p = spec.partial(f, v)
        if p.is_zero():
            continue
        w = prod(comb(a, b) for a, b in zip(lam, J))
        t = total_derivative_multi(p, K, spec) * w
        terms.append(-t if K.degree() % 2 else t)
    return expr_sum(terms)


def _invert_homotopy(h: Expr, spec: BundleSpec) -> tuple:
    _check_polynomial_fragment(h, spec)
    n = spec.n
    sigma = [ZERO] * n
    for d, part in sorted(_homogeneous_parts(h).items()):
        if d == 0:
            sigma[0] = sigma[0] + antiderivative(part, (BASE, 0), spec)
            continue
        order = spec.jet_order(part)
        for lam in range(n):
            acc = []
            for i in range(spec.m):
                yi = spec.y(i)
                for I in indices_up_to(n, max(order - 1, 0)):
                    E = higher_euler(part, i, I.add_direction(lam), spec)
                    if E.is_zero():
                        continue
                    w = Expr.const(I[lam] + 1) / (I.degree() + 1)
                    acc.append(total_derivative_multi(yi * E, I, spec) * w)
            sigma[lam] = sigma[lam] + expr_sum(acc) / d
    return tuple(sigma)

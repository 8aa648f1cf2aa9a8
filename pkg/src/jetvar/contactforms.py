"""Finite-order fragment of the variational bicomplex.

A form is a finite sum of monomials ``c * theta_1 ^ ... ^ theta_k ^ dx^a ^ ...``
with all contact factors written first, each group sorted, and the sign of
the sorting permutation folded into ``c``.  A contact generator is
``(i, MultiIndex)`` for ``theta^i_L = dy^i_L - y^i_{L+lam} dx^lam``; a
horizontal generator is the base direction ``lam``.

Conventions fixed here and used throughout the package:

* ``omega = dx^0 ^ ... ^ dx^{n-1}`` and ``omega_lam = d_lam _| omega``,
* interior products are graded derivations acting from the left,
* ``d_H phi = dx^lam ^ d_lam(phi)`` with ``d_lam`` the Lie derivative along the
  total derivative (``d_lam theta^i_L = theta^i_{L+lam}``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .errors import InternalInconsistency
from .jetops import Lagrangian, SourceForm, euler_lagrange, jet_vars
from .multiindex import MultiIndex, enumerate_indices
from .symexpr import JET, ONE, ZERO, BundleSpec, Expr


def _sort_sign(items: list) -> tuple[int, Optional[tuple]]:
    """Sort by insertion, returning the permutation sign; None on repeats."""
    items = list(items)
    sign = 1
    for a in range(1, len(items)):
        b = a
        while b > 0 and items[b - 1] > items[b]:
            items[b - 1], items[b] = items[b], items[b - 1]
            sign = -sign
            b -= 1
    for a in range(1, len(items)):
        if items[a - 1] == items[a]:
            return 0, None
    return sign, tuple(items)


class ContactForm:
    """Element of the (k, s)-graded algebra generated by theta^i_L and dx^lam."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: BundleSpec, terms: dict | None = None):
        self.spec = spec
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, spec):
        return cls(spec)

    @classmethod
    def function(cls, spec, f: Expr):
        return cls(spec, {((), ()): f})

    @classmethod
    def dx(cls, spec, lam: int):
        return cls(spec, {((), (lam,)): ONE})

    @classmethod
    def theta(cls, spec, i: int, lam: MultiIndex | None = None):
        lam = MultiIndex.zero(spec.n) if lam is None else lam
        return cls(spec, {(((i, lam),), ()): ONE})

    @classmethod
    def omega(cls, spec):
        return cls(spec, {((), tuple(range(spec.n))): ONE})

    @classmethod
    def omega_lam(cls, spec, lam: int):
        """``d_lam _| omega``: sign ``(-1)^lam`` times omega with dx^lam removed."""
        rest = tuple(a for a in range(spec.n) if a != lam)
        return cls(spec, {((), rest): Expr.const(-1 if lam % 2 else 1)})

    @classmethod
    def from_monomial(cls, spec, thetas, dxs, coef: Expr):
        s1, t = _sort_sign(thetas)
        s2, x = _sort_sign(dxs)
        if t is None or x is None:
            return cls(spec)
        return cls(spec, {(t, x): coef * (s1 * s2)})

    # arithmetic ---------------------------------------------------------
    def _accumulate(self, items: Iterable[tuple]) -> "ContactForm":
        out: dict = {}
        for key, c in items:
            if key in out:
                out[key] = out[key] + c
            else:
                out[key] = c
        return ContactForm(self.spec, out)

    def __add__(self, other: "ContactForm") -> "ContactForm":
        return self._accumulate(list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self) -> "ContactForm":
        return ContactForm(self.spec, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "ContactForm") -> "ContactForm":
        return self + (-other)

    def scale(self, f: Expr) -> "ContactForm":
        return ContactForm(self.spec, {k: v * f for k, v in self.terms.items()})

    def __mul__(self, f) -> "ContactForm":
        return self.scale(f if isinstance(f, Expr) else Expr.const(f))

    __rmul__ = __mul__

    def wedge(self, other: "ContactForm") -> "ContactForm":
        items = []
        for (ta, xa), ca in self.terms.items():
            for (tb, xb), cb in other.terms.items():
                s1, t = _sort_sign(ta + tb)
                if t is None:
                    continue
                s2, x = _sort_sign(xa + xb)
                if x is None:
                    continue
                sign = s1 * s2 * (-1 if (len(xa) * len(tb)) % 2 else 1)
                items.append(((t, x), ca * cb * sign))
        return self._accumulate(items)

    def __xor__(self, other):
        return self.wedge(other)

    # queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, ContactForm) and (self - other).is_zero()

    def bidegrees(self) -> set:
        return {(len(t), len(x)) for t, x in self.terms}

    def coefficient(self, thetas=(), dxs=()) -> Expr:
        return self.terms.get((tuple(thetas), tuple(dxs)), ZERO)

    def __repr__(self):
        return f"ContactForm({format_form(self)})"

    def format(self) -> str:
        return format_form(self)


def project(phi: ContactForm, k: int | None = None, s: int | None = None) -> ContactForm:
    """``h_k`` and/or ``h^s``: the part of contact degree k / horizontal degree s."""
    return ContactForm(
        phi.spec,
        {
            key: c
            for key, c in phi.terms.items()
            if (k is None or len(key[0]) == k) and (s is None or len(key[1]) == s)
        },
    )


def h0(phi: ContactForm) -> ContactForm:
    return project(phi, k=0)


def lie_total(phi: ContactForm, lam: int) -> ContactForm:
    """Lie derivative along the total derivative ``d_lam``."""
    spec = phi.spec
    items = []
    for (t, x), c in phi.terms.items():
        items.append(((t, x), spec.total_derivative(c, lam)))
        for j, (i, L) in enumerate(t):
            new = list(t)
            new[j] = (i, L.add_direction(lam))
            s, srt = _sort_sign(new)
            if srt is not None:
                items.append(((srt, x), c * s))
    return phi._accumulate(items)


def lie_total_multi(phi: ContactForm, lam: MultiIndex) -> ContactForm:
    for d in lam.directions():
        phi = lie_total(phi, d)
    return phi


def d_H(phi: ContactForm) -> ContactForm:
    spec = phi.spec
    out = ContactForm(spec)
    for lam in range(spec.n):
        out = out + ContactForm.dx(spec, lam).wedge(lie_total(phi, lam))
    return out


def d_V(phi: ContactForm) -> ContactForm:
    spec = phi.spec
    items = []
    for (t, x), c in phi.terms.items():
        for v in jet_vars(c, spec):
            p = spec.partial(c, v)
            if p.is_zero():
                continue
            s, srt = _sort_sign(((v[1], v[2]),) + t)
            if srt is not None:
                items.append(((srt, x), p * s))
    return phi._accumulate(items)


def d(phi: ContactForm) -> ContactForm:
    return d_H(phi) + d_V(phi)


def interior(v, phi: ContactForm) -> ContactForm:
    """``v _| phi`` for any object with ``contract(gen) -> Expr | None``.

    ``gen`` is ``("theta", i, L)`` or ``("dx", lam)``.
    """
    items = []
    cache: dict = {}
    for (t, x), c in phi.terms.items():
        gens = [("theta", i, L) for i, L in t] + [("dx", a) for a in x]
        for j, g in enumerate(gens):
            if g not in cache:
                cache[g] = v.contract(g)
            val = cache[g]
            if val is None or val.is_zero():
                continue
            sign = -1 if j % 2 else 1
            if j < len(t):
                key = (t[:j] + t[j + 1 :], x)
            else:
                jj = j - len(t)
                key = (t, x[:jj] + x[jj + 1 :])
            items.append((key, c * val * sign))
    return phi._accumulate(items)


@dataclass(frozen=True)
class CoordinateVector:
    """A coordinate vector field ``d/dy^i_L`` or ``d/dx^lam`` (no prolongation)."""

    kind: str
    index: tuple

    @classmethod
    def jet(cls, i: int, lam: MultiIndex):
        return cls("theta", (i, lam))

    @classmethod
    def base(cls, lam: int):
        return cls("dx", (lam,))

    def contract(self, g) -> Optional[Expr]:
        if g[0] == "dx":
            if self.kind == "dx" and g[1] == self.index[0]:
                return ONE
            return None
        if self.kind == "theta":
            return ONE if (g[1], g[2]) == self.index else None
        # d/dx^lam applied to theta^i_L = dy - y_{L+mu} dx^mu
        return None


def rho_bar(phi: ContactForm) -> ContactForm:
    spec = phi.spec
    gens = sorted({g for t, _ in phi.terms for g in t})
    out = ContactForm(spec)
    for i, L in gens:
        inner = interior(CoordinateVector.jet(i, L), phi)
        inner = lie_total_multi(inner, L)
        piece = ContactForm.theta(spec, i).wedge(inner)
        out = out + (-piece if L.degree() % 2 else piece)
    return out


def rho(phi: ContactForm) -> ContactForm:
    """Interior Euler projector; annihilates everything of horizontal degree < n."""
    spec = phi.spec
    top = project(phi, s=spec.n)
    out = ContactForm(spec)
    for k in sorted({len(t) for t, _ in top.terms}):
        if k == 0:
            continue
        out = out + rho_bar(project(top, k=k)).scale(Expr.const(Fraction(1, k)))
    return out


def density_form(L: Lagrangian) -> ContactForm:
    return ContactForm.function(L.spec, L.density).wedge(ContactForm.omega(L.spec))


def source_to_form(E: SourceForm) -> ContactForm:
    spec = E.spec
    omega = ContactForm.omega(spec)
    out = ContactForm(spec)
    for i, c in enumerate(E.components):
        out = out + ContactForm.theta(spec, i).wedge(omega).scale(c)
    return out


def form_to_source(phi: ContactForm) -> SourceForm:
    """Read off ``E_i`` from ``sum E_i theta^i ^ omega``; other terms are an error."""
    spec = phi.spec
    comps = [ZERO] * spec.m
    full = tuple(range(spec.n))
    zero = MultiIndex.zero(spec.n)
    for (t, x), c in phi.terms.items():
        if len(t) != 1 or t[0][1] != zero or x != full:
            raise ValueError("form is not a source form")
        comps[t[0][0]] = comps[t[0][0]] + c
    return SourceForm(spec, tuple(comps))


def horizontal_components(phi: ContactForm) -> tuple:
    """Components ``J^lam`` of a (0, n-1)-form ``J^lam omega_lam``."""
    spec = phi.spec
    comps = []
    for lam in range(spec.n):
        key = ((), tuple(a for a in range(spec.n) if a != lam))
        sign = -1 if lam % 2 else 1
        comps.append(phi.terms.get(key, ZERO) * sign)
    extra = {k for k in phi.terms if k[0] or len(k[1]) != spec.n - 1}
    if extra:
        raise ValueError("form is not a horizontal (n-1)-form")
    return tuple(comps)


def from_horizontal_components(spec: BundleSpec, comps) -> ContactForm:
    out = ContactForm(spec)
    for lam, c in enumerate(comps):
        out = out + ContactForm.omega_lam(spec, lam).scale(c)
    return out


def format_form(phi: ContactForm) -> str:
    spec = phi.spec
    if phi.is_zero():
        return "0"
    parts = []
    for (t, x), c in sorted(phi.terms.items(), key=lambda kv: kv[0]):
        gens = [f"theta({spec.var_name((JET, i, L))})" for i, L in t]
        gens += ["d" + spec.base.names[a] for a in x]
        coef = spec.format(c)
        if not gens:
            parts.append(f"({coef})")
        else:
            parts.append(f"({coef})*" + "^".join(gens))
    return " + ".join(parts)


# Poincare-Cartan form and the first variational splitting -------------------


@dataclass
class PoincareCartanForm:
    """``L omega + sum F_i^{lam+M} theta^i_M ^ omega_lam`` with zero gauge terms."""

    form: ContactForm
    contact_part: ContactForm
    coefficients: dict = field(default_factory=dict)  # (i, MultiIndex) -> F_i^L


def poincare_cartan(L: Lagrangian) -> PoincareCartanForm:
    spec = L.spec
    dens = L.density
    r = L.order
    F: dict = {}
    for deg in range(r, 0, -1):
        for i in range(spec.m):
            for lam_idx in enumerate_indices(spec.n, deg):
                v = (JET, i, lam_idx)
                val = spec.partial(dens, v) / lam_idx.orderings()
                for mu in range(spec.n):
                    up = F.get((i, lam_idx.add_direction(mu)))
                    if up is not None:
                        val = val - spec.total_derivative(up, mu)
                if not val.is_zero():
                    F[(i, lam_idx)] = val
    contact = ContactForm(spec)
    for (i, lam_idx), val in F.items():
        for mu in range(spec.n):
            M = lam_idx.minus_direction(mu)
            if M is None:
                continue
            piece = ContactForm.theta(spec, i, M).wedge(ContactForm.omega_lam(spec, mu))
            contact = contact + piece.scale(val * M.orderings())
    return PoincareCartanForm(density_form(L) + contact, contact, F)


def variational_derivative(L: Lagrangian) -> ContactForm:
    """``delta L = rho(dL)`` as a (1, n)-form."""
    return rho(d(density_form(L)))


def first_variational_split(L: Lagrangian) -> tuple[SourceForm, PoincareCartanForm]:
    """``dL = delta L - d_H Xi``, verified exactly before returning."""
    dL = d(density_form(L))
    delta = rho(dL)
    E = form_to_source(delta)
    direct = euler_lagrange(L)
    if not (E - direct).is_zero():
        raise InternalInconsistency("rho(dL) disagrees with the Euler-Lagrange sum")
    xi = poincare_cartan(L)
    if not (dL - (delta - d_H(xi.contact_part))).is_zero():
        raise InternalInconsistency("dL != delta L - d_H Xi")
    return E, xi

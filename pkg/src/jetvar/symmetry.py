"""Generalized vector fields, Lie derivatives of Lagrangians, and Noether currents."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .contactforms import (
    ContactForm,
    d,
    d_H,
    d_V,
    density_form,
    first_variational_split,
    form_to_source,
    from_horizontal_components,
    h0,
    horizontal_components,
    interior,
    project,
    rho,
    source_to_form,
)
from .errors import InternalInconsistency, NotProjectable, UnsupportedFragment
from .jetops import (
    Lagrangian,
    SourceForm,
    euler_lagrange,
    invert_total_divergence,
    jet_vars,
    total_derivative_multi,
    total_divergence,
)
from .multiindex import MultiIndex, indices_up_to
from .symexpr import ATOM, BASE, JET, ZERO, BundleSpec, Expr, expr_sum

EXACT = "exact symmetry"
DIVERGENCE = "divergence symmetry"
NOT_SYMMETRY = "not a symmetry"


class GeneralizedVectorField:
    """``v^lam d_lam + v^i d_i`` with components of any finite jet order.

    Prolonged components are generated on demand from the characteristic
    ``vbar^i = v^i - y^i_mu v^mu`` as ``v^i_L = d_L vbar^i + y^i_{mu+L} v^mu``.
    """

    def __init__(self, spec: BundleSpec, base: Sequence[Expr], fibre: Sequence[Expr]):
        if len(base) != spec.n or len(fibre) != spec.m:
            raise ValueError(
                f"expected {spec.n} base and {spec.m} fibre components, "
                f"got {len(base)} and {len(fibre)}"
            )
        self.spec = spec
        self.base = tuple(base)
        self.fibre = tuple(fibre)
        self._dchar: dict = {}

    @classmethod
    def zero(cls, spec):
        return cls(spec, [ZERO] * spec.n, [ZERO] * spec.m)

    @classmethod
    def total(cls, spec, tau: Sequence[Expr]):
        """``tau^mu d_mu``, the prolongation of a base vector field."""
        fibre = [
            expr_sum(spec.y(i, MultiIndex.unit(spec.n, mu)) * tau[mu] for mu in range(spec.n))
            for i in range(spec.m)
        ]
        return cls(spec, tau, fibre)

    def __add__(self, other: "GeneralizedVectorField") -> "GeneralizedVectorField":
        return GeneralizedVectorField(
            self.spec,
            [a + b for a, b in zip(self.base, other.base)],
            [a + b for a, b in zip(self.fibre, other.fibre)],
        )

    def scale(self, c: Expr) -> "GeneralizedVectorField":
        return GeneralizedVectorField(
            self.spec, [a * c for a in self.base], [a * c for a in self.fibre]
        )

    # components ---------------------------------------------------------
    def characteristic(self, i: int) -> Expr:
        spec = self.spec
        out = self.fibre[i]
        for mu in range(spec.n):
            if not self.base[mu].is_zero():
                out = out - spec.y(i, MultiIndex.unit(spec.n, mu)) * self.base[mu]
        return out

    def char_derivative(self, i: int, lam: MultiIndex) -> Expr:
        """``d_L vbar^i``, memoized along a fixed path through the index lattice."""
        key = (i, lam)
        hit = self._dchar.get(key)
        if hit is not None:
            return hit
        if lam.is_empty():
            out = self.characteristic(i)
        else:
            first = lam.directions()[0]
            out = self.spec.total_derivative(self.char_derivative(i, lam.minus_direction(first)), first)
        self._dchar[key] = out
        return out

    def component(self, i: int, lam: MultiIndex) -> Expr:
        if lam.is_empty():
            return self.fibre[i]
        spec = self.spec
        out = self.char_derivative(i, lam)
        for mu in range(spec.n):
            if not self.base[mu].is_zero():
                out = out + spec.y(i, lam.add_direction(mu)) * self.base[mu]
        return out

    def prolong(self, k: int) -> dict:
        """All components ``v^i_L`` with ``|L| <= k``, keyed by ``(i, L)``."""
        if k < 0:
            raise ValueError("order must be non-negative")
        return {
            (i, lam): self.component(i, lam)
            for i in range(self.spec.m)
            for lam in indices_up_to(self.spec.n, k)
        }

    def contract(self, g) -> Optional[Expr]:
        if g[0] == "dx":
            return self.base[g[1]]
        return self.char_derivative(g[1], g[2])

    def __call__(self, f: Expr) -> Expr:
        """Action of the prolonged field on a function."""
        spec = self.spec

        def image(v):
            if v[0] == BASE:
                return self.base[v[1]]
            if v[0] == JET:
                return self.component(v[1], v[2])
            out = ZERO
            for dep, r in spec.atoms[v[1]].rules.items():
                out = out + image(dep) * r
            return out

        return f.derive(image)

    # classification -----------------------------------------------------
    def is_vertical(self) -> bool:
        return all(b.is_zero() for b in self.base)

    def is_projectable(self) -> bool:
        return not any(self.spec.has_jets(b) for b in self.base)

    def is_classical(self) -> bool:
        if not self.is_projectable():
            return False
        return all(self.spec.jet_order(c) == 0 for c in self.fibre)

    def jet_order(self) -> int:
        return max((self.spec.jet_order(c) for c in self.base + self.fibre), default=0)

    def vertical_split(self) -> tuple["GeneralizedVectorField", "GeneralizedVectorField"]:
        """``(v_H, v_V)`` with ``v_H = v^lam d_lam`` and ``v_V`` evolutionary."""
        spec = self.spec
        vh = GeneralizedVectorField.total(spec, self.base)
        vv = GeneralizedVectorField(
            spec, [ZERO] * spec.n, [self.characteristic(i) for i in range(spec.m)]
        )
        return vh, vv

    def format(self) -> str:
        spec = self.spec
        parts = []
        for lam, c in enumerate(self.base):
            if not c.is_zero():
                parts.append(f"({spec.format(c)})*d/d{spec.base.names[lam]}")
        for i, c in enumerate(self.fibre):
            if not c.is_zero():
                parts.append(f"({spec.format(c)})*d/d{spec.fields[i]}")
        return " + ".join(parts) or "0"


def lie_derivative_form(v: GeneralizedVectorField, phi: ContactForm) -> ContactForm:
    """Cartan formula ``v _| d phi + d(v _| phi)``."""
    return interior(v, d(phi)) + d(interior(v, phi))


def lie_derivative_L(v: GeneralizedVectorField, L: Lagrangian) -> ContactForm:
    """Lie derivative of ``L omega``, checked against its horizontal splitting."""
    spec = L.spec
    Lw = density_form(L)
    cartan = lie_derivative_form(v, Lw)
    vh, vv = v.vertical_split()
    omega = ContactForm.omega(spec)
    split = (
        interior(vv, d(Lw))
        + d_H(interior(vh, Lw))
        + d_V(interior(vh, omega)).scale(L.density)
    )
    if not (cartan - split).is_zero():
        raise InternalInconsistency("Cartan and split forms of the Lie derivative differ")
    return cartan


def lie_density(v: GeneralizedVectorField, L: Lagrangian) -> Expr:
    """Coefficient of omega in the Lie derivative (the horizontal density)."""
    spec = L.spec
    return lie_derivative_L(v, L).coefficient((), tuple(range(spec.n)))


@dataclass
class FirstVariation:
    lie: ContactForm
    source_term: ContactForm  # v_V _| delta L
    boundary_term: ContactForm  # d_H h0(v _| Xi_L)
    horizontal_term: ContactForm  # L d_V(v_H _| omega)
    current_form: ContactForm  # h0(v _| Xi_L)

    def total(self) -> ContactForm:
        return self.source_term + self.boundary_term + self.horizontal_term


def first_variational_formula(
    v: GeneralizedVectorField, L: Lagrangian, check: bool = True
) -> FirstVariation:
    spec = L.spec
    E, xi = first_variational_split(L)
    vh, vv = v.vertical_split()
    source = interior(vv, source_to_form(E))
    current = h0(interior(v, xi.form))
    boundary = d_H(current)
    horiz = d_V(interior(vh, ContactForm.omega(spec))).scale(L.density)
    lie = lie_derivative_L(v, L) if check else lie_derivative_form(v, density_form(L))
    fv = FirstVariation(lie, source, boundary, horiz, current)
    if check and not (fv.total() - fv.lie).is_zero():
        raise InternalInconsistency("first variational formula pieces do not sum to the Lie derivative")
    return fv


@dataclass
class SymmetryReport:
    verdict: str
    lie_density: Expr
    sigma: Optional[tuple] = None
    residual: Optional[SourceForm] = None
    sigma_residual: Optional[Expr] = None
    note: str = ""

    @property
    def is_symmetry(self) -> bool:
        return self.verdict in (EXACT, DIVERGENCE)

    def certify(self, spec: BundleSpec) -> bool:
        """Recompute the verdict from the stored fields."""
        h = self.lie_density
        if self.verdict == EXACT:
            return h.is_zero()
        if self.verdict == DIVERGENCE:
            if h.is_zero() or not euler_lagrange(h, spec).is_zero():
                return False
            return self.sigma is None or total_divergence(self.sigma, spec) == h
        return self.residual is not None and not self.residual.is_zero()


def characteristic_check(
    v: GeneralizedVectorField, L: Lagrangian, sigma: Optional[Sequence[Expr]] = None
) -> SymmetryReport:
    spec = L.spec
    if not v.is_projectable():
        raise NotProjectable("field is not projectable: base components must depend on base coordinates only")
    h = lie_density(v, L)
    sigma_res = None
    if sigma is not None:
        sigma = tuple(sigma)
        sigma_res = total_divergence(sigma, spec) - h
    if h.is_zero():
        return SymmetryReport(
            EXACT, h, sigma if sigma is not None else tuple([ZERO] * spec.n), None, sigma_res
        )
    E = euler_lagrange(h, spec)
    if not E.is_zero():
        return SymmetryReport(NOT_SYMMETRY, h, None, E, sigma_res)
    if sigma is not None:
        return SymmetryReport(DIVERGENCE, h, sigma, None, sigma_res)
    try:
        found = invert_total_divergence(h, spec)
    except UnsupportedFragment as exc:
        return SymmetryReport(DIVERGENCE, h, None, None, None, note=f"sigma not constructed: {exc}")
    return SymmetryReport(DIVERGENCE, h, found)


@dataclass
class NoetherCurrent:
    spec: BundleSpec
    components: tuple

    def form(self) -> ContactForm:
        return from_horizontal_components(self.spec, self.components)

    def divergence(self) -> Expr:
        return total_divergence(self.components, self.spec)


def noether_current(
    v: GeneralizedVectorField, L: Lagrangian, sigma: Optional[Sequence[Expr]] = None
) -> NoetherCurrent:
    """``J = h0(v _| Xi_L) - sigma``."""
    spec = L.spec
    if sigma is None:
        rep = characteristic_check(v, L)
        if not rep.is_symmetry:
            raise ValueError("vector field is not a divergence symmetry of the Lagrangian")
        if rep.sigma is None:
            raise UnsupportedFragment(rep.note or "sigma could not be constructed")
        sigma = rep.sigma
    _, xi = first_variational_split(L)
    comps = horizontal_components(h0(interior(v, xi.form)))
    return NoetherCurrent(spec, tuple(j - s for j, s in zip(comps, sigma)))


@dataclass
class ConservationCertificate:
    residual: Expr
    divergence: Expr
    source_term: Expr

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def verify_conservation(
    v: GeneralizedVectorField, L: Lagrangian, J: NoetherCurrent | Sequence[Expr]
) -> ConservationCertificate:
    """Off-shell identity ``d_lam J^lam + vbar^i delta_i L == 0``."""
    spec = L.spec
    comps = J.components if isinstance(J, NoetherCurrent) else tuple(J)
    E = euler_lagrange(L)
    div = total_divergence(comps, spec)
    src = expr_sum(v.characteristic(i) * E[i] for i in range(spec.m))
    return ConservationCertificate(div + src, div, src)


@dataclass
class MasterIdentityCertificate:
    branch: str
    lhs: SourceForm  # delta(L_v L)
    rhs: ContactForm
    difference: ContactForm
    projected_difference: Optional[ContactForm] = None

    @property
    def ok(self) -> bool:
        return self.difference.is_zero() and (
            self.projected_difference is None or self.projected_difference.is_zero()
        )


def master_identity_check(
    v: GeneralizedVectorField, L: Lagrangian, branch: str | None = None
) -> MasterIdentityCertificate:
    """``delta(L_v L)`` against the Lie derivative of ``delta L``.

    ``classical`` branch: the two sides agree as forms.  ``generalized``
    branch: ``delta(L_v L) = L_v delta L + sum_{|K|>0} (-1)^|K| d_K(d^K_k v^i
    delta_i L) theta^k ^ omega``, where ``L_v delta L`` on the right is read
    as its ``theta^k ^ omega`` part; the full Lie derivative is also checked
    after projection by rho.
    """
    spec = L.spec
    if not v.is_projectable():
        raise NotProjectable("master identity needs a projectable field")
    if branch is None:
        branch = "classical" if v.is_classical() else "generalized"
    if branch == "classical" and not v.is_classical():
        raise ValueError("classical branch needs a field of the form u^lam(x), u^i(x, y)")
    E = euler_lagrange(L)
    lhs = euler_lagrange(lie_density(v, L), spec)
    lhs_form = source_to_form(lhs)
    lie_src = lie_derivative_form(v, source_to_form(E))
    if branch == "classical":
        return MasterIdentityCertificate(branch, lhs, lie_src, lie_src - lhs_form)
    zero = MultiIndex.zero(spec.n)
    full = tuple(range(spec.n))
    undiff = ContactForm(
        spec,
        {
            key: c
            for key, c in lie_src.terms.items()
            if len(key[0]) == 1 and key[0][0][1] == zero and key[1] == full
        },
    )
    correction = _closing_correction(v, E)
    rhs = undiff + correction
    return MasterIdentityCertificate(
        branch, lhs, rhs, rhs - lhs_form, rho(lie_src) - lhs_form
    )


def _closing_correction(v: GeneralizedVectorField, E: SourceForm) -> ContactForm:
    spec = E.spec
    comps = []
    for k in range(spec.m):
        terms = []
        for i in range(spec.m):
            if E[i].is_zero():
                continue
            for w in jet_vars(v.fibre[i], spec, k):
                lam = w[2]
                if lam.is_empty():
                    continue
                t = total_derivative_multi(spec.partial(v.fibre[i], w) * E[i], lam, spec)
                terms.append(-t if lam.degree() % 2 else t)
        comps.append(expr_sum(terms))
    return source_to_form(SourceForm(spec, tuple(comps)))

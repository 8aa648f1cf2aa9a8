"""Jet coordinates over a trivial bundle chart, atoms, and the printer."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Mapping, Optional, Sequence

from ..multiindex import BaseSpec, MultiIndex
from .expr import ONE, ZERO, Expr, Var

BASE, JET, ATOM = 0, 1, 2


class SpecError(ValueError):
    pass


@dataclass
class Atom:
    """A named function of the coordinates known only through its partials.

    ``rules`` maps a coordinate key (base or jet variable) to the partial
    derivative of the atom with respect to it.  Coordinates absent from
    ``rules`` are ones the atom does not depend on.
    """

    name: str
    description: str = ""
    rules: dict = field(default_factory=dict)


class BundleSpec:
    """Base coordinates, fibre fields and registered atoms of one chart."""

    def __init__(
        self,
        base: Sequence[str] | BaseSpec,
        fields: Sequence[str],
        atoms: Sequence[Atom] = (),
    ):
        self.base = base if isinstance(base, BaseSpec) else BaseSpec(tuple(base))
        self.fields = tuple(fields)
        if not self.fields:
            raise SpecError("at least one fibre field is required")
        self.atoms = list(atoms)
        names = list(self.base.names) + list(self.fields) + [a.name for a in self.atoms]
        dupes = {s for s in names if names.count(s) > 1}
        if dupes:
            raise SpecError(f"duplicate names: {', '.join(sorted(dupes))}")
        self._atom_index = {a.name: k for k, a in enumerate(self.atoms)}
        self._total_cache: dict = {}

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return len(self.fields)

    # variables ----------------------------------------------------------
    def x(self, lam: int) -> Expr:
        return Expr.var((BASE, lam))

    def y(self, i: int, lam: MultiIndex | Sequence[int] | None = None) -> Expr:
        return Expr.var(self.jet_key(i, lam))

    def jet_key(self, i: int, lam=None):
        if lam is None:
            lam = MultiIndex.zero(self.n)
        elif not isinstance(lam, MultiIndex):
            lam = MultiIndex.from_directions(self.n, lam)
        return (JET, i, lam)

    def atom(self, name: str) -> Expr:
        return Expr.var((ATOM, self._atom_index[name]))

    def atom_key(self, name: str):
        return (ATOM, self._atom_index[name])

    def lookup(self, name: str):
        """Variable key for a plain identifier, or ``None``."""
        if name in self.base.names:
            return (BASE, self.base.index(name))
        if name in self.fields:
            return self.jet_key(self.fields.index(name))
        if name in self._atom_index:
            return (ATOM, self._atom_index[name])
        return None

    def set_rules(self, name: str, rules: Mapping) -> None:
        self.atoms[self._atom_index[name]].rules = dict(rules)
        self._total_cache.clear()

    # calculus -----------------------------------------------------------
    def atom_rule(self, atom_key, wrt) -> Optional[Expr]:
        return self.atoms[atom_key[1]].rules.get(wrt)

    def partial(self, e: Expr, wrt: Var) -> Expr:
        """Partial derivative with all coordinates and atoms independent,
        atoms then differentiated through their registered rules."""

        def rule(v):
            if v == wrt:
                return ONE
            if v[0] == ATOM:
                return self.atom_rule(v, wrt)
            return None

        return e.derive(rule)

    def total_derivative(self, e: Expr, lam: int) -> Expr:
        return e.derive(lambda v: self._total_image(v, lam))

    def _total_image(self, v, lam: int) -> Optional[Expr]:
        key = (v, lam)
        if key in self._total_cache:
            return self._total_cache[key]
        kind = v[0]
        if kind == BASE:
            out = ONE if v[1] == lam else None
        elif kind == JET:
            out = Expr.var((JET, v[1], v[2].add_direction(lam)))
        else:
            out = ZERO
            for dep, r in self.atoms[v[1]].rules.items():
                if dep[0] == BASE:
                    if dep[1] == lam:
                        out = out + r
                else:
                    out = out + Expr.var((JET, dep[1], dep[2].add_direction(lam))) * r
            out = None if out.is_zero() else out
        self._total_cache[key] = out
        return out

    def depends_on(self, e: Expr, wrt: Var) -> bool:
        return any(v == wrt or self._var_depends(v, wrt) for v in e.variables())

    def _var_depends(self, v, wrt) -> bool:
        return v[0] == ATOM and wrt in self.atoms[v[1]].rules

    def coordinates_of(self, e: Expr) -> set:
        """Base and jet coordinates ``e`` depends on, through atoms too."""
        out = set()
        for v in e.variables():
            if v[0] == ATOM:
                out.update(self.atoms[v[1]].rules)
            else:
                out.add(v)
        return out

    def jet_order(self, e: Expr) -> int:
        orders = [v[2].degree() for v in self.coordinates_of(e) if v[0] == JET]
        return max(orders, default=0)

    def has_jets(self, e: Expr) -> bool:
        return any(v[0] == JET for v in self.coordinates_of(e))

    def check_atoms(self) -> None:
        """Closure and commuting-partials checks for every atom."""
        for a in self.atoms:
            for wrt in a.rules:
                if wrt[0] == ATOM:
                    raise SpecError(f"atom {a.name}: rules are taken with respect to coordinates only")
            deps = sorted(a.rules)
            # coordinates that occur in the rules count too: a missing rule means 0
            others = set(deps)
            for r in a.rules.values():
                others |= {v for v in self.coordinates_of(r) if v[0] != ATOM}
            key = (ATOM, self._atom_index[a.name])
            for u in deps:
                for w in sorted(others):
                    if w == u or (w in a.rules and w < u):
                        continue
                    uw = self.partial(self.partial(Expr.var(key), u), w)
                    wu = self.partial(self.partial(Expr.var(key), w), u)
                    if uw != wu:
                        raise SpecError(
                            f"derivative rules of atom {a.name} do not commute for "
                            f"{self.var_name(u)} and {self.var_name(w)}"
                        )

    # printing -----------------------------------------------------------
    def var_name(self, v) -> str:
        kind = v[0]
        if kind == BASE:
            return self.base.names[v[1]]
        if kind == JET:
            name = self.fields[v[1]]
            if v[2].is_empty():
                return name
            return f"{name}[{v[2].format(self.base)}]"
        return self.atoms[v[1]].name

    def format(self, e: Expr) -> str:
        if e.is_poly():
            return self._format_poly(e.num)
        num = self._format_poly(e.num)
        den = self._format_poly(e.den)
        return f"({num})/({den})"

    def _format_poly(self, p) -> str:
        if not p:
            return "0"
        terms = sorted(p.items(), key=cmp_to_key(_term_cmp))
        out = []
        for k, (m, c) in enumerate(terms):
            neg = c < 0
            body = self._format_term(m, abs(c))
            if k == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def _format_term(self, m, c: Fraction) -> str:
        factors = []
        for v, e in m:
            name = self.var_name(v)
            factors.append(name if e == 1 else f"{name}^{e}")
        if not factors:
            return _format_coeff(c)
        if c == 1:
            return "*".join(factors)
        return _format_coeff(c) + "*" + "*".join(factors)


def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _term_cmp(a, b) -> int:
    """Lex order with variables taken from the largest down; larger first."""
    da, db = dict(a[0]), dict(b[0])
    for v in sorted(set(da) | set(db), reverse=True):
        ea, eb = da.get(v, 0), db.get(v, 0)
        if ea != eb:
            return -1 if ea > eb else 1
    return 0


def random_point(spec: BundleSpec, variables: Iterable, rng) -> dict:
    """Random nonzero rational values for the given variables."""
    pt = {}
    for v in variables:
        num = rng.randint(-9, 9) or 1
        pt[v] = Fraction(num, rng.randint(1, 5))
    return pt

"""Exact symbolic scalars of finite jet order."""
from __future__ import annotations

from typing import Mapping, Sequence

from .bundle import ATOM, BASE, JET, Atom, BundleSpec, SpecError
from .expr import ONE, ZERO, Expr, expr_sum
from .parser import ParseError, parse

__all__ = [
    "ATOM",
    "BASE",
    "JET",
    "ONE",
    "ZERO",
    "Atom",
    "BundleSpec",
    "Expr",
    "ParseError",
    "SpecError",
    "build_spec",
    "expr_sum",
    "is_zero",
    "normalize",
    "parse",
    "partial",
]


def build_spec(
    base: Sequence[str],
    fields: Sequence[str],
    atoms: Mapping[str, Mapping] | None = None,
) -> BundleSpec:
    """Build a bundle spec, parsing atom derivative rules given as strings.

    ``atoms`` maps an atom name to ``{"description": str, "derivatives":
    {coordinate: expression}}`` where a coordinate is written like any
    variable of the expression language (``t``, ``q1``, ``q1[t]``).
    """
    atoms = atoms or {}
    spec = BundleSpec(
        base,
        fields,
        [Atom(name, str(body.get("description", ""))) for name, body in atoms.items()],
    )
    for name, body in atoms.items():
        rules = {}
        for coord, src in (body.get("derivatives") or {}).items():
            v = parse(coord, spec).is_single_var()
            if v is None or v[0] == ATOM:
                raise SpecError(f"atom {name}: {coord!r} is not a coordinate")
            r = src if isinstance(src, Expr) else parse(str(src), spec)
            if not r.is_zero():
                rules[v] = r
        spec.set_rules(name, rules)
    spec.check_atoms()
    return spec


def normalize(e: Expr) -> Expr:
    # Expr values are canonical on construction.
    return e


def is_zero(e: Expr) -> bool:
    return e.is_zero()


def partial(e: Expr, wrt, spec: BundleSpec) -> Expr:
    return spec.partial(e, wrt)

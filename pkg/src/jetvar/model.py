"""Model files: a bundle, a Lagrangian and named candidate symmetries, in TOML.

Schema::

    name = "harmonic_oscillator"          # optional, defaults to the file stem
    description = "..."                   # optional
    base = ["t"]
    fields = ["q"]
    lagrangian = "1/2*q_t^2 - 1/2*q^2"

    [atoms.r_inv]                         # optional, any number
    description = "1/sqrt(q1^2 + q2^2)"
    derivatives = { q1 = "-q1*r_inv^3", q2 = "-q2*r_inv^3" }

    [symmetries.time]                     # optional, any number
    description = "time translation"
    base = { t = "1" }                    # v^lam, omitted entries are 0
    fibre = { }                           # v^i, omitted entries are 0
    sigma = { t = "..." }                 # optional sigma^lam

Expressions use the symexpr grammar; atoms may depend on coordinates only.
"""
from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import JetvarError
from .jetops import Lagrangian
from .symexpr import BundleSpec, Expr, ParseError, SpecError, build_spec, parse
from .symmetry import GeneralizedVectorField


class ModelError(JetvarError):
    """Malformed model file; the message names the offending key."""


@dataclass
class Symmetry:
    name: str
    description: str
    field: GeneralizedVectorField
    sigma: Optional[tuple] = None


@dataclass
class Model:
    name: str
    description: str
    spec: BundleSpec
    lagrangian: Lagrangian
    symmetries: dict = field(default_factory=dict)
    digest: str = ""

    def symmetry(self, name: str) -> Symmetry:
        try:
            return self.symmetries[name]
        except KeyError:
            known = ", ".join(self.symmetries) or "none"
            raise ModelError(f"model {self.name!r} has no symmetry {name!r} (known: {known})") from None


def _expr(src, spec: BundleSpec, where: str) -> Expr:
    if not isinstance(src, (str, int)):
        raise ModelError(f"{where}: expected an expression string")
    try:
        return parse(str(src), spec)
    except ParseError as exc:
        raise ModelError(f"{where}: {exc}") from None


def _names(doc: dict, key: str) -> list:
    val = doc.get(key)
    if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
        raise ModelError(f"{key}: expected a list of names")
    for v in val:
        if not v.isidentifier():
            raise ModelError(f"{key}: {v!r} is not a valid name")
    return val


def _components(table, names, spec, where) -> list:
    if table is None:
        table = {}
    if not isinstance(table, dict):
        raise ModelError(f"{where}: expected a table keyed by {', '.join(names)}")
    unknown = sorted(set(table) - set(names))
    if unknown:
        raise ModelError(f"{where}: unknown name {unknown[0]!r}")
    return [_expr(table[nm], spec, f"{where}.{nm}") if nm in table else Expr.const(0) for nm in names]


def loads(text: str, name: str = "model") -> Model:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ModelError(f"syntax: {exc}") from None
    base = _names(doc, "base")
    fields = _names(doc, "fields")
    atoms = doc.get("atoms", {})
    if not isinstance(atoms, dict):
        raise ModelError("atoms: expected a table")
    for aname, body in atoms.items():
        if not aname.isidentifier():
            raise ModelError(f"atoms: {aname!r} is not a valid name")
        if not isinstance(body, dict) or not isinstance(body.get("derivatives", {}), dict):
            raise ModelError(f"atoms.{aname}: expected a table with a 'derivatives' table")
    try:
        spec = build_spec(base, fields, atoms)
    except (ParseError, SpecError, KeyError) as exc:
        raise ModelError(f"atoms: {exc}") from None
    if "lagrangian" not in doc:
        raise ModelError("lagrangian: missing")
    L = Lagrangian(spec, _expr(doc["lagrangian"], spec, "lagrangian"))
    syms = {}
    if not isinstance(doc.get("symmetries", {}), dict):
        raise ModelError("symmetries: expected a table")
    for sname, tbl in doc.get("symmetries", {}).items():
        where = f"symmetries.{sname}"
        if not isinstance(tbl, dict):
            raise ModelError(f"{where}: expected a table")
        extra = sorted(set(tbl) - {"description", "base", "fibre", "sigma"})
        if extra:
            raise ModelError(f"{where}: unknown key {extra[0]!r}")
        v = GeneralizedVectorField(
            spec,
            _components(tbl.get("base"), base, spec, f"{where}.base"),
            _components(tbl.get("fibre"), fields, spec, f"{where}.fibre"),
        )
        sigma = None
        if "sigma" in tbl:
            sigma = tuple(_components(tbl["sigma"], base, spec, f"{where}.sigma"))
        syms[sname] = Symmetry(sname, str(tbl.get("description", "")), v, sigma)
    digest = hashlib.sha256(text.encode()).hexdigest()
    return Model(str(doc.get("name", name)), str(doc.get("description", "")), spec, L, syms, digest)


def load(path: str | Path) -> Model:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ModelError(f"cannot read {p}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ModelError(f"{p}: not UTF-8 text") from None
    return loads(text, p.stem)


def corpus_dir() -> Path:
    return Path(__file__).parent / "corpus"


def corpus_models() -> list[Path]:
    return sorted(corpus_dir().glob("*.model"))

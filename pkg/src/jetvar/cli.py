"""Command-line front end: ``jetvar el|symmetry|noether|triviality|report|selftest``.

Exit codes: 0 verified or positive verdict, 1 negative verdict, 2 usage,
parse or model errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import JetvarError, NotProjectable, UnsupportedFragment
from .jetops import euler_lagrange, invert_total_divergence, is_variationally_trivial
from .model import Model, ModelError, Symmetry, corpus_dir, corpus_models, load
from .symexpr import ParseError, parse
from .symmetry import (
    NOT_SYMMETRY,
    characteristic_check,
    noether_current,
    verify_conservation,
)


@dataclass
class Certificate:
    command: str
    model: str
    digest: str
    verdict: Optional[str] = None
    entries: list = field(default_factory=list)  # (label, canonical text)
    notes: list = field(default_factory=list)
    exit_code: int = 0

    def text(self) -> str:
        lines = [f"command: {self.command}", f"model: {self.model}", f"input-sha256: {self.digest}"]
        if self.verdict is not None:
            lines.append(f"verdict: {self.verdict}")
        lines += [f"{k} = {v}" for k, v in self.entries]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)

    def as_json(self) -> str:
        obj = {
            "command": self.command,
            "model": self.model,
            "input_sha256": self.digest,
            "verdict": self.verdict,
            "expressions": dict(self.entries),
            "notes": list(self.notes),
            "exit_code": self.exit_code,
        }
        return json.dumps(obj, ensure_ascii=False)


def _cert(model: Model, command: str) -> Certificate:
    return Certificate(command, model.name, model.digest)


def _base_labels(model: Model, prefix: str) -> list:
    return [f"{prefix}[{b}]" for b in model.spec.base.names]


def cert_el(model: Model) -> Certificate:
    c = _cert(model, "el")
    spec = model.spec
    E = euler_lagrange(model.lagrangian)
    c.entries = [(f"delta[{f}]", spec.format(E[i])) for i, f in enumerate(spec.fields)]
    return c


def cert_symmetry(model: Model, sym: Symmetry) -> Certificate:
    c = _cert(model, f"symmetry {sym.name}")
    spec = model.spec
    c.entries.append(("field", sym.field.format()))
    rep = characteristic_check(sym.field, model.lagrangian, sym.sigma)
    c.verdict = rep.verdict
    c.entries.append(("L_v L", spec.format(rep.lie_density)))
    if rep.sigma is not None and rep.verdict != NOT_SYMMETRY:
        c.entries += zip(_base_labels(model, "sigma"), (spec.format(s) for s in rep.sigma))
    if rep.residual is not None:
        c.entries += [
            (f"residual[{f}]", spec.format(rep.residual[i])) for i, f in enumerate(spec.fields)
        ]
    if rep.note:
        c.notes.append(rep.note)
    c.exit_code = 0 if rep.is_symmetry else 1
    if rep.sigma_residual is not None:
        c.entries.append(("sigma-residual", spec.format(rep.sigma_residual)))
        if not rep.sigma_residual.is_zero():
            c.notes.append("supplied sigma does not satisfy d_H sigma = L_v L")
            c.exit_code = 1
    return c


def cert_noether(model: Model, sym: Symmetry, check_current: Sequence | None = None) -> Certificate:
    c = _cert(model, f"noether {sym.name}")
    spec, L, v = model.spec, model.lagrangian, sym.field
    if check_current is not None:
        comps = tuple(check_current)
        c.notes.append("current supplied on the command line")
    else:
        rep = characteristic_check(v, L, sym.sigma)
        if not rep.is_symmetry:
            c.verdict = rep.verdict
            c.notes.append("no conserved current: the field fails the characteristic equation")
            c.exit_code = 1
            return c
        if rep.sigma is None:
            c.verdict = "current not constructed"
            c.notes.append(rep.note)
            c.exit_code = 1
            return c
        comps = noether_current(v, L, rep.sigma).components
    cert = verify_conservation(v, L, comps)
    c.entries += zip(_base_labels(model, "current"), (spec.format(j) for j in comps))
    c.entries.append(("residual", spec.format(cert.residual)))
    c.verdict = "conserved" if cert.ok else "not conserved"
    c.exit_code = 0 if cert.ok else 1
    return c


def cert_triviality(model: Model) -> Certificate:
    c = _cert(model, "triviality")
    spec, L = model.spec, model.lagrangian
    if not is_variationally_trivial(L):
        c.verdict = "not variationally trivial"
        E = euler_lagrange(L)
        c.entries = [(f"delta[{f}]", spec.format(E[i])) for i, f in enumerate(spec.fields)]
        c.exit_code = 1
        return c
    c.verdict = "variationally trivial"
    try:
        sigma = invert_total_divergence(L.density, spec)
    except UnsupportedFragment as exc:
        c.notes.append(f"sigma not constructed: {exc}")
        return c
    c.entries = list(zip(_base_labels(model, "sigma"), (spec.format(s) for s in sigma)))
    return c


def report(model: Model) -> list[Certificate]:
    """Every certificate for a model, in a fixed order (used for golden files)."""
    out = [cert_el(model), cert_triviality(model)]
    for sym in model.symmetries.values():
        try:
            out.append(cert_symmetry(model, sym))
        except NotProjectable as exc:
            c = _cert(model, f"symmetry {sym.name}")
            c.verdict = "not projectable"
            c.notes.append(str(exc))
            c.exit_code = 1
            out.append(c)
            continue
        out.append(cert_noether(model, sym))
    return out


def render(certs: Sequence[Certificate], as_json: bool) -> str:
    if as_json:
        return "\n".join(c.as_json() for c in certs) + "\n"
    return "\n\n".join(c.text() for c in certs) + "\n"


# selftest ------------------------------------------------------------------


def _golden_results() -> list:
    rows = []
    for path in corpus_models():
        expected = corpus_dir() / "expected" / f"{path.stem}.txt"
        try:
            got = render(report(load(path)), False)
            ok = expected.exists() and expected.read_text() == got
            msg = "" if ok else "regenerated certificates differ from expected file"
        except JetvarError as exc:
            ok, msg = False, f"{type(exc).__name__}: {exc}"
        rows.append((f"golden:{path.stem}", ok, 1, msg))
    return rows


def selftest(seed: int, scale: float, names: Sequence[str] | None, as_json: bool, out) -> int:
    from .randomized import SUITES, run_all

    rows = []
    for r in run_all(seed, names, scale):
        rows.append((r.name, r.ok, r.cases, r.first_failure))
    if not names:
        rows += _golden_results()
    failing = [name for name, ok, _, _ in rows if not ok]
    for name, ok, cases, msg in rows:
        if as_json:
            out.write(json.dumps({"invariant": name, "ok": ok, "cases": cases, "seed": seed, "first_failure": msg}) + "\n")
        else:
            what = SUITES[name][2] if name in SUITES else "corpus certificates"
            line = f"{'PASS' if ok else 'FAIL'}  {name:<28} {cases:>4} cases  {what}"
            if msg:
                line += f"\n      {msg}"
            out.write(line + "\n")
    if not as_json:
        if failing:
            out.write(f"failing invariants: {', '.join(failing)}\n")
        else:
            out.write(f"all {len(rows)} invariants hold (seed {seed})\n")
    return 1 if failing else 0


# argument handling ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="one JSON object per certificate")
    p = argparse.ArgumentParser(prog="jetvar", description="Exact variational calculus on jet coordinates.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("el", parents=[common], help="Euler-Lagrange expressions")
    s.add_argument("model")
    s = sub.add_parser("symmetry", parents=[common], help="check a named candidate symmetry")
    s.add_argument("model")
    s.add_argument("--name", required=True)
    s = sub.add_parser("noether", parents=[common], help="Noether current and its conservation identity")
    s.add_argument("model")
    s.add_argument("--name", required=True)
    s.add_argument(
        "--check-current",
        metavar="EXPR",
        action="append",
        help="verify this current instead of the computed one; repeat once per base coordinate",
    )
    s = sub.add_parser("triviality", parents=[common], help="variational triviality and sigma")
    s.add_argument("model")
    s = sub.add_parser("report", parents=[common], help="all certificates for a model")
    s.add_argument("model")
    s = sub.add_parser("selftest", parents=[common], help="run the invariant suites")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--scale", type=float, default=1.0, help="multiply case counts")
    s.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "selftest":
            from .randomized import SUITES

            for name in args.suite or ():
                if name not in SUITES:
                    parser.error(f"unknown suite {name!r}")
            if args.scale <= 0:
                parser.error("--scale must be positive")
            return selftest(args.seed, args.scale, args.suite, args.json, out)
        model = load(args.model)
        if args.command == "el":
            certs = [cert_el(model)]
        elif args.command == "triviality":
            certs = [cert_triviality(model)]
        elif args.command == "report":
            certs = report(model)
        else:
            sym = model.symmetry(args.name)
            if args.command == "symmetry":
                certs = [cert_symmetry(model, sym)]
            else:
                current = None
                if args.check_current is not None:
                    if len(args.check_current) != model.spec.n:
                        raise ModelError(
                            f"--check-current needs {model.spec.n} expression(s), one per base coordinate"
                        )
                    current = []
                    for k, src in enumerate(args.check_current):
                        try:
                            current.append(parse(src, model.spec))
                        except ParseError as exc:
                            raise ModelError(f"--check-current #{k + 1}: {exc}") from None
                certs = [cert_noether(model, sym, current)]
    except (ModelError, NotProjectable) as exc:
        print(f"jetvar: error: {exc}", file=sys.stderr)
        return 2
    out.write(render(certs, args.json))
    return max(c.exit_code for c in certs)


if __name__ == "__main__":
    sys.exit(main())

"""Recursive-descent parser for the expression DSL.

Grammar::

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ['^' ['-'] integer]
    base   := integer | ident | ident '[' [names] ']' | '(' expr ')' | '-' factor

Subscript sugar ``q_tx`` means ``q[t,x]`` and is available when every base
coordinate name is a single character.
"""
from __future__ import annotations

import re
from fractions import Fraction

from ..multiindex import MultiIndex
from .bundle import JET, BundleSpec
from .expr import Expr

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))")


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, src: str = ""):
        self.pos = pos
        self.src = src
        super().__init__(f"{message} at position {pos}")


def _tokenize(src: str):
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1) is not None:
            toks.append(("num", m.group(1), start))
        elif m.group(2) is not None:
            toks.append(("id", m.group(2), start))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()[],":
                raise ParseError(f"unexpected character {ch!r}", start, src)
            toks.append((ch, ch, start))
        pos = m.end()
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str, spec: BundleSpec):
        self.src = src
        self.spec = spec
        self.toks = _tokenize(src)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self, kind=None):
        tok = self.toks[self.k]
        if kind is not None and tok[0] != kind:
            want = "end of input" if kind == "end" else repr(kind)
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {want}, found {got}", tok[2], self.src)
        self.k += 1
        return tok

    def expr(self) -> Expr:
        if self.peek()[0] == "-":
            self.take()
            out = -self.term()
        else:
            out = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> Expr:
        out = self.factor()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            rhs = self.factor()
            if op == "*":
                out = out * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", pos, self.src)
                out = out / rhs
        return out

    def factor(self) -> Expr:
        b = self.base()
        if self.peek()[0] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "-":
                self.take()
                sign = -1
            tok = self.take("num")
            k = sign * int(tok[1])
            if k < 0 and b.is_zero():
                raise ParseError("negative power of zero", tok[2], self.src)
            b = b**k
        return b

    def base(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "num":
            self.take()
            return Expr.const(Fraction(int(text)))
        if kind == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind == "-":
            self.take()
            return -self.factor()
        if kind == "id":
            self.take()
            return self.ident(text, pos)
        what = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {what}", pos, self.src)

    def ident(self, name: str, pos: int) -> Expr:
        spec = self.spec
        if self.peek()[0] == "[":
            if name not in spec.fields:
                raise ParseError(f"{name!r} is not a fibre field", pos, self.src)
            self.take()
            names = []
            if self.peek()[0] != "]":
                names.append(self._base_name())
                while self.peek()[0] == ",":
                    self.take()
                    names.append(self._base_name())
            self.take("]")
            lam = MultiIndex.from_names(spec.base, names)
            return Expr.var((JET, spec.fields.index(name), lam))
        key = spec.lookup(name)
        if key is not None:
            return Expr.var(key)
        if "_" in name and all(len(s) == 1 for s in spec.base.names):
            head, _, tail = name.rpartition("_")
            if head in spec.fields and tail:
                for off, ch in enumerate(tail):
                    if ch not in spec.base.names:
                        raise ParseError(
                            f"unknown base coordinate {ch}",
                            pos + len(head) + 1 + off,
                            self.src,
                        )
                lam = MultiIndex.from_names(spec.base, list(tail))
                return Expr.var((JET, spec.fields.index(head), lam))
        raise ParseError(f"unknown identifier {name!r}", pos, self.src)

    def _base_name(self) -> str:
        kind, text, pos = self.take()
        if kind != "id":
            raise ParseError("malformed jet index", pos, self.src)
        if text not in self.spec.base.names:
            raise ParseError(f"unknown base coordinate {text}", pos, self.src)
        return text


def parse(src: str, spec: BundleSpec) -> Expr:
    p = _Parser(src, spec)
    e = p.expr()
    p.take("end")
    return e

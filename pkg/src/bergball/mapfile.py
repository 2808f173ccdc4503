"""Tagged-tree text format for holomorphic maps.

One map per entry, written ``kind(param=value, ...){child, child, ...}``.
Parameter values are Python literals (numbers, complex numbers such as
``(0.5-1j)``, nested lists, ``None``). Entries are separated by whitespace;
``#`` starts a comment that runs to the end of the line. Example::

    # normalized extremal map and a composed automorphism
    extremal(m=0.2, n=1, alpha=1.0)
    composition(){polynomial(n=1, exps=[[2]], coef=[[(1+0j)]]), automorphism(a=[(0.3+0j)])}
"""

import ast

import numpy as np

from .errors import BergballError


class MapParseError(BergballError, ValueError):
    """Malformed map text; the message carries ``line:column``."""


def _fmt(v):
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return repr(int(v))
    return repr(v)


def dumps(f):
    """Serialize one map to a single line."""
    args = ", ".join(f"{k}={_fmt(v)}" for k, v in f.params().items())
    text = f"{f.kind}({args})"
    if f.children:
        text += "{" + ", ".join(dumps(c) for c in f.children) + "}"
    return text


def _build(kind, params, children, where):
    from . import holo

    try:
        if kind == "polynomial":
            return holo.PolynomialMap(params["exps"], params["coef"])
        if kind == "identity":
            return holo.identity(int(params["n"]))
        if kind == "extremal":
            return holo.ExtremalMap(params["m"], params["n"], params.get("alpha", 1.0),
                                    lam=params.get("lam"))
        if kind == "automorphism":
            return holo.MobiusMap(params["a"])
        if kind == "composition":
            if len(children) != 2:
                raise MapParseError(f"{where}: composition needs exactly 2 children (outer, inner)")
            return holo.Composition(children[0], children[1], check=params.get("check", True))
        if kind == "diagonal-stack":
            return holo.DiagonalStack(children)
        if kind == "scalar-rotation":
            if len(children) != 1:
                raise MapParseError(f"{where}: scalar-rotation needs exactly 1 child")
            return holo.Rotation(children[0], params["factor"], params.get("row", 0))
    except KeyError as exc:
        raise MapParseError(f"{where}: {kind} is missing parameter {exc.args[0]!r}") from None
    except MapParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise MapParseError(f"{where}: invalid {kind}: {exc}") from None
    raise MapParseError(f"{where}: unknown map kind {kind!r}")


class _Parser:
    def __init__(self, text):
        lines = [ln.split("#", 1)[0] for ln in text.splitlines()]
        self.text = "\n".join(lines)
        self.pos = 0

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return f"{line}:{col}"

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise MapParseError(f"{self.where()}: expected {ch!r}, got {got!r}")
        self.pos += 1

    def name(self):
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] in "-_"):
            self.pos += 1
        if start == self.pos:
            got = self.peek() or "end of input"
            raise MapParseError(f"{self.where()}: expected a name, got {got!r}")
        return self.text[start:self.pos]

    def value(self):
        # scan to the next top-level ',' or ')'
        self.skip()
        start, depth = self.pos, 0
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in "([":
                depth += 1
            elif ch in ")]":
                if depth == 0:
                    break
                depth -= 1
            elif ch == "," and depth == 0:
                break
            self.pos += 1
        raw = self.text[start:self.pos].strip()
        try:
            return ast.literal_eval(raw)
        except (ValueError, SyntaxError):
            raise MapParseError(f"{self.where(start)}: bad value {raw!r}") from None

    def entry(self):
        self.skip()
        where = self.where()
        kind = self.name()
        params = {}
        self.expect("(")
        if self.peek() != ")":
            while True:
                key = self.name()
                self.expect("=")
                params[key] = self.value()
                if self.peek() == ",":
                    self.pos += 1
                    continue
                break
        self.expect(")")
        children = []
        if self.peek() == "{":
            self.pos += 1
            if self.peek() != "}":
                while True:
                    children.append(self.entry())
                    if self.peek() == ",":
                        self.pos += 1
                        continue
                    break
            self.expect("}")
        return _build(kind, params, children, where)


def loads(text):
    """Parse every map in ``text``; raises :class:`MapParseError` on malformed or empty input."""
    p = _Parser(text)
    maps = []
    while p.peek():
        maps.append(p.entry())
    if not maps:
        raise MapParseError("1:1: no maps found")
    return maps


def load_file(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump_file(path, maps):
    with open(path, "w", encoding="utf-8") as fh:
        for f in maps:
            fh.write(dumps(f) + "\n")

"""Text form of products: ``F(1,2;4)^3 x Gr(2,4)``.

Grammar (whitespace insensitive)::

    product := factor (SEP factor)*          SEP is 'x', '*' or U+00D7
    factor  := ('F(' int (',' int)* ';' int ')' | 'Gr(' int ',' int ')') ['^' int]
"""

from __future__ import annotations

import re

from .flags import FlagShape, ProductSpec


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}\n  {text}\n  {' ' * pos}^")


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<word>Gr|F)|(?P<sym>[(),;^*x×]))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise ParseError("unexpected character", text, _skip_ws(text, pos))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("eof", "", len(self.text))

    def take(self, kind: str, value: str | None = None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = repr(value) if value is not None else kind
            got = repr(tok[1]) if tok[0] != "eof" else "end of input"
            raise ParseError(f"expected {want}, got {got}", self.text, tok[2])
        self.i += 1
        return tok

    def integer(self) -> tuple[int, int]:
        tok = self.take("int")
        return int(tok[1]), tok[2]

    def factor(self) -> tuple[list[int], int, int, int]:
        word = self.take("word")
        start = word[2]
        self.take("sym", "(")
        if word[1] == "Gr":
            k, _ = self.integer()
            self.take("sym", ",")
            n, _ = self.integer()
            ks = [k]
        else:
            ks = [self.integer()[0]]
            while self.peek()[:2] == ("sym", ","):
                self.i += 1
                ks.append(self.integer()[0])
            self.take("sym", ";")
            n, _ = self.integer()
        self.take("sym", ")")
        power = 1
        if self.peek()[:2] == ("sym", "^"):
            self.i += 1
            power, ppos = self.integer()
            if power < 1:
                raise ParseError("exponent must be positive", self.text, ppos)
        return ks, n, power, start

    def product(self) -> ProductSpec:
        items = [self.factor()]
        while self.peek()[0] == "sym" and self.peek()[1] in ("x", "*", "×"):
            self.i += 1
            items.append(self.factor())
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected {tok[1]!r}", self.text, tok[2])
        n0 = items[0][1]
        factors = []
        for ks, n, power, start in items:
            if n != n0:
                raise ParseError(f"ambient dimension {n} differs from {n0}", self.text, start)
            try:
                shape = FlagShape(n, tuple(ks))
            except ValueError as exc:
                raise ParseError(str(exc), self.text, start) from None
            factors.extend([shape] * power)
        return ProductSpec(n0, tuple(factors))


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def parse_product(text: str) -> ProductSpec:
    """Parse a product expression; raises ParseError with the offending position."""
    return _Parser(text).product()


def parse_shape(text: str) -> FlagShape:
    spec = parse_product(text)
    if spec.m != 1:
        raise ParseError("expected a single factor", text, 0)
    return spec.factors[0]

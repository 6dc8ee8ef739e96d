"""Text formats: series expressions and automorphism listings.

Grammar (whitespace is insignificant)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INT)?
    atom   := INT | "X" INT | "eps" | "(" expr ")"

Division is only allowed by a constant that is a unit of the coefficient
ring, so ``1/3*X2`` is fine over ``q`` and ``fp:5`` but not ``X1/X2``.

An automorphism is ``n`` lines ``X<i> -> <expr>``, one per variable, in any
order.  Lines may also be separated by ``;``; ``#`` starts a comment.
"""

from __future__ import annotations

import re

from .errors import NotAugmented, ParseError
from .series import Series, SeriesContext

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>X\d+)|(?P<eps>eps)|(?P<op>->|[-+*/^()]))")


class _Parser:
    def __init__(self, text, ctx, line=1, allow_vars=True, col_offset=0):
        self.text = text
        self.col_offset = col_offset
        self.ctx = ctx
        self.ring = ctx.ring
        self.line = line
        self.allow_vars = allow_vars
        self.tokens = self._lex(text)
        self.i = 0

    def _lex(self, text):
        pos, out = 0, []
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", self.line,
                                 self.col_offset + pos + 1,
                                 ("integer", "X<i>", "eps", "operator"))
            kind = m.lastgroup
            start = m.start(kind)
            out.append((kind, m.group(kind), start + 1))
            pos = m.end()
        out.append(("end", "", len(text) + 1))
        return out

    # -- helpers ----------------------------------------------------------
    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok, expected):
        raise ParseError(message, self.line, self.col_offset + tok[2], expected)

    def const(self, c):
        return Series.constant(self.ctx, c)

    # -- grammar ----------------------------------------------------------
    def parse(self):
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(f"unexpected {tok[1]!r}", tok, ("+", "-", "*", "/", "end of input"))
        return value

    def expr(self):
        value = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op_tok = self.take()
            rhs = self.unary()
            if op_tok[1] == "*":
                value = value * rhs
            else:
                value = self.divide(value, rhs, op_tok)
        return value

    def divide(self, value, rhs, tok):
        if any(k != 0 for k in rhs.terms):
            self.fail("division by a non-constant", tok, ("constant divisor",))
        c = rhs.constant_term()
        if not self.ring.is_unit(c):
            self.fail(f"division by a non-unit of {self.ring.descriptor}", tok, ("unit divisor",))
        return value.scale(self.ring.inv(c))

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            value = self.unary()
            return -value if tok[1] == "-" else value
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                self.fail("exponent must be a nonnegative integer", tok, ("integer",))
            base = base ** int(tok[1])
        return base

    def atom(self):
        tok = self.take()
        kind, val = tok[0], tok[1]
        if kind == "int":
            return self.const(self.ring.from_int(int(val)))
        if kind == "var":
            idx = int(val[1:])
            if not self.allow_vars:
                self.fail("variables are not allowed here", tok, ("integer", "eps"))
            if not 1 <= idx <= self.ctx.nvars:
                self.fail(f"variable {val} out of range", tok,
                          tuple(f"X{j}" for j in range(1, self.ctx.nvars + 1)))
            return Series.variable(self.ctx, idx - 1)
        if kind == "eps":
            eps = getattr(self.ring, "eps", None)
            if eps is None:
                self.fail(f"eps is not an element of {self.ring.descriptor}", tok, ("integer", "X<i>"))
            return self.const(eps)
        if kind == "op" and val == "(":
            value = self.expr()
            close = self.take()
            if close[1] != ")":
                self.fail(f"unexpected {close[1]!r}", close, (")",))
            return value
        self.fail(f"unexpected {val!r}" if val else "unexpected end of input", tok,
                  ("integer", "X<i>", "eps", "("))


def parse_series(text: str, ctx: SeriesContext, line: int = 1, col_offset: int = 0) -> Series:
    return _Parser(text, ctx, line, col_offset=col_offset).parse()


def parse_constant(text: str, ring):
    ctx = SeriesContext(ring, 1, 0)
    return _Parser(text, ctx, allow_vars=False).parse().constant_term()


_HEAD = re.compile(r"^\s*X(\d+)\s*->")


def _logical_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0]
        offset = 0
        for chunk in raw.split(";"):
            if chunk.strip():
                yield lineno, offset, chunk
            offset += len(chunk) + 1


def parse_images(text: str, ctx: SeriesContext) -> tuple:
    """Parse ``X<i> -> expr`` lines into the tuple of images."""
    images = [None] * ctx.nvars
    last_line = 1
    for lineno, offset, chunk in _logical_lines(text):
        last_line = lineno
        m = _HEAD.match(chunk)
        if not m:
            raise ParseError("expected a line of the form 'X<i> -> <series>'", lineno, offset + 1,
                             ("X<i> ->",))
        idx = int(m.group(1))
        if not 1 <= idx <= ctx.nvars:
            raise ParseError(f"variable X{idx} out of range", lineno, offset + 1,
                             tuple(f"X{j}" for j in range(1, ctx.nvars + 1)))
        if images[idx - 1] is not None:
            raise ParseError(f"X{idx} is assigned twice", lineno, offset + 1)
        body = chunk[m.end():]
        image = parse_series(body, ctx, lineno, col_offset=offset + m.end())
        if 0 in image.terms:
            raise NotAugmented(f"line {lineno}: image of X{idx} has a nonzero constant term")
        images[idx - 1] = image
    missing = [f"X{i + 1}" for i, im in enumerate(images) if im is None]
    if missing:
        raise ParseError("no image given for " + ", ".join(missing), last_line, 1, tuple(
            f"{v} ->" for v in missing))
    return tuple(images)


def parse_automorphism(text: str, ctx: SeriesContext):
    """Parse and validate an automorphism (raises ``NotAutomorphism`` if not invertible)."""
    from .autgroup import Automorphism

    return Automorphism(ctx, parse_images(text, ctx))


def parse_endomorphism(text: str, ctx: SeriesContext):
    from .autgroup import Endomorphism

    return Endomorphism(ctx, parse_images(text, ctx))

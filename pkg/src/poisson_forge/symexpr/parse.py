"""Recursive-descent parser for the expression grammar (docs/grammar.md)."""

from __future__ import annotations

from . import nodes
from .nodes import VarTable

_FUNCTIONS = ("exp", "sin", "cos", "conj", "re", "im")


class ParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def ident(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] == "_"):
            self.pos += 1
        return self.text[start:self.pos], start

    def integer(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise ParseError("expected integer", start)
        return int(self.text[start:self.pos]), start


class _Parser:
    def __init__(self, text, vars):
        self.s = _Scanner(text)
        self.vars = vars

    def parse(self):
        e = self.sum()
        self.s.skip_ws()
        if self.s.pos != len(self.s.text):
            raise ParseError("trailing input", self.s.pos)
        return e

    def sum(self):
        terms = [self.product()]
        while True:
            c = self.s.peek()
            if c == "+":
                self.s.pos += 1
                terms.append(self.product())
            elif c == "-":
                self.s.pos += 1
                terms.append(nodes.neg(self.product()))
            else:
                return nodes.add(*terms)

    def product(self):
        factors = [self.unary()]
        while True:
            c = self.s.peek()
            if c == "*":
                self.s.pos += 1
                factors.append(self.unary())
            elif c == "/":
                self.s.pos += 1
                factors.append(nodes.recip(self.unary()))
            else:
                return nodes.mul(*factors)

    def unary(self):
        if self.s.peek() == "-":
            self.s.pos += 1
            return nodes.neg(self.unary())
        if self.s.peek() == "+":
            self.s.pos += 1
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.s.peek() == "^":
            self.s.pos += 1
            sign = 1
            if self.s.peek() == "(":
                self.s.pos += 1
                if self.s.peek() == "-":
                    self.s.pos += 1
                    sign = -1
                n, _ = self.s.integer()
                self.s.expect(")")
            else:
                if self.s.peek() == "-":
                    self.s.pos += 1
                    sign = -1
                n, _ = self.s.integer()
            return nodes.pow_int(base, sign * n)
        return base

    def atom(self):
        c = self.s.peek()
        if c == "(":
            self.s.pos += 1
            e = self.sum()
            self.s.expect(")")
            return e
        if c.isdigit():
            n, _ = self.s.integer()
            return nodes.rational(n)
        if c.isalpha() or c == "_":
            name, start = self.s.ident()
            if name in _FUNCTIONS and self.s.peek() == "(":
                self.s.pos += 1
                arg = self.sum()
                self.s.expect(")")
                return self.call(name, arg, start)
            if name == "i":
                return nodes.imag_unit()
            if name not in self.vars:
                raise ParseError(f"unknown variable {name!r}", start)
            return nodes.var(name, self.vars.kinds[name])
        raise ParseError("expected expression", self.s.pos)

    def call(self, name, arg, offset):
        if name == "exp":
            return nodes.exp(arg)
        if name == "sin":
            return nodes.sin(arg)
        if name == "cos":
            return nodes.cos(arg)
        if name == "conj":
            if nodes.is_real_typed(arg):
                raise ParseError("conj applied to a real-typed expression", offset)
            return nodes.conj(arg)
        if name == "re":
            return nodes.re_part(arg)
        if name == "im":
            return nodes.im_part(arg)
        raise ParseError(f"unknown function {name!r}", offset)


def parse(text, vars: VarTable):
    """Parse `text` over the variable table; raises ParseError with offset."""
    return _Parser(text, vars).parse()

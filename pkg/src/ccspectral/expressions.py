"""Safe arithmetic expressions in the chart variables x and y.

The grammar is deliberately tiny: numbers, the variables ``x`` and ``y``,
the constants ``pi`` and ``e``, the operators ``+ - * / ^`` (with ``^``
right-associative), unary minus, parentheses, and the functions ``sin``,
``cos``, ``exp``, ``abs``.  Compiled expressions evaluate vectorized over
numpy arrays and never touch ``eval``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = ["ExpressionError", "Expression", "compile_expression"]

_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
}

_CONSTANTS: dict[str, float] = {"pi": float(np.pi), "e": float(np.e)}


class ExpressionError(ValueError):
    """Parse or evaluation failure, annotated with the source position."""

    def __init__(self, message: str, source: str, position: int):
        self.position = position
        self.source = source
        pointer = " " * position + "^"
        super().__init__(f"{message} at position {position}\n  {source}\n  {pointer}")


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | op | lparen | rparen | end
    text: str
    position: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ExpressionError(f"malformed number {text!r}", source, i) from None
            tokens.append(_Token("number", text, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("name", source[i:j], i))
            i = j
            continue
        if c in "+-*/^":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c == "(":
            tokens.append(_Token("lparen", c, i))
            i += 1
            continue
        if c == ")":
            tokens.append(_Token("rparen", c, i))
            i += 1
            continue
        raise ExpressionError(f"unexpected character {c!r}", source, i)
    tokens.append(_Token("end", "", n))
    return tokens


# AST nodes are plain tuples: ("num", v) | ("var", name) | ("const", v)
# | ("neg", a) | ("bin", op, a, b) | ("call", fname, a)
_Node = tuple


class _Parser:
    """Recursive descent over the token stream."""

    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise ExpressionError(f"expected {want!r}, found {tok.text or 'end of input'!r}",
                                  self.source, tok.position)
        return self.advance()

    def parse(self) -> _Node:
        node = self.sum()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError(f"unexpected {tok.text!r}", self.source, tok.position)
        return node

    def sum(self) -> _Node:
        node = self.product()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = ("bin", op, node, self.product())
        return node

    def product(self) -> _Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = ("bin", op, node, self.unary())
        return node

    def unary(self) -> _Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return ("neg", self.unary())
        return self.power()

    def power(self) -> _Node:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            # right-associative; the exponent may carry a unary minus
            return ("bin", "^", base, self.unary())
        return base

    def atom(self) -> _Node:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return ("num", float(tok.text))
        if tok.kind == "name":
            self.advance()
            name = tok.text
            if name in _FUNCTIONS:
                self.expect("lparen")
                arg = self.sum()
                self.expect("rparen")
                return ("call", name, arg)
            if name in ("x", "y"):
                return ("var", name)
            if name in _CONSTANTS:
                return ("const", _CONSTANTS[name])
            raise ExpressionError(f"unknown name {name!r}", self.source, tok.position)
        if tok.kind == "lparen":
            self.advance()
            node = self.sum()
            self.expect("rparen")
            return node
        raise ExpressionError(f"expected a value, found {tok.text or 'end of input'!r}",
                              self.source, tok.position)


def _evaluate(node: _Node, x: np.ndarray, y: np.ndarray) -> Union[np.ndarray, float]:
    tag = node[0]
    if tag == "num" or tag == "const":
        return node[1]
    if tag == "var":
        return x if node[1] == "x" else y
    if tag == "neg":
        return -_evaluate(node[1], x, y)
    if tag == "call":
        return _FUNCTIONS[node[1]](np.asarray(_evaluate(node[2], x, y), dtype=float))
    _, op, a, b = node
    va = _evaluate(a, x, y)
    vb = _evaluate(b, x, y)
    if op == "+":
        return va + vb
    if op == "-":
        return va - vb
    if op == "*":
        return va * vb
    if op == "/":
        return va / vb
    return np.power(va, vb)


@dataclass(frozen=True)
class Expression:
    """A compiled expression; callable on scalars or numpy arrays."""

    source: str
    ast: _Node = field(repr=False, compare=False)

    def __call__(self, x, y):
        xa = np.asarray(x, dtype=float)
        ya = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(xa.shape, ya.shape)
        out = _evaluate(self.ast, xa, ya)
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


def compile_expression(source: str) -> Expression:
    """Parse ``source`` and return a vectorized callable of (x, y).

    Raises ExpressionError (with the offending position) on malformed input.
    """
    if not isinstance(source, str):
        raise ExpressionError("expression must be a string", str(source), 0)
    if not source.strip():
        raise ExpressionError("empty expression", source, 0)
    ast = _Parser(source).parse()
    return Expression(source=source, ast=ast)

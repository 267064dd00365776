"""Expression trees for g(s) and a recursive-descent parser for the DSL.

Grammar (whitespace is insignificant)::

    expr   = term {("+" | "-") term}
    term   = factor {("*" | "/") factor}
    factor = ["-"] base ["^" ["-"] base]
    base   = "s" | number | ident | func "(" expr ")" | "(" expr ")"
    func   = "exp" | "log"

Identifiers resolve against the parameter map; ``pi`` and ``e`` are
predefined unless shadowed by a parameter.  The optional leading minus
signs are a small extension that keeps inputs such as ``exp(-s)`` or
``s^-1`` writable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..errors import DomainError, ParseError, UnknownIdentifierError
from . import series as ser

__all__ = [
    "Node", "Const", "Var", "Param", "Add", "Sub", "Mul", "Div", "Neg",
    "Pow", "Exp", "Log", "parse_expression", "compile_postfix", "OPCODES",
]

# opcodes of the stack program consumed by the compiled ODE kernels
OPCODES = {
    "const": 0, "s": 1, "add": 2, "sub": 3, "mul": 4, "div": 5, "neg": 6,
    "exp": 7, "log": 8, "powc": 9, "pow": 10,
}


class Node:
    """Base class; subclasses are frozen dataclasses, so equality and
    hashing are structural."""

    has_s = False

    def series(self, x: np.ndarray) -> np.ndarray:
        """Taylor series of the node when ``s`` is replaced by series ``x``."""
        raise NotImplementedError

    def evaluate(self, s: float) -> float:
        raise NotImplementedError

    def emit(self, prog: list) -> None:
        raise NotImplementedError

    def constant_value(self) -> float:
        """Value of an ``s``-free subtree."""
        return self.evaluate(0.0)


@dataclass(frozen=True)
class Const(Node):
    value: float

    def series(self, x):
        return ser.constant(self.value, len(x))

    def evaluate(self, s):
        return self.value

    def emit(self, prog):
        prog.append((OPCODES["const"], self.value))

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Param(Node):
    name: str
    value: float

    def series(self, x):
        return ser.constant(self.value, len(x))

    def evaluate(self, s):
        return self.value

    def emit(self, prog):
        prog.append((OPCODES["const"], self.value))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Var(Node):
    has_s = True

    def series(self, x):
        return x.copy()

    def evaluate(self, s):
        return s

    def emit(self, prog):
        prog.append((OPCODES["s"], 0.0))

    def __str__(self):
        return "s"


@dataclass(frozen=True)
class _Binary(Node):
    left: Node
    right: Node

    @property
    def has_s(self):  # type: ignore[override]
        return self.left.has_s or self.right.has_s

    def emit(self, prog):
        self.left.emit(prog)
        self.right.emit(prog)
        prog.append((OPCODES[self._op], 0.0))


@dataclass(frozen=True)
class Add(_Binary):
    _op = "add"

    def series(self, x):
        return self.left.series(x) + self.right.series(x)

    def evaluate(self, s):
        return self.left.evaluate(s) + self.right.evaluate(s)

    def __str__(self):
        return "(%s + %s)" % (self.left, self.right)


@dataclass(frozen=True)
class Sub(_Binary):
    _op = "sub"

    def series(self, x):
        return self.left.series(x) - self.right.series(x)

    def evaluate(self, s):
        return self.left.evaluate(s) - self.right.evaluate(s)

    def __str__(self):
        return "(%s - %s)" % (self.left, self.right)


@dataclass(frozen=True)
class Mul(_Binary):
    _op = "mul"

    def series(self, x):
        return ser.mul(self.left.series(x), self.right.series(x))

    def evaluate(self, s):
        return self.left.evaluate(s) * self.right.evaluate(s)

    def __str__(self):
        return "%s*%s" % (self.left, self.right)


@dataclass(frozen=True)
class Div(_Binary):
    _op = "div"

    def series(self, x):
        den = self.right.series(x)
        if den[0] == 0.0:
            raise DomainError("division by zero")
        return ser.div(self.left.series(x), den)

    def evaluate(self, s):
        den = self.right.evaluate(s)
        if den == 0.0:
            raise DomainError("division by zero at s=%r" % (s,))
        return self.left.evaluate(s) / den

    def __str__(self):
        return "%s/%s" % (self.left, self.right)


@dataclass(frozen=True)
class Pow(_Binary):
    """``left ** right``; a constant exponent uses the power recurrence,
    an ``s``-dependent exponent is rewritten as ``exp(right*log(left))``."""

    _op = "pow"

    def series(self, x):
        base = self.left.series(x)
        if not self.right.has_s:
            try:
                return ser.power(base, self.right.constant_value())
            except ValueError as exc:
                raise DomainError(str(exc)) from None
        if not base[0] > 0.0:
            raise DomainError("variable power of a non-positive base")
        return ser.exp(ser.mul(self.right.series(x), ser.log(base)))

    def evaluate(self, s):
        b = self.left.evaluate(s)
        c = self.right.evaluate(s)
        if b < 0.0 and not float(c).is_integer():
            raise DomainError("non-integer power of negative value at s=%r" % (s,))
        if b == 0.0 and c < 0.0:
            raise DomainError("negative power of zero at s=%r" % (s,))
        try:
            return b ** c
        except OverflowError:
            return math.inf

    def emit(self, prog):
        if not self.right.has_s:
            self.left.emit(prog)
            prog.append((OPCODES["powc"], self.right.constant_value()))
        else:
            _Binary.emit(self, prog)

    def __str__(self):
        return "%s^%s" % (_wrap(self.left), _wrap(self.right))


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    @property
    def has_s(self):  # type: ignore[override]
        return self.arg.has_s

    def series(self, x):
        return -self.arg.series(x)

    def evaluate(self, s):
        return -self.arg.evaluate(s)

    def emit(self, prog):
        self.arg.emit(prog)
        prog.append((OPCODES["neg"], 0.0))

    def __str__(self):
        return "(-%s)" % (_wrap(self.arg),)


@dataclass(frozen=True)
class Exp(Node):
    arg: Node

    @property
    def has_s(self):  # type: ignore[override]
        return self.arg.has_s

    def series(self, x):
        return ser.exp(self.arg.series(x))

    def evaluate(self, s):
        v = self.arg.evaluate(s)
        return math.exp(v) if v < 709.78 else math.inf

    def emit(self, prog):
        self.arg.emit(prog)
        prog.append((OPCODES["exp"], 0.0))

    def __str__(self):
        return "exp(%s)" % (_strip(self.arg),)


@dataclass(frozen=True)
class Log(Node):
    arg: Node

    @property
    def has_s(self):  # type: ignore[override]
        return self.arg.has_s

    def series(self, x):
        a = self.arg.series(x)
        if not a[0] > 0.0:
            raise DomainError("log of non-positive value %r" % (a[0],))
        return ser.log(a)

    def evaluate(self, s):
        v = self.arg.evaluate(s)
        if not v > 0.0:
            raise DomainError("log of non-positive value %r at s=%r" % (v, s))
        return math.log(v)

    def emit(self, prog):
        self.arg.emit(prog)
        prog.append((OPCODES["log"], 0.0))

    def __str__(self):
        return "log(%s)" % (_strip(self.arg),)


def _wrap(node: Node) -> str:
    text = str(node)
    if isinstance(node, (Const, Var, Param, Exp, Log)) or text.startswith("("):
        return text
    return "(" + text + ")"


def _strip(node: Node) -> str:
    text = str(node)
    if text.startswith("(") and text.endswith(")") and isinstance(node, (Add, Sub)):
        return text[1:-1]
    return text


def compile_postfix(node: Node) -> tuple[np.ndarray, np.ndarray]:
    """Flatten a tree into a stack program ``(opcodes, operands)``."""
    prog: list = []
    node.emit(prog)
    ops = np.array([p[0] for p in prog], dtype=np.int32)
    vals = np.array([p[1] for p in prog], dtype=np.float64)
    return ops, vals


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)
_BUILTIN_CONSTANTS = {"pi": math.pi, "e": math.e}


class _Parser:
    def __init__(self, source: str, params: Mapping[str, float]):
        self.src = source
        self.params = params
        self.tokens = self._lex(source)
        self.pos = 0

    def _byte_offset(self, char_index: int) -> int:
        return len(self.src[:char_index].encode("utf-8"))

    def _lex(self, src):
        tokens = []
        i = 0
        n = len(src)
        while i < n:
            if src[i].isspace():
                i += 1
                continue
            m = _TOKEN.match(src, i)
            if m is None or m.end() == i:
                raise ParseError("unexpected character %r" % src[i], self._byte_offset(i))
            kind = m.lastgroup
            start = m.start(kind)
            tokens.append((kind, m.group(kind), start))
            i = m.end()
        tokens.append(("end", "", n))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message, tok):
        raise ParseError(message, self._byte_offset(tok[2]))

    def expect(self, text):
        tok = self.take()
        if tok[1] != text or tok[0] != "op":
            self.fail("expected %r" % text, tok)

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail("unexpected %r" % tok[1], tok)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self):
        negate = False
        if self.peek()[:2] == ("op", "-"):
            self.take()
            negate = True
        node = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            if self.peek()[:2] == ("op", "-"):
                self.take()
                node = Pow(node, Neg(self.base()))
            else:
                node = Pow(node, self.base())
        return Neg(node) if negate else node

    def base(self):
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            return Const(float(text))
        if kind == "id":
            if text == "s":
                return Var()
            if text in ("exp", "log"):
                if self.peek()[:2] != ("op", "("):
                    self.fail("expected '(' after %s" % text, self.peek())
                self.take()
                arg = self.expr()
                self.expect(")")
                return Exp(arg) if text == "exp" else Log(arg)
            if text in self.params:
                return Param(text, float(self.params[text]))
            if text in _BUILTIN_CONSTANTS:
                return Param(text, _BUILTIN_CONSTANTS[text])
            raise UnknownIdentifierError(
                "unknown identifier %r at offset %d" % (text, self._byte_offset(tok[2])))
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail("unexpected %r" % text, tok)


def parse_expression(source: str, params: Mapping[str, float] | None = None) -> Node:
    """Parse DSL text into an expression tree.

    Raises
    ------
    ParseError
        With the byte offset of the first offending token.
    UnknownIdentifierError
        For identifiers that are neither ``s``, a function, a builtin
        constant, nor a supplied parameter.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    return _Parser(source, dict(params or {})).parse()

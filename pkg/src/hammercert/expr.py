"""A small arithmetic expression language for user nonlinearities and weights.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := primary ('^' unary)?          # right-associative
    primary := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

so ``-u^2`` is ``-(u^2)`` and ``2^3^2`` is ``2^(3^2)``.  Evaluation is
vectorized over numpy arrays; domain violations raise :class:`EvalDomainError`
pointing at the offending sub-expression.
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import ValidationError

FUNCTIONS = {"abs": (1, 1), "sqrt": (1, 1), "exp": (1, 1), "log": (1, 1), "min": (2, None), "max": (2, None)}
CONSTANTS = {"pi": math.pi, "e": math.e}
ALL_VARIABLES = ("t", "u", "v", "r")


class ExpressionError(ValidationError):
    def __init__(self, message, offset=None, source=None):
        self.offset = offset
        self.source = source
        where = "" if offset is None else f" at byte {offset}"
        super().__init__(f"{message}{where}")


class ParseError(ExpressionError):
    pass


class EvalDomainError(ExpressionError):
    pass


# --- AST -----------------------------------------------------------------------
# ``pos`` is excluded from equality so that printed-and-reparsed trees compare
# equal to the originals.


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Name:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    pos: int = field(default=0, compare=False)


Node = Union[Num, Name, Unary, Binary, Call]


# --- tokenizer -----------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, NAME, OP, END
    text: str
    pos: int  # byte offset


def _byte_offset(src, i):
    return len(src[:i].encode("utf-8"))


def tokenize(src: str) -> list[Token]:
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            while i < n and (src[i].isdigit() or src[i] == "."):
                i += 1
            if i < n and src[i] in "eE":
                j = i + 1
                if j < n and src[j] in "+-":
                    j += 1
                if j < n and src[j].isdigit():
                    i = j
                    while i < n and src[i].isdigit():
                        i += 1
            text = src[start:i]
            try:
                float(text)
            except ValueError:
                raise ParseError(f"malformed number {text!r}", _byte_offset(src, start), src) from None
            tokens.append(Token("NUM", text, _byte_offset(src, start)))
        elif ch.isalpha() or ch == "_":
            while i < n and (src[i].isalnum() or src[i] == "_"):
                i += 1
            tokens.append(Token("NAME", src[start:i], _byte_offset(src, start)))
        elif ch in "+-*/^(),":
            i += 1
            tokens.append(Token("OP", ch, _byte_offset(src, start)))
        else:
            raise ParseError(f"unexpected character {ch!r}", _byte_offset(src, start), src)
    tokens.append(Token("END", "", _byte_offset(src, n)))
    return tokens


# --- parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, src, variables):
        self.src = src
        self.variables = tuple(variables)
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.tok
        if tok.kind != "OP" or tok.text != text:
            found = "end of input" if tok.kind == "END" else repr(tok.text)
            raise ParseError(f"expected {text!r}, found {found}", tok.pos, self.src)
        return self.take()

    def parse(self):
        if self.tok.kind == "END":
            raise ParseError("empty expression", 0, self.src)
        node = self.expr()
        if self.tok.kind != "END":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos, self.src)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "OP" and self.tok.text in "+-":
            op = self.take()
            node = Binary(op.text, node, self.term(), op.pos)
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "OP" and self.tok.text in "*/":
            op = self.take()
            node = Binary(op.text, node, self.unary(), op.pos)
        return node

    def unary(self):
        if self.tok.kind == "OP" and self.tok.text in "+-":
            op = self.take()
            return Unary(op.text, self.unary(), op.pos)
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok.kind == "OP" and self.tok.text == "^":
            op = self.take()
            return Binary("^", base, self.unary(), op.pos)
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "NUM":
            self.take()
            return Num(float(tok.text), tok.pos)
        if tok.kind == "NAME":
            self.take()
            if self.tok.kind == "OP" and self.tok.text == "(":
                return self.call(tok)
            if tok.text in FUNCTIONS:
                raise ParseError(f"function {tok.text!r} needs arguments", tok.pos, self.src)
            if tok.text not in CONSTANTS and tok.text not in self.variables:
                known = list(self.variables) + list(CONSTANTS) + list(FUNCTIONS)
                close = difflib.get_close_matches(tok.text, known, n=3, cutoff=0.4) or known
                raise ParseError(
                    f"unknown identifier {tok.text!r} (did you mean: {', '.join(close)})", tok.pos, self.src
                )
            return Name(tok.text, tok.pos)
        if tok.kind == "OP" and tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "END" else repr(tok.text)
        raise ParseError(f"expected a number, name or '(', found {found}", tok.pos, self.src)

    def call(self, name_tok):
        name = name_tok.text
        if name not in FUNCTIONS:
            close = difflib.get_close_matches(name, list(FUNCTIONS), n=3, cutoff=0.4) or list(FUNCTIONS)
            raise ParseError(f"unknown function {name!r} (did you mean: {', '.join(close)})", name_tok.pos, self.src)
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "OP" and self.tok.text == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        lo, hi = FUNCTIONS[name]
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = str(lo) if hi == lo else f"at least {lo}"
            raise ParseError(f"{name}() takes {want} argument(s), got {len(args)}", name_tok.pos, self.src)
        return Call(name, tuple(args), name_tok.pos)


# --- printer -------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "unary": 3, "^": 4}


def _prec(node):
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _PREC["unary"]
    return 5


def to_source(node: Node) -> str:
    """Render an AST back to text that reparses to an equal tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_source(a) for a in node.args)})"
    if isinstance(node, Unary):
        inner = to_source(node.operand)
        if _prec(node.operand) < _PREC["unary"]:
            inner = f"({inner})"
        return f"{node.op}{inner}"
    p = _PREC[node.op]
    left, right = to_source(node.left), to_source(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < _PREC["unary"]:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}"


# --- evaluation ----------------------------------------------------------------


def _domain(node, message, source):
    return EvalDomainError(message, node.pos, source)


def _eval(node, env, source):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        if node.name in env:
            return env[node.name]
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        raise _domain(node, f"variable {node.name!r} not bound", source)
    if isinstance(node, Unary):
        x = _eval(node.operand, env, source)
        return -x if node.op == "-" else x
    if isinstance(node, Call):
        args = [np.asarray(_eval(a, env, source), dtype=float) for a in node.args]
        x = args[0]
        if node.func == "abs":
            return np.abs(x)
        if node.func == "sqrt":
            if np.any(x < 0):
                raise _domain(node, "sqrt of a negative value", source)
            return np.sqrt(x)
        if node.func == "exp":
            with np.errstate(over="ignore"):
                out = np.exp(x)
            if not np.all(np.isfinite(out)):
                raise _domain(node, "exp overflow", source)
            return out
        if node.func == "log":
            if np.any(x <= 0):
                raise _domain(node, "log of a non-positive value", source)
            return np.log(x)
        reduce = np.minimum if node.func == "min" else np.maximum
        out = args[0]
        for a in args[1:]:
            out = reduce(out, a)
        return out
    a = np.asarray(_eval(node.left, env, source), dtype=float)
    b = np.asarray(_eval(node.right, env, source), dtype=float)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if np.any(b == 0):
            raise _domain(node, "division by zero", source)
        return a / b
    # '^'
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        out = np.power(a, b)
    if not np.all(np.isfinite(out)):
        if np.any((a < 0) & (b != np.round(b))):
            raise _domain(node, "negative base with non-integer exponent", source)
        raise _domain(node, "non-finite power", source)
    return out


class Expression:
    """A parsed expression bound to a set of allowed variable names.

    >>> f = Expression("(abs(u)^3 + abs(v)^3 + 1)/4", variables="tuv")
    >>> float(f(u=1.0, v=1.0))
    0.75
    """

    def __init__(self, source: str, variables: Iterable[str] = ALL_VARIABLES):
        self.source = source
        self.variables = tuple(variables)
        self.ast = _Parser(source, self.variables).parse()

    @classmethod
    def from_ast(cls, ast: Node, variables: Iterable[str] = ALL_VARIABLES) -> "Expression":
        return cls(to_source(ast), variables)

    def __repr__(self):
        return f"Expression({self.source!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and self.ast == other.ast

    def __hash__(self):
        return hash(self.ast)

    def names(self) -> set:
        """Variable names the expression actually uses."""
        found = set()

        def walk(node):
            if isinstance(node, Name) and node.name not in CONSTANTS:
                found.add(node.name)
            for child in _children(node):
                walk(child)

        walk(self.ast)
        return found

    def __call__(self, **env):
        shape = np.broadcast(*[np.asarray(x) for x in env.values()]).shape if env else ()
        out = _eval(self.ast, env, self.source)
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy() if shape else float(out)

    def substitute(self, name: str, replacement: "Expression", variables=None) -> "Expression":
        """Replace every occurrence of variable ``name`` by ``replacement``."""

        def sub(node):
            if isinstance(node, Name) and node.name == name:
                return replacement.ast
            if isinstance(node, Unary):
                return Unary(node.op, sub(node.operand))
            if isinstance(node, Binary):
                return Binary(node.op, sub(node.left), sub(node.right))
            if isinstance(node, Call):
                return Call(node.func, tuple(sub(a) for a in node.args))
            return node

        return Expression.from_ast(sub(self.ast), variables or self.variables)


def _children(node):
    if isinstance(node, Unary):
        return (node.operand,)
    if isinstance(node, Binary):
        return (node.left, node.right)
    if isinstance(node, Call):
        return node.args
    return ()


def parse_expression(src: str, variables: Iterable[str] = ALL_VARIABLES) -> Expression:
    return Expression(src, variables)


def constant_value(value) -> float:
    """Accept a JSON number or a variable-free expression string such as ``"1/6"``."""
    if isinstance(value, bool):
        raise ExpressionError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    return float(Expression(str(value), variables=())())

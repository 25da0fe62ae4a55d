"""Forests, trees, contexts and their text syntax.

A forest is a tuple of :class:`Tree` values; the empty tuple is the empty
forest ``0``.  Concatenation of forests is tuple concatenation.  Symbols are
plain strings.

Text syntax (whitespace insignificant)::

    forest ::= "0" | tree ("+" tree)*
    tree   ::= symbol [ "(" forest ")" ] | "@"
    symbol ::= [A-Za-z_][A-Za-z0-9_]* | '"' escaped '"'

``@`` is the hole of a context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union

from .errors import ForestSyntaxError, HoleError, UnknownSymbolError


class _Hole:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "HOLE"

    def __reduce__(self):
        return (_Hole, ())


HOLE = _Hole()


class Tree(NamedTuple):
    label: Union[str, _Hole]
    children: tuple = ()

    def __repr__(self):
        return f"Tree({print_forest((self,))!r})"


Forest = tuple  # tuple[Tree, ...]
EMPTY: Forest = ()


def leaf(label: str) -> Tree:
    return Tree(label, ())


def node_count(f: Forest) -> int:
    return sum(1 + node_count(t.children) for t in f)


def labels(f: Forest) -> set:
    out = set()
    stack = list(f)
    while stack:
        t = stack.pop()
        out.add(t.label)
        stack.extend(t.children)
    return out


def _hole_count(f: Forest) -> int:
    n = 0
    for t in f:
        if t.label is HOLE:
            if t.children:
                raise HoleError("hole must be a leaf")
            n += 1
        n += _hole_count(t.children)
    return n


@dataclass(frozen=True)
class Context:
    """A forest over the alphabet plus one hole, which is a leaf."""

    body: Forest

    def __post_init__(self):
        n = _hole_count(self.body)
        if n != 1:
            raise HoleError(f"context must contain exactly one hole, found {n}")

    def __str__(self):
        return print_forest(self)


IDENTITY_CONTEXT = Context((Tree(HOLE, ()),))


def apply_context(c: Context, f: Forest) -> Forest:
    """Replace the hole of ``c`` by the forest ``f``."""

    def splice(forest):
        out = []
        for t in forest:
            if t.label is HOLE:
                out.extend(f)
            else:
                out.append(Tree(t.label, splice(t.children)))
        return tuple(out)

    return splice(c.body)


def compose_contexts(outer: Context, inner: Context) -> Context:
    """The context whose application is ``outer`` applied after ``inner``."""
    return Context(apply_context(outer, inner.body))


# ---------------------------------------------------------------- printing

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_IDENT_PREFIX = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def quote_symbol(name: str) -> str:
    out = ['"']
    for ch in name:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\x{ord(ch):02x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def format_symbol(name: str) -> str:
    return name if _IDENT.match(name) else quote_symbol(name)


def print_forest(f) -> str:
    """Canonical text of a forest or context."""
    if isinstance(f, Context):
        f = f.body
    if not f:
        return "0"
    parts = []
    for t in f:
        if t.label is HOLE:
            parts.append("@")
        elif t.children:
            parts.append(f"{format_symbol(t.label)}({print_forest(t.children)})")
        else:
            parts.append(format_symbol(t.label))
    return "+".join(parts)


# ----------------------------------------------------------------- parsing

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


def read_quoted(text: str, pos: int) -> tuple[str, int]:
    """Read a quoted symbol starting at ``text[pos] == '"'``; return (name, end)."""
    assert text[pos] == '"'
    i = pos + 1
    out = []
    while True:
        if i >= len(text):
            raise ForestSyntaxError("unterminated quoted symbol", pos, text)
        ch = text[i]
        if ch == '"':
            i += 1
            break
        if ch == "\\":
            if i + 1 >= len(text):
                raise ForestSyntaxError("dangling escape", i, text)
            esc = text[i + 1]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                i += 2
            elif esc == "x":
                digits = text[i + 2 : i + 4]
                if len(digits) != 2 or not all(c in "0123456789abcdefABCDEF" for c in digits):
                    raise ForestSyntaxError("bad \\x escape", i, text)
                out.append(chr(int(digits, 16)))
                i += 4
            else:
                raise ForestSyntaxError(f"unknown escape \\{esc}", i, text)
        else:
            out.append(ch)
            i += 1
    name = "".join(out)
    if not name:
        raise ForestSyntaxError("empty symbol", pos, text)
    return name, i


class _Parser:
    def __init__(self, text: str, alphabet):
        self.text = text
        self.pos = 0
        self.alphabet = None if alphabet is None else set(alphabet)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise ForestSyntaxError(f"expected {ch!r}, got {got!r}", self.pos, self.text)
        self.pos += 1

    def forest(self, closing: str) -> Forest:
        if self.peek() == "0":
            start = self.pos
            self.pos += 1
            # "0" must stand alone as a whole forest
            if self.peek() not in (closing, ""):
                raise ForestSyntaxError("'0' must be the whole forest", start, self.text)
            return EMPTY
        if self.peek() == closing:
            if closing == ")":
                return EMPTY  # a() is a synonym for a
            raise ForestSyntaxError("empty input", self.pos, self.text)
        trees = [self.tree()]
        while self.peek() == "+":
            self.pos += 1
            trees.append(self.tree())
        return tuple(trees)

    def symbol(self) -> str:
        ch = self.peek()
        start = self.pos
        if ch == '"':
            name, self.pos = read_quoted(self.text, self.pos)
        else:
            m = _IDENT_PREFIX.match(self.text, self.pos)
            if not m:
                got = ch or "end of input"
                raise ForestSyntaxError(f"expected symbol, got {got!r}", self.pos, self.text)
            name = m.group(0)
            self.pos = m.end()
        if self.alphabet is not None and name not in self.alphabet:
            raise UnknownSymbolError(name, start)
        return name

    def tree(self) -> Tree:
        if self.peek() == "@":
            start = self.pos
            self.pos += 1
            if self.peek() == "(":
                raise HoleError(f"hole at position {start} must be a leaf")
            return Tree(HOLE, ())
        name = self.symbol()
        if self.peek() == "(":
            self.pos += 1
            children = self.forest(")")
            self.expect(")")
            return Tree(name, children)
        return Tree(name, ())


def parse_forest(text: str, alphabet: Iterable[str] | None = None):
    """Parse forest text; returns a :class:`Context` when exactly one ``@`` occurs."""
    p = _Parser(text, alphabet)
    f = p.forest("")
    if p.peek() != "":
        raise ForestSyntaxError(f"unexpected {p.peek()!r}", p.pos, text)
    holes = _hole_count(f)
    if holes == 0:
        return f
    if holes > 1:
        raise HoleError(f"found {holes} holes, a context has exactly one")
    return Context(f)


def parse_context(text: str, alphabet: Iterable[str] | None = None) -> Context:
    c = parse_forest(text, alphabet)
    if not isinstance(c, Context):
        raise HoleError("context must contain exactly one hole, found 0")
    return c


# --------------------------------------------------- Boolean expressions

AND, OR, NOT, TRUE, FALSE = "and", "or", "not", "T", "F"
BOOL_SYMBOLS = (AND, OR, NOT, TRUE, FALSE)


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    operand: object


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if self.name in BOOL_SYMBOLS:
            raise ValueError(f"variable name {self.name!r} collides with a connective")


BoolExpr = Union[And, Or, Not, Const, Var]


def encode_bool(e: BoolExpr) -> Forest:
    """Encode a Boolean expression as a single-tree forest."""
    if isinstance(e, And):
        return (Tree(AND, encode_bool(e.left) + encode_bool(e.right)),)
    if isinstance(e, Or):
        return (Tree(OR, encode_bool(e.left) + encode_bool(e.right)),)
    if isinstance(e, Not):
        return (Tree(NOT, encode_bool(e.operand)),)
    if isinstance(e, Const):
        return (leaf(TRUE if e.value else FALSE),)
    if isinstance(e, Var):
        return (leaf(e.name),)
    raise TypeError(f"not a Boolean expression: {e!r}")


def eval_bool(e: BoolExpr, assignment: dict) -> bool:
    if isinstance(e, And):
        return eval_bool(e.left, assignment) and eval_bool(e.right, assignment)
    if isinstance(e, Or):
        return eval_bool(e.left, assignment) or eval_bool(e.right, assignment)
    if isinstance(e, Not):
        return not eval_bool(e.operand, assignment)
    if isinstance(e, Const):
        return e.value
    return assignment[e.name]


def bool_vars(e: BoolExpr) -> list[str]:
    """Variable names in order of first occurrence."""
    seen: list[str] = []

    def walk(x):
        if isinstance(x, (And, Or)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, Not):
            walk(x.operand)
        elif isinstance(x, Var) and x.name not in seen:
            seen.append(x.name)

    walk(e)
    return seen

"""Graded two-way modal formulas: AST, concrete syntax, length and desugaring.

The core constructors are :class:`Atom`, :class:`Top`, :class:`Bottom`, the
Boolean connectives, :class:`DiaGeq` (at least ``n`` successors) and
:class:`InvDiaGeq` (at least ``n`` predecessors).  The remaining modalities
(``dia``, ``box``, ``idia``, ``ibox``, ``dia<=n``, ``idia<=n``) exist as
surface nodes and are removed by :func:`desugar`; :func:`parse` desugars
eagerly.

Concrete grammar (``~`` and modalities bind tightest, then ``&``, ``|``,
``->`` (right associative), ``<->``)::

    formula := iff
    iff     := impl ("<->" impl)*
    impl    := or ("->" or)*
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "~" unary | MOD unary | atom
    MOD     := "dia" | "box" | "idia" | "ibox"
             | "dia>=" NUM | "dia<=" NUM | "idia>=" NUM | "idia<=" NUM
    atom    := IDENT | "true" | "false" | "(" formula ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Union

MAX_GRADE = 2**64 - 1

__all__ = [
    "Formula", "Atom", "Top", "Bottom", "Not", "And", "Or", "Implies", "Iff",
    "DiaGeq", "InvDiaGeq", "Dia", "Box", "InvDia", "InvBox", "DiaLeq", "InvDiaLeq",
    "TRUE", "FALSE", "FormulaSyntaxError", "parse", "render", "formula_length",
    "desugar", "subformulas", "variables", "fresh_variable", "modal_depth",
    "max_grade", "conj", "disj", "iff", "implies", "neg", "dia", "box", "idia",
    "ibox", "dia_leq", "idia_leq", "dia_eq", "simplify", "is_propositional",
    "substitute",
]


def _node(cls):
    """Frozen dataclass whose structural hash is computed once per node."""
    cls = dataclass(frozen=True)(cls)
    generated = cls.__hash__

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = generated(self)
            object.__setattr__(self, "_hash", h)
        return h

    cls.__hash__ = __hash__
    return cls


class Formula:
    """Base class of all formula nodes.  Nodes are immutable."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __rshift__(self, other: "Formula") -> "Formula":
        return Implies(self, other)


@_node
class Atom(Formula):
    name: str


@_node
class Top(Formula):
    pass


@_node
class Bottom(Formula):
    pass


@_node
class Not(Formula):
    sub: Formula


@_node
class And(Formula):
    left: Formula
    right: Formula


@_node
class Or(Formula):
    left: Formula
    right: Formula


@_node
class Implies(Formula):
    left: Formula
    right: Formula


@_node
class Iff(Formula):
    left: Formula
    right: Formula


@_node
class DiaGeq(Formula):
    """True where at least ``n`` successors satisfy ``sub``."""

    n: int
    sub: Formula


@_node
class InvDiaGeq(Formula):
    """True where at least ``n`` predecessors satisfy ``sub``."""

    n: int
    sub: Formula


# Surface forms, removed by desugar().


@_node
class Dia(Formula):
    sub: Formula


@_node
class Box(Formula):
    sub: Formula


@_node
class InvDia(Formula):
    sub: Formula


@_node
class InvBox(Formula):
    sub: Formula


@_node
class DiaLeq(Formula):
    n: int
    sub: Formula


@_node
class InvDiaLeq(Formula):
    n: int
    sub: Formula


TRUE = Top()
FALSE = Bottom()

_BINARY = (And, Or, Implies, Iff)
_GRADED = (DiaGeq, InvDiaGeq, DiaLeq, InvDiaLeq)
_UNARY_SURFACE = (Dia, Box, InvDia, InvBox)


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Atom, Top, Bottom)):
        return ()
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    return (f.sub,)


# ---------------------------------------------------------------------------
# Builders


def neg(f: Formula) -> Formula:
    return Not(f)


def _balanced(items: list[Formula], node: type) -> Formula:
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return node(_balanced(items[:mid], node), _balanced(items[mid:], node))


def conj(items: Iterable[Formula]) -> Formula:
    """Balanced conjunction; the empty conjunction is ``true``."""
    items = list(items)
    return _balanced(items, And) if items else TRUE


def disj(items: Iterable[Formula]) -> Formula:
    """Balanced disjunction; the empty disjunction is ``false``."""
    items = list(items)
    return _balanced(items, Or) if items else FALSE


def implies(a: Formula, b: Formula) -> Formula:
    return Implies(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    return Iff(a, b)


def dia(f: Formula, n: int = 1) -> Formula:
    return DiaGeq(n, f)


def idia(f: Formula, n: int = 1) -> Formula:
    return InvDiaGeq(n, f)


def box(f: Formula) -> Formula:
    return Not(DiaGeq(1, Not(f)))


def ibox(f: Formula) -> Formula:
    return Not(InvDiaGeq(1, Not(f)))


def dia_leq(f: Formula, n: int) -> Formula:
    return Not(DiaGeq(n + 1, f))


def idia_leq(f: Formula, n: int) -> Formula:
    return Not(InvDiaGeq(n + 1, f))


def dia_eq(f: Formula, n: int) -> Formula:
    """Exactly ``n`` successors satisfy ``f``."""
    return And(DiaGeq(n, f), Not(DiaGeq(n + 1, f)))


# ---------------------------------------------------------------------------
# Traversals


def desugar(f: Formula) -> Formula:
    """Rewrite every surface modality into the core constructors."""
    memo: dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, (Atom, Top, Bottom)):
            out = g
        elif isinstance(g, Not):
            out = Not(go(g.sub))
        elif isinstance(g, _BINARY):
            out = type(g)(go(g.left), go(g.right))
        elif isinstance(g, DiaGeq):
            out = DiaGeq(g.n, go(g.sub))
        elif isinstance(g, InvDiaGeq):
            out = InvDiaGeq(g.n, go(g.sub))
        elif isinstance(g, Dia):
            out = DiaGeq(1, go(g.sub))
        elif isinstance(g, InvDia):
            out = InvDiaGeq(1, go(g.sub))
        elif isinstance(g, Box):
            out = Not(DiaGeq(1, Not(go(g.sub))))
        elif isinstance(g, InvBox):
            out = Not(InvDiaGeq(1, Not(go(g.sub))))
        elif isinstance(g, DiaLeq):
            out = Not(DiaGeq(g.n + 1, go(g.sub)))
        elif isinstance(g, InvDiaLeq):
            out = Not(InvDiaGeq(g.n + 1, go(g.sub)))
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = out
        return out

    return go(f)


def iter_postorder(f: Formula) -> Iterator[Formula]:
    """Yield every distinct node once, children before parents."""
    seen: set[Formula] = set()
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if node in seen:
            continue
        if expanded:
            seen.add(node)
            yield node
            continue
        stack.append((node, True))
        for c in reversed(children(node)):
            if c not in seen:
                stack.append((c, False))


def subformulas(f: Formula) -> list[Formula]:
    return list(iter_postorder(f))


def variables(f: Formula) -> set[str]:
    return {g.name for g in iter_postorder(f) if isinstance(g, Atom)}


def fresh_variable(avoid: Iterable[str], prefix: str = "_v") -> str:
    avoid = set(avoid)
    i = 0
    while f"{prefix}{i}" in avoid:
        i += 1
    return f"{prefix}{i}"


def modal_depth(f: Formula) -> int:
    depth: dict[Formula, int] = {}
    for g in iter_postorder(f):
        below = max((depth[c] for c in children(g)), default=0)
        depth[g] = below + 1 if isinstance(g, _GRADED + _UNARY_SURFACE) else below
    return depth[f]


def max_grade(f: Formula) -> int:
    """Largest counting subscript after desugaring (0 if no modality)."""
    return max(
        (g.n for g in iter_postorder(desugar(f)) if isinstance(g, (DiaGeq, InvDiaGeq))),
        default=0,
    )


def is_propositional(f: Formula) -> bool:
    return modal_depth(f) == 0


def substitute(f: Formula, mapping: dict[Formula, Formula]) -> Formula:
    """Replace maximal occurrences of the keys of ``mapping``."""
    memo: dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        if g in mapping:
            return mapping[g]
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, (Atom, Top, Bottom)):
            out = g
        elif isinstance(g, _BINARY):
            out = type(g)(go(g.left), go(g.right))
        elif isinstance(g, _GRADED):
            out = type(g)(g.n, go(g.sub))
        else:
            out = type(g)(go(g.sub))
        memo[g] = out
        return out

    return go(f)


def simplify(f: Formula) -> Formula:
    """Constant folding plus ``dia>=0 phi -> true`` and ``~~phi -> phi``.

    Semantics-preserving over every frame; the input is desugared first.
    """
    memo: dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, (Atom, Top, Bottom)):
            out = g
        elif isinstance(g, Not):
            s = go(g.sub)
            if isinstance(s, Top):
                out = FALSE
            elif isinstance(s, Bottom):
                out = TRUE
            elif isinstance(s, Not):
                out = s.sub
            else:
                out = Not(s)
        elif isinstance(g, And):
            a, b = go(g.left), go(g.right)
            if isinstance(a, Bottom) or isinstance(b, Bottom):
                out = FALSE
            elif isinstance(a, Top):
                out = b
            elif isinstance(b, Top):
                out = a
            else:
                out = And(a, b)
        elif isinstance(g, Or):
            a, b = go(g.left), go(g.right)
            if isinstance(a, Top) or isinstance(b, Top):
                out = TRUE
            elif isinstance(a, Bottom):
                out = b
            elif isinstance(b, Bottom):
                out = a
            else:
                out = Or(a, b)
        elif isinstance(g, Implies):
            a, b = go(g.left), go(g.right)
            if isinstance(a, Bottom) or isinstance(b, Top):
                out = TRUE
            elif isinstance(a, Top):
                out = b
            else:
                out = Implies(a, b)
        elif isinstance(g, Iff):
            out = Iff(go(g.left), go(g.right))
        elif isinstance(g, (DiaGeq, InvDiaGeq)):
            s = go(g.sub)
            if g.n == 0:
                out = TRUE
            elif isinstance(s, Bottom):
                out = FALSE
            else:
                out = type(g)(g.n, s)
        else:
            raise TypeError(f"not a core formula: {g!r}")
        memo[g] = out
        return out

    return go(desugar(f))


# ---------------------------------------------------------------------------
# Length


def _grade_bits(n: int) -> int:
    return max(1, n.bit_length())


def formula_length(f: Formula) -> int:
    """Symbol count with grades written in binary (``max(1, bitlen(n))`` bits)."""
    total = 0
    stack = [f]
    while stack:
        g = stack.pop()
        total += 1
        if isinstance(g, _GRADED):
            total += _grade_bits(g.n)
        stack.extend(children(g))
    return total


# ---------------------------------------------------------------------------
# Rendering


_BIN_SYMBOL = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
_PREFIX = {
    DiaGeq: "dia>=", InvDiaGeq: "idia>=", DiaLeq: "dia<=", InvDiaLeq: "idia<=",
    Dia: "dia", Box: "box", InvDia: "idia", InvBox: "ibox",
}


def render(f: Formula) -> str:
    """Fully parenthesised concrete syntax accepted by :func:`parse`."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Not):
        return "~" + render(f.sub)
    if isinstance(f, _BINARY):
        return f"({render(f.left)} {_BIN_SYMBOL[type(f)]} {render(f.right)})"
    if isinstance(f, _GRADED):
        return f"{_PREFIX[type(f)]}{f.n} {render(f.sub)}"
    if isinstance(f, _UNARY_SURFACE):
        return f"{_PREFIX[type(f)]} {render(f.sub)}"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Parsing


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<gmod>i?dia\s*(?:>=|<=)\s*\d+)
  | (?P<op><->|->|[~&|()])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)
_KEYWORDS = {"true", "false", "dia", "box", "idia", "ibox"}
Token = tuple[str, Union[str, tuple[str, str, int]], int]


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "gmod":
            gm = re.fullmatch(r"(i?dia)\s*(>=|<=)\s*(\d+)", lexeme)
            n = int(gm.group(3))
            if n > MAX_GRADE:
                raise FormulaSyntaxError("grade exceeds 64-bit unsigned range", pos, text)
            tokens.append(("mod", (gm.group(1), gm.group(2), n), pos))
        elif kind == "op":
            tokens.append(("op", lexeme, pos))
        elif kind == "ident":
            if lexeme in ("dia", "box", "idia", "ibox"):
                tokens.append(("mod", (lexeme, "", 1), pos))
            else:
                tokens.append(("ident", lexeme, pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str) -> FormulaSyntaxError:
        return FormulaSyntaxError(message, self.peek()[2], self.text)

    def at_op(self, symbol: str) -> bool:
        kind, value, _ = self.peek()
        return kind == "op" and value == symbol

    def formula(self) -> Formula:
        left = self.impl()
        while self.at_op("<->"):
            self.take()
            left = Iff(left, self.impl())
        return left

    def impl(self) -> Formula:
        left = self.or_()
        if self.at_op("->"):
            self.take()
            return Implies(left, self.impl())
        return left

    def or_(self) -> Formula:
        left = self.and_()
        while self.at_op("|"):
            self.take()
            left = Or(left, self.and_())
        return left

    def and_(self) -> Formula:
        left = self.unary()
        while self.at_op("&"):
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, value, _ = self.peek()
        if kind == "op" and value == "~":
            self.take()
            return Not(self.unary())
        if kind == "mod":
            self.take()
            name, cmp, n = value
            sub = self.unary()
            if cmp == "":
                return {"dia": Dia, "box": Box, "idia": InvDia, "ibox": InvBox}[name](sub)
            if name == "dia":
                return DiaGeq(n, sub) if cmp == ">=" else DiaLeq(n, sub)
            return InvDiaGeq(n, sub) if cmp == ">=" else InvDiaLeq(n, sub)
        return self.atom()

    def atom(self) -> Formula:
        kind, value, _ = self.peek()
        if kind == "ident":
            self.take()
            if value == "true":
                return TRUE
            if value == "false":
                return FALSE
            return Atom(value)
        if kind == "op" and value == "(":
            self.take()
            inner = self.formula()
            if not self.at_op(")"):
                raise self.error("expected ')'")
            self.take()
            return inner
        if kind == "eof":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {value!r}")


def parse(text: str, *, keep_surface: bool = False) -> Formula:
    """Parse concrete syntax.  Surface modalities are desugared unless
    ``keep_surface`` is set."""
    p = _Parser(text)
    f = p.formula()
    if p.peek()[0] != "eof":
        raise p.error(f"unexpected trailing input {p.peek()[1]!r}")
    return f if keep_surface else desugar(f)


def parse_file_text(text: str) -> Formula:
    """A ``.mf`` file holds one formula, possibly over several lines;
    ``#`` starts a comment."""
    lines = [ln.split("#", 1)[0] for ln in text.splitlines()]
    return parse(" ".join(lines))


def fold_and(items: Iterable[Formula]) -> Formula:
    """Left-nested conjunction (``true`` when empty)."""
    items = list(items)
    return reduce(And, items) if items else TRUE

"""First-order targets with counting quantifiers over the variables x and y.

Three translations are provided: the standard translation :func:`st`
(guarded two-variable counting logic), :func:`translate_k5` which adds the
shape of connected Euclidean structures through a ``lan`` predicate, and
:func:`translate_k45_c1` into one-variable counting logic.  :func:`fo_eval`
interprets formulas on finite structures by direct counting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import count
from typing import Mapping, Optional

from .kripke import KripkeStructure, lanterns
from .syntax import (
    And, Atom, Bottom, DiaGeq, Formula, Iff, Implies, InvDiaGeq, Not, Or, Top,
    desugar, fresh_variable, simplify, variables,
)

__all__ = [
    "FOFormula", "Pred", "Rel", "Eq", "FTrue", "FFalse", "FNot", "FAnd", "FOr",
    "FImp", "FIff", "Count", "Forall", "Exists", "FOStructure", "FOSyntaxError",
    "st", "translate_k5", "translate_k45_c1", "k5_shape_axiom", "expand_lan",
    "fo_eval", "serialize_fo", "parse_fo", "fo_variables", "free_variables",
    "binary_atoms", "is_guarded", "LAN", "lan_predicate",
]

LAN = "lan"


class FOFormula:
    __slots__ = ()

    def __str__(self) -> str:
        return serialize_fo(self)


@dataclass(frozen=True)
class Pred(FOFormula):
    name: str
    var: str


@dataclass(frozen=True)
class Rel(FOFormula):
    """``R(left, right)``."""

    left: str
    right: str


@dataclass(frozen=True)
class Eq(FOFormula):
    left: str
    right: str


@dataclass(frozen=True)
class FTrue(FOFormula):
    pass


@dataclass(frozen=True)
class FFalse(FOFormula):
    pass


@dataclass(frozen=True)
class FNot(FOFormula):
    sub: FOFormula


@dataclass(frozen=True)
class FAnd(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True)
class FOr(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True)
class FImp(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True)
class FIff(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True)
class Count(FOFormula):
    """``E>=n var. body`` or ``E<=n var. body``."""

    kind: str  # ">=" or "<="
    n: int
    var: str
    body: FOFormula

    def __post_init__(self):
        if self.kind not in (">=", "<="):
            raise ValueError(f"bad counting kind {self.kind!r}")


@dataclass(frozen=True)
class Forall(FOFormula):
    var: str
    body: FOFormula


@dataclass(frozen=True)
class Exists(FOFormula):
    var: str
    body: FOFormula


_FBIN = (FAnd, FOr, FImp, FIff)
_BINDERS = (Count, Forall, Exists)


def _other(v: str) -> str:
    return "y" if v == "x" else "x"


# ---------------------------------------------------------------------------
# Translations


def st(f: Formula, var: str = "x") -> FOFormula:
    """Standard translation with one free variable ``var``."""
    if var not in ("x", "y"):
        raise ValueError("variable must be 'x' or 'y'")
    f = desugar(f)
    memo: dict[tuple[Formula, str], FOFormula] = {}

    def go(g: Formula, v: str) -> FOFormula:
        key = (g, v)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(g, Atom):
            out = Pred(g.name, v)
        elif isinstance(g, Top):
            out = FTrue()
        elif isinstance(g, Bottom):
            out = FFalse()
        elif isinstance(g, Not):
            out = FNot(go(g.sub, v))
        elif isinstance(g, (And, Or, Implies, Iff)):
            out = _FOF[type(g)](go(g.left, v), go(g.right, v))
        elif isinstance(g, DiaGeq):
            u = _other(v)
            out = Count(">=", g.n, u, FAnd(Rel(v, u), go(g.sub, u)))
        elif isinstance(g, InvDiaGeq):
            u = _other(v)
            out = Count(">=", g.n, u, FAnd(Rel(u, v), go(g.sub, u)))
        else:
            raise TypeError(f"not a core formula: {g!r}")
        memo[key] = out
        return out

    return go(f, var)


_FOF = {And: FAnd, Or: FOr, Implies: FImp, Iff: FIff}


def lan_predicate(f: Formula) -> str:
    """Name of the lantern predicate for ``f``: ``lan`` unless ``f`` already
    uses that variable."""
    return fresh_variable(variables(f), "_lan") if LAN in variables(f) else LAN


def k5_shape_axiom(lan: str = LAN) -> FOFormula:
    """Non-lanterns are pairwise related and nothing points at a lantern."""
    x, y = "x", "y"
    body = FAnd(
        FImp(FAnd(FNot(Pred(lan, x)), FNot(Pred(lan, y))), Rel(x, y)),
        FImp(Pred(lan, y), FNot(Rel(x, y))),
    )
    return Forall(x, Forall(y, body))


def _serial_conjunct(lan: str) -> FOFormula:
    return Exists("x", FNot(Pred(lan, "x")))


def translate_k5(f: Formula, serial: bool = False) -> FOFormula:
    """Two-variable counting formula, free in ``x``, equivalent to ``f`` on
    connected (serial, if requested) Euclidean structures with the
    :func:`lan_predicate` interpreted as the lanterns."""
    lan = lan_predicate(f)
    out = FAnd(st(f, "x"), k5_shape_axiom(lan))
    return FAnd(out, _serial_conjunct(lan)) if serial else out


def translate_k45_c1(f: Formula, serial: bool = False) -> FOFormula:
    """One-variable counting formula, free in ``x``, equivalent to ``f`` on
    connected transitive Euclidean structures."""
    lan = lan_predicate(f)
    f = simplify(desugar(f))
    memo: dict[Formula, FOFormula] = {}
    x = "x"
    inner = FNot(Pred(lan, x))

    def go(g: Formula) -> FOFormula:
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, Atom):
            out = Pred(g.name, x)
        elif isinstance(g, Top):
            out = FTrue()
        elif isinstance(g, Bottom):
            out = FFalse()
        elif isinstance(g, Not) and isinstance(g.sub, DiaGeq):
            out = Count("<=", g.sub.n - 1, x, FAnd(inner, go(g.sub.sub)))
        elif isinstance(g, Not) and isinstance(g.sub, InvDiaGeq):
            out = FOr(Pred(lan, x), Count("<=", g.sub.n - 1, x, go(g.sub.sub)))
        elif isinstance(g, Not):
            out = FNot(go(g.sub))
        elif isinstance(g, (And, Or, Implies, Iff)):
            out = _FOF[type(g)](go(g.left), go(g.right))
        elif isinstance(g, DiaGeq):
            out = Count(">=", g.n, x, FAnd(inner, go(g.sub)))
        elif isinstance(g, InvDiaGeq):
            out = FAnd(inner, Count(">=", g.n, x, go(g.sub)))
        else:
            raise TypeError(f"not a core formula: {g!r}")
        memo[g] = out
        return out

    out = go(f)
    return FAnd(out, _serial_conjunct(lan)) if serial else out


# ---------------------------------------------------------------------------
# Structures and evaluation


@dataclass(frozen=True)
class FOStructure:
    """A Kripke structure read as a first-order structure, with extra unary
    predicates overriding or adding to its valuation."""

    base: KripkeStructure
    extra: Mapping[str, int]

    def unary(self, name: str) -> int:
        if name in self.extra:
            return self.extra[name]
        return self.base.truth(name)


def expand_lan(A: KripkeStructure, lan: str = LAN) -> FOStructure:
    mask = sum(1 << w for w in lanterns(A))
    return FOStructure(A, {lan: mask})


def free_variables(g: FOFormula) -> frozenset[str]:
    if isinstance(g, Pred):
        return frozenset({g.var})
    if isinstance(g, (Rel, Eq)):
        return frozenset({g.left, g.right})
    if isinstance(g, (FTrue, FFalse)):
        return frozenset()
    if isinstance(g, FNot):
        return free_variables(g.sub)
    if isinstance(g, _FBIN):
        return free_variables(g.left) | free_variables(g.right)
    return free_variables(g.body) - {g.var}


def fo_eval(S: FOStructure | KripkeStructure, g: FOFormula, assignment: Mapping[str, int] | None = None) -> bool:
    """Tarskian truth of ``g`` under ``assignment``."""
    if isinstance(S, KripkeStructure):
        S = FOStructure(S, {})
    assignment = dict(assignment or {})
    missing = free_variables(g) - set(assignment)
    if missing:
        raise ValueError(f"unbound free variables {sorted(missing)}")
    A = S.base
    n = A.n
    memo: dict[tuple, bool] = {}
    fv_cache: dict[int, frozenset] = {}

    def ev(h: FOFormula, env: tuple[tuple[str, int], ...]) -> bool:
        key = (id(h), env)
        hit = memo.get(key)
        if hit is not None:
            return hit
        e = dict(env)
        if isinstance(h, Pred):
            r = bool(S.unary(h.name) >> e[h.var] & 1)
        elif isinstance(h, Rel):
            r = A.has_edge(e[h.left], e[h.right])
        elif isinstance(h, Eq):
            r = e[h.left] == e[h.right]
        elif isinstance(h, FTrue):
            r = True
        elif isinstance(h, FFalse):
            r = False
        elif isinstance(h, FNot):
            r = not ev(h.sub, env)
        elif isinstance(h, FAnd):
            r = ev(h.left, env) and ev(h.right, env)
        elif isinstance(h, FOr):
            r = ev(h.left, env) or ev(h.right, env)
        elif isinstance(h, FImp):
            r = (not ev(h.left, env)) or ev(h.right, env)
        elif isinstance(h, FIff):
            r = ev(h.left, env) == ev(h.right, env)
        else:
            fv = fv_cache.get(id(h))
            if fv is None:
                fv = fv_cache[id(h)] = free_variables(h.body)
            def at(w):
                e2 = {k: v for k, v in e.items() if k in fv and k != h.var}
                if h.var in fv:
                    e2[h.var] = w
                return ev(h.body, tuple(sorted(e2.items())))
            if isinstance(h, Forall):
                r = all(at(w) for w in range(n))
            elif isinstance(h, Exists):
                r = any(at(w) for w in range(n))
            else:
                hits = 0
                for w in range(n):
                    if at(w):
                        hits += 1
                        if h.kind == ">=" and hits >= h.n:
                            break
                        if h.kind == "<=" and hits > h.n:
                            break
                r = hits >= h.n if h.kind == ">=" else hits <= h.n
        memo[key] = r
        return r

    roots = tuple(sorted((k, v) for k, v in assignment.items() if k in free_variables(g)))
    return ev(g, roots)  # id()-keyed memos are safe: g keeps its nodes alive


# ---------------------------------------------------------------------------
# Fragment checks


def _walk(g: FOFormula):
    stack = [g]
    while stack:
        h = stack.pop()
        yield h
        if isinstance(h, FNot):
            stack.append(h.sub)
        elif isinstance(h, _FBIN):
            stack += [h.left, h.right]
        elif isinstance(h, _BINDERS):
            stack.append(h.body)


def fo_variables(g: FOFormula) -> frozenset[str]:
    out = set()
    for h in _walk(g):
        if isinstance(h, Pred):
            out.add(h.var)
        elif isinstance(h, (Rel, Eq)):
            out |= {h.left, h.right}
        elif isinstance(h, _BINDERS):
            out.add(h.var)
    return frozenset(out)


def binary_atoms(g: FOFormula) -> int:
    return sum(1 for h in _walk(g) if isinstance(h, (Rel, Eq)))


def is_guarded(g: FOFormula) -> bool:
    """Every quantifier body is ``R(.,.) & ...`` with the guard mentioning
    both variables."""
    for h in _walk(g):
        if isinstance(h, _BINDERS):
            body = h.body
            if not (isinstance(body, FAnd) and isinstance(body.left, Rel)):
                return False
            if {body.left.left, body.left.right} != {"x", "y"}:
                return False
    return True


# ---------------------------------------------------------------------------
# Serialization


_FSYM = {FAnd: "&", FOr: "|", FImp: "->", FIff: "<->"}


def serialize_fo(g: FOFormula, dialect: str = "native") -> str:
    if dialect == "native":
        return _native(g)
    if dialect == "smtlib-approx":
        return _smt(g, count())
    raise ValueError(f"unknown dialect {dialect!r}")


def _native(g: FOFormula) -> str:
    if isinstance(g, Pred):
        return f"{g.name}({g.var})"
    if isinstance(g, Rel):
        return f"R({g.left},{g.right})"
    if isinstance(g, Eq):
        return f"{g.left} = {g.right}"
    if isinstance(g, FTrue):
        return "true"
    if isinstance(g, FFalse):
        return "false"
    if isinstance(g, FNot):
        return "~" + _native(g.sub)
    if isinstance(g, _FBIN):
        return f"({_native(g.left)} {_FSYM[type(g)]} {_native(g.right)})"
    if isinstance(g, Count):
        return f"E{g.kind}{g.n} {g.var}. {_native(g.body)}"
    if isinstance(g, Forall):
        return f"A {g.var}. {_native(g.body)}"
    if isinstance(g, Exists):
        return f"E {g.var}. {_native(g.body)}"
    raise TypeError(g)


def _smt(g: FOFormula, fresh, env: Optional[dict] = None) -> str:
    """SMT-LIB-like text: ``U`` is the sort of worlds; counting quantifiers
    are expanded with pairwise-distinct witnesses (``E<=n`` as the negation
    of ``E>=n+1``)."""
    env = env or {}

    def name(v):
        return env.get(v, v)

    if isinstance(g, Pred):
        return f"({g.name} {name(g.var)})"
    if isinstance(g, Rel):
        return f"(R {name(g.left)} {name(g.right)})"
    if isinstance(g, Eq):
        return f"(= {name(g.left)} {name(g.right)})"
    if isinstance(g, FTrue):
        return "true"
    if isinstance(g, FFalse):
        return "false"
    if isinstance(g, FNot):
        return f"(not {_smt(g.sub, fresh, env)})"
    if isinstance(g, _FBIN):
        op = {FAnd: "and", FOr: "or", FImp: "=>", FIff: "="}[type(g)]
        return f"({op} {_smt(g.left, fresh, env)} {_smt(g.right, fresh, env)})"
    if isinstance(g, (Forall, Exists)):
        v = f"{g.var}{next(fresh)}"
        q = "forall" if isinstance(g, Forall) else "exists"
        return f"({q} (({v} U)) {_smt(g.body, fresh, {**env, g.var: v})})"
    if isinstance(g, Count):
        need = g.n if g.kind == ">=" else g.n + 1
        if need == 0:
            inner = "true"
        else:
            ws = [f"{g.var}{next(fresh)}" for _ in range(need)]
            parts = [_smt(g.body, fresh, {**env, g.var: w}) for w in ws]
            if need > 1:
                parts.append(f"(distinct {' '.join(ws)})")
            body = parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"
            decl = " ".join(f"({w} U)" for w in ws)
            inner = f"(exists ({decl}) {body})"
        return inner if g.kind == ">=" else f"(not {inner})"
    raise TypeError(g)


class FOSyntaxError(ValueError):
    pass


_FO_TOKEN = re.compile(
    r"\s*(?:(?P<count>E(?:>=|<=)\d+)|(?P<quant>[AE])(?=\s+[xy]\s*\.)|(?P<op><->|->|[~&|().,=])"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)


def parse_fo(text: str) -> FOFormula:
    """Inverse of the native serializer."""
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _FO_TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise FOSyntaxError(f"unexpected input at position {pos}")
        toks.append((m.lastgroup, m.group(m.lastgroup)))
        pos = m.end()
    toks.append(("eof", ""))
    i = 0

    def peek():
        return toks[i]

    def take(kind=None, value=None):
        nonlocal i
        k, v = toks[i]
        if (kind and k != kind) or (value is not None and v != value):
            raise FOSyntaxError(f"expected {value or kind}, found {v!r}")
        i += 1
        return v

    def formula():
        left = impl()
        while peek() == ("op", "<->"):
            take()
            left = FIff(left, impl())
        return left

    def impl():
        left = disj()
        if peek() == ("op", "->"):
            take()
            return FImp(left, impl())
        return left

    def disj():
        left = conj_()
        while peek() == ("op", "|"):
            take()
            left = FOr(left, conj_())
        return left

    def conj_():
        left = unary()
        while peek() == ("op", "&"):
            take()
            left = FAnd(left, unary())
        return left

    def unary():
        k, v = peek()
        if (k, v) == ("op", "~"):
            take()
            return FNot(unary())
        if k == "count":
            take()
            kind, n = v[1:3], int(v[3:])
            var = take("ident")
            take("op", ".")
            return Count(kind, n, var, unary())
        if k == "quant":
            take()
            var = take("ident")
            take("op", ".")
            return (Forall if v == "A" else Exists)(var, unary())
        return atom()

    def atom():
        k, v = peek()
        if (k, v) == ("op", "("):
            take()
            inner = formula()
            take("op", ")")
            return inner
        if k == "ident":
            take()
            if v == "true":
                return FTrue()
            if v == "false":
                return FFalse()
            if peek() == ("op", "="):
                take()
                return Eq(v, take("ident"))
            take("op", "(")
            a = take("ident")
            if v == "R" and peek() == ("op", ","):
                take()
                b = take("ident")
                take("op", ")")
                return Rel(a, b)
            take("op", ")")
            return Pred(v, a)
        raise FOSyntaxError(f"unexpected token {v!r}")

    out = formula()
    if peek()[0] != "eof":
        raise FOSyntaxError(f"trailing input {peek()[1]!r}")
    return out

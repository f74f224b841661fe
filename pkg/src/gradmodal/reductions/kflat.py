"""Global satisfiability over K, translated to S4 / K4 / D4 and to K5 / D5.

A K model is turned into a two-way model by labelling worlds ``c0..c3`` by
depth modulo 4 and reversing every edge that leaves a ``c1`` or ``c3``
world; forward steps are then ``c0 -> c1`` and ``c2 -> c3`` edges, the
others are backward ``c1 <- c2`` and ``c3 <- c0`` edges, and no world has
both strict in- and out-edges, so the result is transitive.  The Euclidean
variant fuses all ``c1``/``c3`` worlds into one reflexive clique and keeps
``c0``/``c2`` worlds as irreflexive lanterns.  The formula is the same for
both targets.
"""

from __future__ import annotations

from typing import Optional

from ..kripke import KripkeStructure, bits, mask_of
from ..syntax import (
    And, Atom, Bottom, DiaGeq, Formula, Iff, Implies, InvDiaGeq, Not, Or, Top, conj,
    desugar, disj, fresh_variable, iff, implies, modal_depth, neg, variables,
)

__all__ = [
    "C", "flatten_modal_depth", "reduce_global_k_to_transitive", "reduce_global_k_to_k5",
    "translate", "exactly_one_c", "build_inverted_tree_model", "layered_unfolding",
    "inverted_model", "tree_depths",
]

C = tuple(Atom(f"c{i}") for i in range(4))
MODES = ("transitive", "euclidean")


def _check_basic(f: Formula) -> None:
    for g in _walk(f):
        if isinstance(g, InvDiaGeq) or (isinstance(g, DiaGeq) and g.n != 1):
            raise ValueError("only dia and box are allowed here")


def _walk(f: Formula):
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, (And, Or, Implies, Iff)):
            stack += [g.left, g.right]
        elif isinstance(g, (Not, DiaGeq, InvDiaGeq)):
            stack.append(g.sub)


def flatten_modal_depth(f: Formula, prefix: str = "q") -> Formula:
    """Modal depth at most one, equisatisfiable for global satisfaction.

    Each nested ``dia psi`` becomes a fresh letter ``q`` and ``q <-> dia psi``
    is conjoined; boxes are ``~dia~`` and are handled by the same rule.
    """
    f = desugar(f)
    _check_basic(f)
    avoid = variables(f) | {c.name for c in C}
    defs: dict[Formula, Atom] = {}
    order: list[tuple[Atom, Formula]] = []

    def prop(g: Formula) -> Formula:
        if isinstance(g, DiaGeq):
            d = DiaGeq(1, prop(g.sub))
            q = defs.get(d)
            if q is None:
                q = Atom(fresh_variable(avoid, prefix))
                avoid.add(q.name)
                defs[d] = q
                order.append((q, d))
            return q
        return _map(g, prop)

    def top(g: Formula) -> Formula:
        if isinstance(g, DiaGeq):
            return DiaGeq(1, prop(g.sub))
        return _map(g, top)

    body = top(f)
    return conj([body] + [iff(q, d) for q, d in order]) if order else body


def _map(g: Formula, fn) -> Formula:
    if isinstance(g, (Atom, Top, Bottom)):
        return g
    if isinstance(g, Not):
        return Not(fn(g.sub))
    return type(g)(fn(g.left), fn(g.right))


def exactly_one_c() -> Formula:
    pairs = [neg(C[i]) | neg(C[j]) for i in range(4) for j in range(i + 1, 4)]
    return disj(C) & conj(pairs)


def translate(f: Formula) -> Formula:
    """The ``tr`` map: identity on Booleans, four guarded clauses per modality."""

    def tr(g: Formula) -> Formula:
        if isinstance(g, Not) and isinstance(g.sub, DiaGeq) and isinstance(g.sub.sub, Not):
            x = tr(g.sub.sub.sub)  # box x
            return conj([
                implies(C[0], _box(implies(C[1], x))),
                implies(C[1], _ibox(implies(C[2], x))),
                implies(C[2], _box(implies(C[3], x))),
                implies(C[3], _ibox(implies(C[0], x))),
            ])
        if isinstance(g, DiaGeq):
            x = tr(g.sub)
            return conj([
                implies(C[0], DiaGeq(1, C[1] & x)),
                implies(C[1], InvDiaGeq(1, C[2] & x)),
                implies(C[2], DiaGeq(1, C[3] & x)),
                implies(C[3], InvDiaGeq(1, C[0] & x)),
            ])
        return _map(g, tr)

    return tr(f)


def _box(x: Formula) -> Formula:
    return Not(DiaGeq(1, Not(x)))


def _ibox(x: Formula) -> Formula:
    return Not(InvDiaGeq(1, Not(x)))


def reduce_global_k_to_transitive(f: Formula) -> Formula:
    """``phi*``: globally satisfiable over K4, D4 and S4 iff ``f`` is over K."""
    f = desugar(f)
    _check_basic(f)
    if modal_depth(f) > 1:
        raise ValueError("flatten the formula first (modal depth must be at most 1)")
    clash = variables(f) & {c.name for c in C}
    if clash:
        raise ValueError(f"reserved letters used: {sorted(clash)}")
    return translate(f) & exactly_one_c()


def reduce_global_k_to_k5(f: Formula) -> Formula:
    """The same formula serves K5 and D5."""
    return reduce_global_k_to_transitive(f)


# ---------------------------------------------------------------------------
# Witness models


def tree_depths(A: KripkeStructure) -> Optional[list[int]]:
    """Depth of each world if ``A`` is a finite tree, else ``None``."""
    roots = [w for w in range(A.n) if A.pred[w] == 0]
    if len(roots) != 1 or any(bin(A.pred[w]).count("1") > 1 for w in range(A.n)):
        return None
    d = [-1] * A.n
    d[roots[0]] = 0
    frontier = [roots[0]]
    while frontier:
        nxt = []
        for w in frontier:
            for v in bits(A.succ[w]):
                if d[v] >= 0:
                    return None
                d[v] = d[w] + 1
                nxt.append(v)
        frontier = nxt
    return d if min(d) >= 0 else None


def _invert(n: int, edges, label: list[int], valuation: dict[str, int], mode: str) -> KripkeStructure:
    """Reverse edges out of odd layers and attach the requested shape."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    succ = [0] * n
    for w, v in edges:
        if label[w] % 2 == 0:
            succ[w] |= 1 << v
        else:
            succ[v] |= 1 << w
    if mode == "transitive":
        # reflexive closure; every strict path already has length one
        succ = [s | (1 << w) for w, s in enumerate(succ)]
    else:
        odd = mask_of(w for w in range(n) if label[w] % 2)
        succ = [odd if label[w] % 2 else s for w, s in enumerate(succ)]
    val = dict(valuation)
    for i, c in enumerate(C):
        val[c.name] = mask_of(w for w in range(n) if label[w] == i)
    return KripkeStructure.from_masks(succ, val)


def build_inverted_tree_model(A: KripkeStructure, mode: str = "transitive") -> KripkeStructure:
    """Tree ``A`` with layers labelled ``c_(depth mod 4)`` and every second
    edge layer reversed."""
    d = tree_depths(A)
    if d is None:
        raise ValueError("input is not a finite tree")
    label = [x % 4 for x in d]
    val = {v: A.truth(v) for v in A.variables if v not in {c.name for c in C}}
    return _invert(A.n, A.edges(), label, val, mode)


def layered_unfolding(A: KripkeStructure, mode: str = "transitive") -> KripkeStructure:
    """Witness for any finite K model: four copies of ``A`` indexed by depth
    modulo 4, with each edge ``w -> v`` lifted to ``(w, i) -> (v, i+1)``.
    World ``(w, i)`` has index ``i * n + w``."""
    n = A.n
    edges = [(i * n + w, ((i + 1) % 4) * n + v) for i in range(4) for w, v in A.edges()]
    label = [k // n for k in range(4 * n)]
    val = {
        v: sum(A.truth(v) << (i * n) for i in range(4))
        for v in A.variables if v not in {c.name for c in C}
    }
    return _invert(4 * n, edges, label, val, mode)


def inverted_model(A: KripkeStructure, mode: str = "transitive") -> KripkeStructure:
    """Tree inversion when ``A`` is a tree, layered unfolding otherwise."""
    if tree_depths(A) is not None:
        return build_inverted_tree_model(A, mode)
    return layered_unfolding(A, mode)

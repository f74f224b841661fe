"""Seeded random corpora: formulas, structures, solver queries and surgery inputs.

Every generator takes a :class:`random.Random` so corpora are reproducible
from a single seed.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from .kripke import (
    KripkeStructure, euclidean_closure, is_connected, mask_of, transitive_closure,
)
from .normalform import NormalForm, extend_model, to_normal_form
from .reductions.kflat import flatten_modal_depth
from .semantics import truth_sets
from .syntax import (
    FALSE, TRUE, And, Atom, DiaGeq, Formula, Iff, Implies, InvDiaGeq, Not, Or, box, conj,
    ibox, iff, modal_depth,
)

__all__ = [
    "random_formula", "random_basic_formula", "random_structure",
    "random_transitive", "random_euclidean", "euclidean_corpus",
    "surgery_pair", "duplicate_heavy_pair", "flattened_corpus",
]


def random_formula(
    rng: random.Random,
    names: Sequence[str] = ("p", "q"),
    depth: int = 2,
    max_grade: int = 3,
    converse: bool = True,
    graded_converse: bool = True,
    size: int = 6,
) -> Formula:
    """Random formula of modal depth at most ``depth``; ``size`` bounds the
    number of connectives along any branch."""

    def go(d: int, s: int) -> Formula:
        if s <= 0 or rng.random() < 0.25:
            r = rng.random()
            if r < 0.08:
                return TRUE if rng.random() < 0.5 else FALSE
            return Atom(rng.choice(list(names)))
        moves = ["not", "and", "or", "imp", "iff"]
        if d > 0:
            moves += ["dia", "dia", "box"] + (["idia", "ibox"] if converse else [])
        m = rng.choice(moves)
        if m == "not":
            return Not(go(d, s - 1))
        if m in ("and", "or", "imp", "iff"):
            node = {"and": And, "or": Or, "imp": Implies, "iff": Iff}[m]
            return node(go(d, s - 1), go(d, s - 1))
        sub = go(d - 1, s - 1)
        if m == "dia":
            return DiaGeq(rng.randint(1, max_grade), sub)
        if m == "box":
            return box(sub)
        if m == "idia":
            n = rng.randint(1, max_grade) if graded_converse else 1
            return InvDiaGeq(n, sub)
        return ibox(sub)

    return go(depth, size)


def random_basic_formula(rng: random.Random, names: Sequence[str] = ("p",), depth: int = 2, size: int = 5) -> Formula:
    """Formula in the plain (dia, box) language."""
    return random_formula(rng, names, depth, max_grade=1, converse=False, size=size)


def _valuation(rng: random.Random, n: int, names: Sequence[str]) -> dict[str, int]:
    return {v: rng.getrandbits(n) if n else 0 for v in names}


def random_structure(
    rng: random.Random, n: int, names: Sequence[str] = ("p", "q"), density: Optional[float] = None
) -> KripkeStructure:
    if density is None:
        density = rng.choice([0.15, 0.3, 0.5])
    succ = [mask_of(j for j in range(n) if rng.random() < density) for _ in range(n)]
    return KripkeStructure.from_masks(succ, _valuation(rng, n, names))


def random_transitive(rng: random.Random, n: int, names: Sequence[str] = ("p", "q")) -> KripkeStructure:
    return transitive_closure(random_structure(rng, n, names, rng.choice([0.1, 0.2, 0.35])))


def random_euclidean(
    rng: random.Random, n: int, names: Sequence[str] = ("p", "q"), transitive: bool = False,
    tries: int = 200,
) -> KripkeStructure:
    """Connected Euclidean structure obtained by closing a random relation."""
    for _ in range(tries):
        A = random_structure(rng, n, names, rng.choice([0.05, 0.12, 0.25]))
        A = euclidean_closure(A, transitive=transitive)
        if is_connected(A):
            return A
    raise RuntimeError("could not generate a connected Euclidean structure")


def euclidean_corpus(
    rng: random.Random, count: int, max_worlds: int = 8, names: Sequence[str] = ("p", "q"),
    transitive: bool = False,
) -> list[KripkeStructure]:
    return [random_euclidean(rng, rng.randint(1, max_worlds), names, transitive) for _ in range(count)]


# ---------------------------------------------------------------------------
# Surgery inputs


def _guarded_formula(rng: random.Random, A: KripkeStructure, k: int, max_grade: int) -> tuple[KripkeStructure, Formula]:
    """``AND (r_i <-> g_i)`` for random ``g_i``, with fresh ``r_i`` interpreted
    in ``A`` so that ``A`` becomes a global model."""
    base = list(A.variables)
    gs: list[Formula] = []
    while len(gs) < k:
        g = random_formula(rng, base, depth=2, max_grade=max_grade, graded_converse=False, size=4)
        if modal_depth(g) > 0:  # a modality-free g gives a trivial normal form
            gs.append(g)
    rs = [f"r{i}" for i in range(k)]
    sets = truth_sets(A, gs)
    A2 = A.with_valuation(dict(zip(rs, sets)))
    return A2, conj(iff(Atom(r), g) for r, g in zip(rs, gs))


def surgery_pair(
    rng: random.Random, max_worlds: int = 7, max_grade: int = 2
) -> tuple[NormalForm, KripkeStructure]:
    """A normal form with a finite transitive global model of it."""
    while True:
        A = random_transitive(rng, rng.randint(1, max_worlds), ("p", "q"))
        A, f = _guarded_formula(rng, A, rng.randint(1, 2), max_grade)
        nf = to_normal_form(f)
        if nf.definitions:  # simplification can erase every modality
            return nf, extend_model(A, nf)


def duplicate_heavy_pair(
    rng: random.Random, copies: int = 7, kinds: int = 2, max_grade: int = 2
) -> tuple[NormalForm, KripkeStructure]:
    """A root seeing ``copies`` identical singleton cliques of each of
    ``kinds`` valuations, so that every clique type is over-represented."""
    n = 1 + copies * kinds
    succ = [0] * n
    reflexive_root = rng.random() < 0.5
    succ[0] = mask_of(range(1, n)) | (1 if reflexive_root else 0)
    shapes = [(rng.random() < 0.5, rng.getrandbits(2)) for _ in range(kinds)]
    val = {"p": 1 if rng.random() < 0.5 else 0, "q": 0}
    w = 1
    for refl, bitsv in shapes:
        for _ in range(copies):
            if refl:
                succ[w] |= 1 << w
            if bitsv & 1:
                val["p"] |= 1 << w
            if bitsv & 2:
                val["q"] |= 1 << w
            w += 1
    A = KripkeStructure.from_masks(succ, val)
    while True:
        B, f = _guarded_formula(rng, A, rng.randint(1, 2), max_grade)
        nf = to_normal_form(f)
        if nf.leq:  # the depth bound needs at least one upper-bound conjunct
            return nf, extend_model(B, nf)


def flattened_corpus(rng: random.Random, count: int, depth: int = 2) -> list[Formula]:
    """Flattened (dia, box) formulas over the single letter ``p``."""
    return [flatten_modal_depth(random_basic_formula(rng, ("p",), depth)) for _ in range(count)]

from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from gradmodal.kripke import KripkeStructure
from gradmodal.syntax import (
    FALSE, TRUE, And, Atom, Bottom, Box, Dia, DiaGeq, DiaLeq, Formula, Iff, Implies,
    InvBox, InvDia, InvDiaGeq, InvDiaLeq, Not, Or, Top,
)

settings.register_profile(
    "default", max_examples=80, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


# ---------------------------------------------------------------------------
# Independent oracle: direct recursive evaluation from the definitions,
# with explicit successor/predecessor lists and no bit tricks.


def naive_holds(A: KripkeStructure, w: int, f: Formula) -> bool:
    edges = set(A.edges())
    succs = [[v for v in range(A.n) if (u, v) in edges] for u in range(A.n)]
    preds = [[v for v in range(A.n) if (v, u) in edges] for u in range(A.n)]
    memo: dict[tuple[int, int], bool] = {}

    def h(w: int, f: Formula) -> bool:
        key = (w, id(f))  # subformulas stay alive for the whole call
        if key not in memo:
            memo[key] = _step(A, w, f, succs[w], preds[w], h)
        return memo[key]

    return h(w, f)


def _step(A, w, f, succs, preds, h) -> bool:
    if isinstance(f, Atom):
        return A.holds(f.name, w) if f.name in A.valuation else False
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Not):
        return not h(w, f.sub)
    if isinstance(f, And):
        return h(w, f.left) and h(w, f.right)
    if isinstance(f, Or):
        return h(w, f.left) or h(w, f.right)
    if isinstance(f, Implies):
        return (not h(w, f.left)) or h(w, f.right)
    if isinstance(f, Iff):
        return h(w, f.left) == h(w, f.right)
    if isinstance(f, DiaGeq):
        return sum(h(v, f.sub) for v in succs) >= f.n
    if isinstance(f, InvDiaGeq):
        return sum(h(v, f.sub) for v in preds) >= f.n
    if isinstance(f, DiaLeq):
        return sum(h(v, f.sub) for v in succs) <= f.n
    if isinstance(f, InvDiaLeq):
        return sum(h(v, f.sub) for v in preds) <= f.n
    if isinstance(f, Dia):
        return any(h(v, f.sub) for v in succs)
    if isinstance(f, Box):
        return all(h(v, f.sub) for v in succs)
    if isinstance(f, InvDia):
        return any(h(v, f.sub) for v in preds)
    if isinstance(f, InvBox):
        return all(h(v, f.sub) for v in preds)
    raise TypeError(f)


def _edge_set(A: KripkeStructure) -> set[tuple[int, int]]:
    return set(A.edges())


def naive_global(A: KripkeStructure, f: Formula) -> bool:
    return all(naive_holds(A, w, f) for w in range(A.n))


def naive_axioms(A: KripkeStructure) -> set[str]:
    """Frame axioms straight from their first-order definitions."""
    E = _edge_set(A)
    W = range(A.n)
    out = set()
    if all(any((w, v) in E for v in W) for w in W):
        out.add("D")
    if all((w, w) in E for w in W):
        out.add("T")
    if all((v, w) in E for w, v in E):
        out.add("B")
    if all((u, x) in E for u, v in E for w, x in E if v == w):
        out.add("4")
    if all((v, x) in E for u, v in E for w, x in E if u == w):
        out.add("5")
    return out


# ---------------------------------------------------------------------------
# Hypothesis strategies


NAMES = ("p", "q")


def formulas(names=NAMES, max_depth: int = 2, surface: bool = True, max_grade: int = 3):
    atoms = st.sampled_from([Atom(n) for n in names] + [TRUE, FALSE])

    def extend(sub):
        grade = st.integers(0, max_grade)
        options = [
            sub.map(Not),
            st.builds(And, sub, sub), st.builds(Or, sub, sub),
            st.builds(Implies, sub, sub), st.builds(Iff, sub, sub),
            st.builds(DiaGeq, grade, sub), st.builds(InvDiaGeq, grade, sub),
        ]
        if surface:
            options += [
                st.builds(DiaLeq, grade, sub), st.builds(InvDiaLeq, grade, sub),
                sub.map(Dia), sub.map(Box), sub.map(InvDia), sub.map(InvBox),
            ]
        return st.one_of(options)

    return st.recursive(atoms, extend, max_leaves=6)


@st.composite
def structures(draw, max_worlds: int = 5, names=NAMES):
    n = draw(st.integers(1, max_worlds))
    succ = [draw(st.integers(0, (1 << n) - 1)) for _ in range(n)]
    val = {v: draw(st.integers(0, (1 << n) - 1)) for v in names}
    return KripkeStructure.from_masks(succ, val)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

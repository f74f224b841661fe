from __future__ import annotations

import random

from hypothesis import given
from hypothesis import strategies as st

from conftest import formulas, naive_global, naive_holds, structures
from gradmodal.generators import random_euclidean, random_formula
from gradmodal.kripke import KripkeStructure, symmetric_closure
from gradmodal.semantics import (
    combined_satisfies, globally_satisfies, locally_satisfied_somewhere,
    satisfies, truth_set,
)
from gradmodal.solvers.euclid import universal
from gradmodal.syntax import FALSE, TRUE, Atom, DiaGeq, InvDiaGeq, Not, dia_leq, parse

p = Atom("p")


def test_reflexive_world_sees_itself():
    A = KripkeStructure(1, [(0, 0)], {"p": [0]})
    assert satisfies(A, 0, DiaGeq(1, p))


def test_counting_successors():
    A = KripkeStructure(4, [(0, 1), (0, 2), (0, 3)], {"p": [1, 2, 3]})
    assert satisfies(A, 0, DiaGeq(3, p))
    assert not satisfies(A, 0, DiaGeq(4, p))


def test_converse_top_separates_lanterns_from_inner_worlds():
    A = KripkeStructure(4, [(0, 2), (1, 2), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)])
    f = InvDiaGeq(1, TRUE)
    assert satisfies(A, 2, f)
    assert not satisfies(A, 0, f)


def test_global_local_combined():
    A = KripkeStructure(2, [(0, 1), (1, 0)], {"p": [0, 1]})
    assert globally_satisfies(A, p)
    B = KripkeStructure(3, [], {"p": [2]})
    assert locally_satisfied_somewhere(B, p) == 2
    assert combined_satisfies(A, TRUE, FALSE) is None
    assert combined_satisfies(B, TRUE, p) == 2
    assert combined_satisfies(B, p, TRUE) is None


def test_unknown_variables_are_false():
    A = KripkeStructure(2, [(0, 1)])
    assert truth_set(A, Atom("zz")) == 0
    assert truth_set(A, Not(Atom("zz"))) == 3


@given(formulas(), structures())
def test_bitset_evaluator_matches_recursive_oracle(f, A):
    got = truth_set(A, f)
    want = sum(1 << w for w in range(A.n) if naive_holds(A, w, f))
    assert got == want
    assert globally_satisfies(A, f) == naive_global(A, f)


@given(formulas(max_grade=3), structures(), st.integers(0, 4), st.integers(0, 4))
def test_grade_monotonicity(f, A, m, n):
    lo, hi = min(m, n), max(m, n)
    for node in (DiaGeq, InvDiaGeq):
        strong, weak = truth_set(A, node(hi, f)), truth_set(A, node(lo, f))
        assert strong & ~weak == 0


@given(formulas(), structures(), st.integers(0, 4))
def test_upper_bound_duality(f, A, n):
    leq = truth_set(A, dia_leq(f, n))
    geq = truth_set(A, DiaGeq(n + 1, f))
    assert leq == A.full & ~geq


@given(formulas(), structures(), st.integers(0, 3))
def test_symmetric_frames_collapse_converse(f, A, n):
    B = symmetric_closure(A)
    assert truth_set(B, DiaGeq(n, f)) == truth_set(B, InvDiaGeq(n, f))


def test_universal_modality_on_connected_euclidean_structures():
    rng = random.Random(7)
    for _ in range(200):
        A = random_euclidean(rng, rng.randint(1, 7))
        f = random_formula(rng, depth=2)
        assert bool(truth_set(A, universal(f))) == globally_satisfies(A, f)


def test_parsed_and_built_formulas_agree():
    A = KripkeStructure(3, [(0, 1), (0, 2), (1, 2)], {"p": [1, 2]})
    assert truth_set(A, parse("dia>=2 p")) == truth_set(A, DiaGeq(2, p)) == 1

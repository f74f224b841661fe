from __future__ import annotations

import random

import pytest

from gradmodal.generators import duplicate_heavy_pair, surgery_pair
from gradmodal.kripke import (
    KripkeStructure, cliques, depth, frame_axioms, transitive_closure, width,
)
from gradmodal.normalform import (
    NormalForm, extend_model, m_constant, nf_bounds, nf_to_formula, nf_variables,
    to_normal_form,
)
from gradmodal.semantics import globally_satisfies
from gradmodal.surgery import (
    CliqueType, SurgeryError, clique_profiles, clique_type, d_value, finitize,
    finitize_trace, layers, profile, reduce_depth, reduce_width, s_set,
)
from gradmodal.syntax import Atom, parse

p = Atom("p")


def _leq_nf(d: int) -> NormalForm:
    return NormalForm(leq=(("g", d, p),))


def test_d_value_counts_reflexive_closure_and_caps():
    lone = KripkeStructure(1)
    assert d_value(lone, 0, 0, _leq_nf(1)) == 0
    lone_p = KripkeStructure(1, valuation={"p": [0]})
    assert d_value(lone_p, 0, 0, _leq_nf(1)) == 1
    fan = KripkeStructure(4, [(0, 1), (0, 2), (0, 3)], {"p": [1, 2, 3]})
    assert d_value(fan, 0, 0, _leq_nf(1)) == 2


def test_s_set_looks_downwards():
    nf = NormalForm(inv_box=(("a", p), ("b", Atom("q"))))
    assert s_set(KripkeStructure(1, valuation={"p": [0]}), 0, nf) == {0}
    assert s_set(KripkeStructure(1), 0, nf) == frozenset()
    A = KripkeStructure(2, [(0, 1)], {"q": [0]})
    assert 1 in s_set(A, 1, nf)


def test_reduce_depth_identity_and_collapse():
    chain = transitive_closure(KripkeStructure(3, [(0, 1), (1, 2)]))
    out = reduce_depth(chain, NormalForm())
    assert depth(out) == 0 and len(cliques(out)) == 1
    # keys differ on the single d-value, so no edge is added
    nf = _leq_nf(3)
    C = KripkeStructure(2, [(0, 1)], {"p": [0], "g": [0, 1]})
    assert reduce_depth(C, nf) == C


def test_reduce_depth_rejects_bad_input():
    with pytest.raises(SurgeryError):
        reduce_depth(KripkeStructure(3, [(0, 1), (1, 2)]), NormalForm())
    with pytest.raises(SurgeryError):
        reduce_depth(KripkeStructure(1), NormalForm(eta=p))


def test_reduce_width_selection():
    nf = NormalForm(geq=(("g", 2, p),))
    clique = KripkeStructure(5, [(i, j) for i in range(5) for j in range(5)],
                             {"p": range(5), "g": range(5)})
    assert width(reduce_width(clique, nf)) <= 3
    singles = KripkeStructure(3, [(0, 1), (0, 2)], {"p": [1, 2]})
    assert reduce_width(singles, NormalForm(geq=(("g", 1, p),))) == singles
    dull = KripkeStructure(4, [(i, j) for i in range(4) for j in range(4)])
    assert reduce_width(dull, NormalForm(geq=(("g", 1, p),))).n == 1


def test_layers_and_profiles():
    clique = KripkeStructure(3, [(i, j) for i in range(3) for j in range(3)], {"p": range(3)})
    assert layers(clique) == [frozenset({0, 1, 2})]
    prof = profile(clique, {0, 1, 2}, 1, ["p"])
    assert prof.H == (((True,), 2),)
    lone = KripkeStructure(1, valuation={"p": [0]})
    prof = profile(lone, {0}, 2, ["p"])
    assert (prof.H, prof.A, prof.B, prof.irref) == ((((True,), 1),), (), frozenset(), True)
    A = KripkeStructure(3, [(0, 1), (0, 2)], {"p": [1]})
    ct = clique_type(A, {0}, [frozenset({1}), frozenset({2})], k=1, tvars=["p"])
    assert isinstance(ct, CliqueType) and ct.S == {1, 2}


def test_finitize_keeps_small_models_intact():
    A = KripkeStructure(3, [(0, 1), (0, 2)], {"p": [1]})
    assert finitize(A, NormalForm(eta=p | ~p)) == A


def test_finitize_drops_surplus_siblings():
    nf = NormalForm()
    M = m_constant(nf)
    A = KripkeStructure(1 + M + 3, [(0, i) for i in range(1, M + 4)])
    out, trace = finitize_trace(A, nf)
    assert out.n == 1 + M
    before = clique_profiles(A, M, [])[0]
    assert clique_profiles(out, M, [])[0] == before


def test_finitize_on_the_empty_relation():
    nf = NormalForm(eta=p | ~p)
    A = KripkeStructure(6, [], {"p": [0, 1, 2]})
    out = finitize(A, nf)
    assert out.n == 2 * m_constant(nf)


def test_verbatim_depth_reduction_can_break_the_model():
    nf = to_normal_form(parse("r0 <-> ibox p"))
    # irreflexive world 1 is a p-free root of reflexive world 0
    A = extend_model(KripkeStructure(2, [(0, 0), (1, 0)], {"r0": [1]}), nf)
    assert globally_satisfies(A, nf_to_formula(nf))
    with pytest.raises(SurgeryError, match="model property"):
        reduce_depth(A, nf, guard_reflexive=False)
    out = reduce_depth(A, nf)
    assert globally_satisfies(out, nf_to_formula(nf))


@pytest.mark.parametrize("seed", range(4))
def test_surgery_pipeline_on_generated_pairs(seed):
    rng = random.Random(seed)
    for _ in range(25):
        nf, A = surgery_pair(rng)
        d, w = nf_bounds(nf)
        B = reduce_depth(A, nf)
        C = reduce_width(B, nf)
        assert depth(B) <= d and width(C) <= w
        for X in (B, C):
            assert "4" in frame_axioms(X)
            assert globally_satisfies(X, nf_to_formula(nf))
        for x in range(A.n):
            assert s_set(B, x, nf) == s_set(A, x, nf)
            assert all(d_value(B, x, i, nf) == d_value(A, x, i, nf) for i in range(nf.m))


def test_surgery_is_deterministic():
    nf, A = surgery_pair(random.Random(99))
    assert reduce_depth(A, nf) == reduce_depth(A, nf)
    nf, A = duplicate_heavy_pair(random.Random(99))
    assert finitize(A, nf) == finitize(A, nf)


@pytest.mark.parametrize("seed", range(3))
def test_finitize_on_duplicate_heavy_pairs(seed):
    rng = random.Random(100 + seed)
    for _ in range(4):
        nf, A = duplicate_heavy_pair(rng)
        M = m_constant(nf)
        out, trace = finitize_trace(A, nf)
        assert "4" in frame_axioms(out)
        assert globally_satisfies(out, nf_to_formula(nf))
        assert max(trace.counts_per_type().values()) <= M
        tv = nf_variables(nf)
        before, after = clique_profiles(A, M, tv), clique_profiles(out, M, tv)
        keep = trace.kept_worlds
        assert all(before[keep[q]] == prof for q, prof in after.items())
        assert out.n < A.n

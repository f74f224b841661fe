from __future__ import annotations

import pytest
from hypothesis import given

from conftest import naive_axioms, structures
from gradmodal.kripke import (
    FRAME_CLASSES, FrameClass, KripkeStructure, ModelFormatError, breadth,
    cliques, depth, dump_model, enumerate_frames, enumerate_models,
    euclidean_closure, frame_axioms, in_class, inner_worlds, is_connected,
    lanterns, parse_model, to_dot, transitive_closure, width,
)


def fig_shape() -> KripkeStructure:
    # two lanterns (0, 1) pointing into the reflexive clique {2, 3}
    return KripkeStructure(4, [(0, 2), (1, 2), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)])


def test_axioms_of_single_worlds():
    assert frame_axioms(KripkeStructure(1)) == {"B", "4", "5"}
    assert frame_axioms(KripkeStructure(1, [(0, 0)])) == {"D", "T", "B", "4", "5"}


def test_single_edge_is_not_euclidean():
    assert "5" not in frame_axioms(KripkeStructure(2, [(0, 1)]))


def test_lanterns_and_inner_worlds():
    A = fig_shape()
    assert in_class(A, "K5")
    assert lanterns(A) == {0, 1}
    assert inner_worlds(A) == {2, 3}


def test_depth_width_breadth():
    # chain of cliques of sizes 1, 2, 1
    chain = transitive_closure(KripkeStructure(4, [(0, 1), (1, 2), (2, 1), (2, 3)]))
    assert depth(chain) == 2
    assert width(chain) == 2
    star = KripkeStructure(5, [(0, i) for i in range(1, 5)])
    assert breadth(star) == 4


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_models(1, [], "K")) == 2
    assert sum(1 for _ in enumerate_models(1, [], "T")) == 1
    assert sum(1 for _ in enumerate_models(2, [], "K")) == 16
    # transitive relations on three labelled points
    assert sum(1 for _ in enumerate_frames(3, "K4")) == 171


@pytest.mark.parametrize("name", sorted(FRAME_CLASSES))
def test_frame_enumeration_matches_first_order_definitions(name):
    F = FRAME_CLASSES[name]
    got = set(enumerate_frames(3, F))
    want = set()
    for code in range(1 << 9):
        succ = tuple((code >> (3 * i)) & 7 for i in range(3))
        if F.axioms <= naive_axioms(KripkeStructure.from_masks(succ)):
            want.add(succ)
    assert got == want


def test_class_aliases():
    assert FrameClass.from_name("B4") == FrameClass.from_name("KB45")
    with pytest.raises(ValueError):
        FrameClass.from_name("K7")


@given(structures(max_worlds=4))
def test_axiom_checker_agrees_with_definitions(A):
    assert set(frame_axioms(A)) == naive_axioms(A)


@given(structures(max_worlds=5))
def test_euclidean_closure_is_euclidean(A):
    assert "5" in frame_axioms(euclidean_closure(A))
    B = euclidean_closure(A, transitive=True)
    assert {"4", "5"} <= frame_axioms(B)


@given(structures(max_worlds=5))
def test_model_text_round_trip(A):
    assert parse_model(dump_model(A)) == A


def test_model_format_errors():
    with pytest.raises(ModelFormatError):
        parse_model("edge 0 1\n")
    with pytest.raises(ModelFormatError) as exc:
        parse_model("worlds 2\nedge 0 5\n")
    with pytest.raises(ModelFormatError) as exc:
        parse_model("worlds 2\nfoo\n")
    assert exc.value.line == 2


def test_connectivity_and_cliques():
    A = fig_shape()
    assert is_connected(A)
    assert frozenset({2, 3}) in cliques(A)
    assert not is_connected(KripkeStructure(2))
    assert to_dot(A).startswith("digraph")

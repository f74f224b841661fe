from __future__ import annotations

import itertools
import math
import random

import pytest

from gradmodal.kripke import frame_axioms, in_class, is_connected, lanterns
from gradmodal.reductions.tiling import (
    DecodeError, TilingFormatError, TilingInstance, TilingProblem, TilingSolution,
    _add_one, build_intended_model, check_tiling, decode_tiling, dump_tiling,
    encode_tiling, encode_torus, origin_world, parse_tiling, phi_reduction,
    solve_tiling, torus_parts,
)
from gradmodal.semantics import satisfies
from gradmodal.solvers.euclid import sat_k5
from gradmodal.syntax import Atom, formula_length, parse, simplify, substitute

SOLVABLE = "tiles a b\nh a b\nh b a\nv a b\nv b a\ninit a\n"
BL, WHT = Atom("bl"), Atom("wht")


def brute_valid(inst, cells) -> bool:
    """Independent restatement of the matching and initial conditions."""
    s = inst.side
    ok_h = all((cells[i][j], cells[(i + 1) % s][j]) in inst.problem.horiz
               for i in range(s) for j in range(s))
    ok_v = all((cells[i][j], cells[i][(j + 1) % s]) in inst.problem.vert
               for i in range(s) for j in range(s))
    ok_init = all(cells[0][k] == t for k, t in enumerate(inst.initial))
    return ok_h and ok_v and ok_init


def single(tile_rel: bool) -> TilingInstance:
    rel = {("t", "t")}
    return TilingInstance(TilingProblem(("t",), rel if tile_rel else set(), rel), ("t",))


def test_single_tile_instances():
    tau = TilingSolution((("t", "t"), ("t", "t")))
    assert check_tiling(single(True), tau)
    assert not check_tiling(single(False), tau)


def test_checker_matches_brute_force_on_all_two_tile_grids():
    inst = parse_tiling(SOLVABLE)
    for combo in itertools.product("ab", repeat=4):
        cells = (combo[:2], combo[2:])
        assert check_tiling(inst, TilingSolution(cells)) == brute_valid(inst, cells)


def test_file_format():
    inst = parse_tiling("# comment\ntiles a b\nh a b  # trailing\nv b a\ninit a b\n")
    assert inst.n == 2 and inst.side == 4
    assert parse_tiling(dump_tiling(inst)) == inst
    with pytest.raises(TilingFormatError):
        parse_tiling("tiles a\nh a\ninit a\n")
    with pytest.raises(TilingFormatError):
        parse_tiling("tiles a\nh a z\ninit a\n")
    with pytest.raises(TilingFormatError):
        parse_tiling("tiles a\n")


def test_named_parts_at_n1():
    p = torus_parts(parse_tiling(SOLVABLE))
    assert p["torus_size"] == parse("inn -> (dia>=4 true & ~dia>=5 true)")
    assert simplify(p["first_cell"]) == parse("(inn & wht) & (~v0 & ~h0)")


def test_add_one_variants_are_symbol_swaps():
    vbw = _add_one("v", BL, WHT, 1, False)
    assert simplify(vbw) == parse(
        "(dia (bl & v0) -> dia (wht & ~v0))"
        " & (dia (bl & v0) | (dia (bl & ~v0) & dia (wht & v0)))")
    swap_axis = {Atom("v0"): Atom("h0"), Atom("h0"): Atom("v0")}
    swap_colour = {BL: WHT, WHT: BL}
    assert _add_one("h", BL, WHT, 1, False) == substitute(vbw, swap_axis)
    assert _add_one("v", WHT, BL, 1, False) == substitute(vbw, swap_colour)
    assert _add_one("h", WHT, BL, 1, False) == substitute(substitute(vbw, swap_colour), swap_axis)


def test_intended_model_at_n1():
    inst = parse_tiling(SOLVABLE)
    tau = solve_tiling(inst)
    A = build_intended_model(inst, tau)
    assert A.n == 4 + 16
    assert in_class(A, "D5") and {"D", "5"} <= frame_axioms(A)
    assert is_connected(A)
    assert lanterns(A) == frozenset(range(4, 20))
    w = origin_world(A, inst)
    assert w == 0
    assert satisfies(A, w, encode_torus(inst) & encode_tiling(inst))
    assert decode_tiling(A, inst) == tau


def test_verbatim_formulas_reject_the_intended_model():
    inst = parse_tiling(SOLVABLE)
    A = build_intended_model(inst, solve_tiling(inst))
    assert not satisfies(A, 0, phi_reduction(inst, literal=True))


def test_builder_rejects_non_solutions():
    inst = parse_tiling(SOLVABLE)
    with pytest.raises(ValueError):
        build_intended_model(inst, TilingSolution((("a", "a"), ("a", "a"))))


def test_decode_errors():
    inst = parse_tiling(SOLVABLE)
    A = build_intended_model(inst, solve_tiling(inst))
    dup = A.with_valuation({"h0": 0, "v0": 0})  # every cell claims (0, 0)
    with pytest.raises(DecodeError):
        decode_tiling(dup, inst)
    both = A.with_valuation({"tile_a": A.full})
    with pytest.raises(DecodeError):
        decode_tiling(both, inst)
    small, _ = A.restrict([0, 1, 2])
    with pytest.raises(DecodeError):
        decode_tiling(small, inst)


def _random_instances(count: int, seed: int):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        tiles = tuple("abc"[: rng.randint(1, 3)])
        pairs = list(itertools.product(tiles, tiles))
        h = {x for x in pairs if rng.random() < 0.6}
        v = {x for x in pairs if rng.random() < 0.6}
        inst = TilingInstance(TilingProblem(tiles, h, v), (rng.choice(tiles),))
        sol = solve_tiling(inst)
        if sol is not None:
            out.append((inst, sol))
    return out


@pytest.mark.parametrize("inst,tau", _random_instances(12, 4))
def test_build_then_check_on_generated_instances(inst, tau):
    assert brute_valid(inst, tau.cells)
    A = build_intended_model(inst, tau)
    assert satisfies(A, 0, phi_reduction(inst))
    assert decode_tiling(A, inst) == tau


def test_solver_finds_a_decodable_model():
    inst = parse_tiling(SOLVABLE)
    v = sat_k5(phi_reduction(inst), serial=True)
    assert v.satisfiable
    assert check_tiling(inst, decode_tiling(v.model, inst))


def test_formula_size_is_polynomial():
    sizes = []
    for n in range(1, 7):
        inst = TilingInstance(parse_tiling(SOLVABLE).problem, ("a",) * n)
        sizes.append(formula_length(phi_reduction(inst)))
    # log-log slope between consecutive n stays small; the torus itself grows 4x per step
    slopes = [math.log(b / a) / math.log((k + 2) / (k + 1)) for k, (a, b) in enumerate(zip(sizes, sizes[1:]))]
    assert max(slopes[1:]) < 3
    assert all(b / a < 4 for a, b in zip(sizes, sizes[1:]))

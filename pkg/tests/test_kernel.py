from __future__ import annotations

import random

import pytest
from hypothesis import given

from conftest import formulas, structures
from gradmodal._kernel import BACKEND, for_worlds, kernel, pykernel
from gradmodal._kernel.program import compile_formulas
from gradmodal.kripke import FrameClass, KripkeStructure
from gradmodal.syntax import Atom, DiaGeq, InvDiaGeq, Not

compiled = pytest.mark.skipif(kernel is pykernel, reason="compiled kernel not available")


def _args(A, fs):
    prog = compile_formulas(fs, A.variables)
    return prog, (prog.ops, prog.a, prog.b, prog.g, A.n, list(A.succ), list(A.pred),
                  [A.truth(v) for v in prog.variables])


def test_backend_reports_a_name():
    assert BACKEND in ("cython", "python")
    assert for_worlds(500) is pykernel


def test_shared_subformulas_compile_once():
    p = Atom("p")
    prog = compile_formulas([DiaGeq(1, p) & Not(DiaGeq(1, p))])
    assert len(prog) == 4


@compiled
@given(formulas(), structures(max_worlds=6))
def test_compiled_and_pure_evaluation_agree(f, A):
    _, args = _args(A, [f])
    assert list(kernel.eval_program(*args)) == list(pykernel.eval_program(*args))


@compiled
@pytest.mark.parametrize("cls", ["K", "T", "K4", "S4", "K5", "D45", "S5"])
def test_compiled_and_pure_search_agree(cls):
    rng = random.Random(cls)
    from gradmodal.generators import random_formula

    F = FrameClass.from_name(cls)
    for _ in range(6):
        f = random_formula(rng, ("p",), depth=2, max_grade=2, size=4)
        prog = compile_formulas([f, Not(f) | f], ["p"])
        for n in (1, 2, 3):
            args = (prog.ops, prog.a, prog.b, prog.g, n, F.mask, 1, prog.roots[1], prog.roots[0])
            assert kernel.find_model(*args) == pykernel.find_model(*args)


@compiled
@pytest.mark.parametrize("n", [1, 2, 3])
def test_frame_codes_agree(n):
    for mask in range(32):
        assert list(kernel.frame_codes(n, mask)) == list(pykernel.frame_codes(n, mask))


def test_large_structures_fall_back_to_pure_python():
    n = 70
    A = KripkeStructure(n, [(i, (i + 1) % n) for i in range(n)], {"p": [0]})
    from gradmodal.semantics import truth_set

    assert truth_set(A, InvDiaGeq(1, Atom("p"))) == 1 << 1

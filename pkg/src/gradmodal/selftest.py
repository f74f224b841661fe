"""Quick seeded invariant corpus, run by ``gradmodal selftest``."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable

from . import fo
from ._kernel import kernel, pykernel
from ._kernel.program import compile_formulas
from .generators import (
    duplicate_heavy_pair, flattened_corpus, random_euclidean, random_formula,
    random_structure, surgery_pair,
)
from .kripke import depth, in_class, inner_worlds, lanterns, width
from .normalform import nf_bounds
from .reductions.kflat import inverted_model, reduce_global_k_to_transitive
from .reductions.tiling import (
    build_intended_model, check_tiling, decode_tiling, encode_tiling, encode_torus,
    parse_tiling, solve_tiling,
)
from .semantics import globally_satisfies, satisfies, truth_set
from .solvers.euclid import sat_k45, universal
from .solvers.oracle import bounded_sat
from .solvers.verdict import SatQuery
from .surgery import finitize_trace, reduce_depth, reduce_width

SOLVABLE_N1 = "tiles a b\nh a b\nh b a\nv a b\nv b a\ninit a\n"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    cases: int
    detail: str
    seconds: float


def _kernel_agreement(rng: random.Random) -> tuple[int, str]:
    n = 0
    for _ in range(40):
        A = random_structure(rng, rng.randint(1, 6))
        fs = [random_formula(rng) for _ in range(3)]
        prog = compile_formulas(fs, A.variables)
        args = (prog.ops, prog.a, prog.b, prog.g, A.n, list(A.succ), list(A.pred),
                [A.truth(v) for v in prog.variables])
        if list(kernel.eval_program(*args)) != list(pykernel.eval_program(*args)):
            return -1, "compiled and pure kernels disagree"
        n += 1
    return n, f"backend {kernel.NAME}"


def _euclidean_shape(rng: random.Random) -> tuple[int, str]:
    for k in range(100):
        transitive = k % 2 == 1
        A = random_euclidean(rng, rng.randint(1, 8), transitive=transitive)
        inner = inner_worlds(A)
        q = sum(1 << w for w in inner)
        if any(A.succ[w] & q != q for w in inner):
            return -1, "inner worlds do not form one reflexive clique"
        if transitive and any(A.succ[w] & q != q for w in lanterns(A)):
            return -1, "a lantern misses an inner world"
    return 100, ""


def _universal(rng: random.Random) -> tuple[int, str]:
    for _ in range(100):
        A = random_euclidean(rng, rng.randint(1, 7))
        f = random_formula(rng, depth=2)
        if bool(truth_set(A, universal(f))) != globally_satisfies(A, f):
            return -1, "universal modality disagrees with global truth"
    return 100, ""


def _translations(rng: random.Random) -> tuple[int, str]:
    n = 0
    for k in range(60):
        f = random_formula(rng, depth=2)
        if k % 3 == 0:
            A = random_structure(rng, rng.randint(1, 5))
            g, S = fo.st(f), A
        elif k % 3 == 1:
            A = random_euclidean(rng, rng.randint(1, 6))
            g, S = fo.translate_k5(f), fo.expand_lan(A, fo.lan_predicate(f))
        else:
            A = random_euclidean(rng, rng.randint(1, 6), transitive=True)
            g, S = fo.translate_k45_c1(f), fo.expand_lan(A, fo.lan_predicate(f))
        for w in range(A.n):
            if fo.fo_eval(S, g, {"x": w}) != satisfies(A, w, f):
                return -1, f"translation disagrees at world {w}"
            n += 1
    return n, ""


def _solver_agreement(rng: random.Random) -> tuple[int, str]:
    n = 0
    for _ in range(15):
        f = random_formula(rng, ("p",), depth=2, max_grade=2, size=4)
        for serial in (False, True):
            a = sat_k45(f, serial=serial)
            b = bounded_sat(SatQuery(f, "D45" if serial else "K45", "local", 3))
            if b.satisfiable and not a.satisfiable:
                return -1, "profile search missed an oracle model"
            n += 1
    return n, ""


def _surgery(rng: random.Random) -> tuple[int, str]:
    for _ in range(20):
        nf, A = surgery_pair(rng)
        B = reduce_depth(A, nf)
        C = reduce_width(B, nf)
        d, w = nf_bounds(nf)
        if depth(B) > d or width(C) > w:
            return -1, "surgery bound exceeded"
    for _ in range(5):
        nf, A = duplicate_heavy_pair(rng)
        _, trace = finitize_trace(A, nf)
        if max(trace.counts_per_type().values()) > trace.M:
            return -1, "too many cliques of one type survive"
    return 25, ""


def _tiling(rng: random.Random) -> tuple[int, str]:
    inst = parse_tiling(SOLVABLE_N1)
    tau = solve_tiling(inst)
    A = build_intended_model(inst, tau)
    if not (in_class(A, "D5") and satisfies(A, 0, encode_torus(inst) & encode_tiling(inst))):
        return -1, "intended model fails the encoding"
    if decode_tiling(A, inst) != tau or not check_tiling(inst, tau):
        return -1, "decode does not invert build"
    return 1, ""


def _k_reduction(rng: random.Random) -> tuple[int, str]:
    n = 0
    for f in flattened_corpus(rng, 15):
        v = bounded_sat(SatQuery(f, "K", "global", 3))
        if not v.satisfiable:
            continue
        star = reduce_global_k_to_transitive(f)
        for mode, cls in (("transitive", "S4"), ("euclidean", "K5")):
            W = inverted_model(v.model, mode)
            if not (in_class(W, cls) and globally_satisfies(W, star)):
                return -1, f"{mode} witness fails the translated formula"
        n += 1
    return n, ""


CHECKS: list[tuple[str, Callable[[random.Random], tuple[int, str]]]] = [
    ("kernel-agreement", _kernel_agreement),
    ("euclidean-shape", _euclidean_shape),
    ("universal-modality", _universal),
    ("fo-translations", _translations),
    ("k45-vs-oracle", _solver_agreement),
    ("surgery", _surgery),
    ("tiling-n1", _tiling),
    ("k-reduction-witness", _k_reduction),
]


def run_selftest(seed: int = 0) -> list[CheckResult]:
    out = []
    for i, (name, fn) in enumerate(CHECKS):
        rng = random.Random(seed * 1000 + i)
        t0 = time.perf_counter()
        try:
            cases, detail = fn(rng)
            passed = cases >= 0
        except Exception as e:  # report, keep going
            cases, detail, passed = 0, f"{type(e).__name__}: {e}", False
        out.append(CheckResult(name, passed, max(cases, 0), detail, time.perf_counter() - t0))
    return out

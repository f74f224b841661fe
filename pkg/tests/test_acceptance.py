"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import random
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from conftest import naive_axioms, naive_global, naive_holds  # noqa: E402
from gradmodal import fo  # noqa: E402
from gradmodal.generators import (  # noqa: E402
    duplicate_heavy_pair, flattened_corpus, random_euclidean, random_formula,
    random_structure, surgery_pair,
)
from gradmodal.kripke import (  # noqa: E402
    KripkeStructure, depth, inner_worlds, is_connected, width,
)
from gradmodal.normalform import m_constant, nf_bounds, nf_to_formula, nf_variables  # noqa: E402
from gradmodal.reductions.kflat import (  # noqa: E402
    inverted_model, reduce_global_k_to_k5, reduce_global_k_to_transitive,
)
from gradmodal.reductions.tiling import (  # noqa: E402
    TilingInstance, build_intended_model, decode_tiling, encode_tiling, encode_torus,
    origin_world, parse_tiling, phi_reduction, solve_tiling,
)
from gradmodal.solvers.euclid import sat_k45, universal  # noqa: E402
from gradmodal.solvers.oracle import bounded_sat  # noqa: E402
from gradmodal.solvers.verdict import UNSAT, SatQuery  # noqa: E402
from gradmodal.surgery import (  # noqa: E402
    clique_profiles, d_value, finitize_trace, reduce_depth, reduce_width, s_set,
)
from gradmodal.syntax import formula_length, parse, render  # noqa: E402

RESULTS: list[str] = []
SOLVABLE = "tiles a b\nh a b\nh b a\nv a b\nv b a\ninit a\n"


def report(number: int, name: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} {name}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# ---------------------------------------------------------------------------


def _shape_failures(A: KripkeStructure) -> int:
    """Inner worlds (those with a predecessor) must be mutually related, each
    one reflexive; in the transitive case every lantern sees all of them."""
    inner = [w for w in range(A.n) if any(A.has_edge(u, w) for u in range(A.n))]
    bad = not all(A.has_edge(w, v) for w in inner for v in inner)
    if "4" in naive_axioms(A):
        lans = [w for w in range(A.n) if w not in inner]
        bad |= not all(A.has_edge(l, v) for l in lans for v in inner)
    bad |= set(inner) != set(inner_worlds(A))
    return int(bad)


def _all_connected_euclidean(max_n: int):
    for n in range(1, max_n + 1):
        pairs = list(itertools.product(range(n), repeat=2))
        for bits_ in itertools.product((0, 1), repeat=len(pairs)):
            A = KripkeStructure(n, [e for e, b in zip(pairs, bits_) if b], {})
            if "5" in naive_axioms(A) and is_connected(A):
                yield A


def criterion_1() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(101)
    failures = checked = checked_t = 0
    for k in range(1200):
        A = random_euclidean(rng, rng.randint(1, 8), transitive=k % 2 == 1)
        assert "5" in naive_axioms(A) and is_connected(A)
        failures += _shape_failures(A)
        checked += 1
        checked_t += "4" in naive_axioms(A)
    exhaustive = 0
    for A in _all_connected_euclidean(3):
        failures += _shape_failures(A)
        exhaustive += 1
    secs = time.perf_counter() - t0
    ok = failures == 0 and checked >= 500 and secs < 10
    return report(1, "euclidean shape", ok,
                  f"{checked} random ({checked_t} transitive) + {exhaustive} exhaustive on <=3 worlds, "
                  f"{failures} failures, {secs:.2f}s")


def criterion_2() -> bool:
    rng = random.Random(202)
    failures = n = 0
    for _ in range(600):
        A = random_euclidean(rng, rng.randint(1, 8))
        f = random_formula(rng, depth=2)
        somewhere = any(naive_holds(A, w, universal(f)) for w in range(A.n))
        if somewhere != naive_global(A, f):
            failures += 1
        n += 1
    return report(2, "universal modality", failures == 0 and n >= 500, f"{n} pairs, {failures} failures")


def criterion_3() -> bool:
    rng = random.Random(303)
    counts = Counter()
    failures = Counter()
    while min(counts["gc2"], counts["c2"], counts["c1"]) < 300:
        f = random_formula(rng, depth=2)
        for target in ("gc2", "c2", "c1"):
            if target == "gc2":
                A = random_structure(rng, rng.randint(1, 6))
                g, S = fo.st(f, "x"), A
            elif target == "c2":
                A = random_euclidean(rng, rng.randint(1, 7))
                g, S = fo.translate_k5(f), fo.expand_lan(A, fo.lan_predicate(f))
            else:
                A = random_euclidean(rng, rng.randint(1, 7), transitive=True)
                g, S = fo.translate_k45_c1(f), fo.expand_lan(A, fo.lan_predicate(f))
            for w in range(A.n):
                counts[target] += 1
                if fo.fo_eval(S, g, {"x": w}) != naive_holds(A, w, f):
                    failures[target] += 1
    ok = sum(failures.values()) == 0
    detail = ", ".join(f"{t}: {counts[t]} triples / {failures[t]} failures" for t in ("gc2", "c2", "c1"))
    return report(3, "translation correspondence", ok, detail)


def criterion_4() -> bool:
    rng = random.Random(404)
    pairs = 0
    problems = Counter()
    while pairs < 120:
        nf, A = surgery_pair(rng)
        pairs += 1
        d_bound, w_bound = nf_bounds(nf)
        g = nf_to_formula(nf)
        B = reduce_depth(A, nf, check=False)
        C = reduce_width(B, nf, check=False)
        if depth(B) > d_bound:
            problems["depth bound"] += 1
        if width(C) > w_bound:
            problems["width bound"] += 1
        for X, tag in ((B, "stage 1"), (C, "stage 2")):
            if "4" not in naive_axioms(X):
                problems[f"{tag} transitivity"] += 1
            if not naive_global(X, g):
                problems[f"{tag} model"] += 1
        for w in range(A.n):
            if s_set(B, w, nf) != s_set(A, w, nf):
                problems["S invariance"] += 1
            if any(d_value(B, w, i, nf) != d_value(A, w, i, nf) for i in range(nf.m)):
                problems["d invariance"] += 1
    ok = not problems
    return report(4, "surgery", ok, f"{pairs} pairs, problems: {dict(problems) or 'none'}")


def criterion_5() -> bool:
    rng = random.Random(505)
    inputs = 0
    problems = Counter()
    while inputs < 30:
        nf, A = duplicate_heavy_pair(rng)
        M = m_constant(nf)
        tv = nf_variables(nf)
        before = clique_profiles(A, M, tv)
        siblings = Counter(p for q, p in before.items() if q != 0)
        if min(siblings.values()) < M + 3:
            problems["input not duplicate-heavy"] += 1
        out, trace = finitize_trace(A, nf, check=False)
        inputs += 1
        if "4" not in naive_axioms(out):
            problems["transitivity"] += 1
        after = clique_profiles(out, M, tv)
        if any(before[trace.kept_worlds[q]] != p for q, p in after.items()):
            problems["profile changed"] += 1
        if not naive_global(out, nf_to_formula(nf)):
            problems["model"] += 1
        if max(trace.counts_per_type().values()) > M:
            problems["too many per type"] += 1
    return report(5, "finitization", not problems, f"{inputs} inputs, problems: {dict(problems) or 'none'}")


def criterion_6() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(606)
    corpus = [random_formula(rng, ("p", "q"), depth=2, max_grade=3, size=5) for _ in range(200)]
    disagreements = unverified = conclusive = 0
    for f in corpus:
        for serial in (False, True):
            cls = "D45" if serial else "K45"
            a = sat_k45(f, serial=serial)
            b = bounded_sat(SatQuery(f, cls, "local", 4))
            if b.satisfiable:
                conclusive += 1
                disagreements += not a.satisfiable
            if a.status == UNSAT and b.satisfiable:
                disagreements += 1
            for v in (a, b):
                if v.satisfiable:
                    ax = naive_axioms(v.model)
                    ok = {"4", "5"} <= ax and (not serial or "D" in ax)
                    ok = ok and naive_holds(v.model, v.witness, f)
                    unverified += not ok
    secs = time.perf_counter() - t0
    ok = disagreements == 0 and unverified == 0 and secs < 60
    return report(6, "solver agreement", ok,
                  f"200 formulas x 2 classes, {conclusive} conclusive, {disagreements} disagreements, "
                  f"{unverified} failed re-checks, {secs:.1f}s")


def criterion_7() -> bool:
    inst = parse_tiling(SOLVABLE)
    tau = solve_tiling(inst)
    A = build_intended_model(inst, tau)
    w = origin_world(A, inst)
    checks = {
        "model check": w is not None and naive_holds(A, w, encode_torus(inst) & encode_tiling(inst)),
        "decode(build) = id": decode_tiling(A, inst) == tau,
        "euclidean and serial": {"5", "D"} <= naive_axioms(A),
    }
    ns = np.array([1, 2, 3])
    sizes = np.array([
        formula_length(phi_reduction(TilingInstance(inst.problem, ("a",) * n))) for n in ns
    ], dtype=float)
    coef = np.polyfit(ns, sizes, 1)
    resid = np.max(np.abs(np.polyval(coef, ns) - sizes) / sizes)
    growth = sizes[1:] / sizes[:-1]
    checks["polynomial size"] = bool(resid < 0.05 and np.all(growth < 4))
    failed = [k for k, v in checks.items() if not v]
    detail = (f"sizes {sizes.astype(int).tolist()}, linear fit residual {resid:.3f}, "
              f"failed: {failed or 'none'}")
    return report(7, "tiling n=1", not failed, detail)


def criterion_8() -> bool:
    corpus = flattened_corpus(random.Random(808), 60)
    mismatch, witness_fail, differ = [], 0, 0
    for f in corpus:
        star = reduce_global_k_to_transitive(f)
        if render(reduce_global_k_to_k5(f)) != render(star):
            differ += 1
        k = bounded_sat(SatQuery(f, "K", "global", 3))
        s4 = bounded_sat(SatQuery(star, "S4", "global", 6))
        if k.satisfiable != s4.satisfiable:
            mismatch.append(f)
        if k.satisfiable:
            for mode, ax in (("transitive", {"T", "4"}), ("euclidean", {"5"})):
                W = inverted_model(k.model, mode)
                if not (ax <= naive_axioms(W) and naive_global(W, star)):
                    witness_fail += 1
    notes = []
    for f in mismatch:
        star = reduce_global_k_to_transitive(f)
        v = bounded_sat(SatQuery(star, "S4", "global", 12), start=7)
        notes.append(f"{render(f)} needs {v.stats.get('worlds', '>12')} worlds")
    ok = not mismatch and witness_fail == 0 and differ == 0
    detail = (f"{len(corpus)} formulas, {len(mismatch)} iff-mismatches at bounds 3/6, "
              f"{witness_fail} witness failures, {differ} output differences")
    if notes:
        detail += "; " + "; ".join(notes)
    return report(8, "k-reduction equivalence", ok, detail)


def criterion_9() -> bool:
    f = parse("idia p & idia ~p & dia<=1 true")
    t0 = time.perf_counter()
    g = bounded_sat(SatQuery(f, "K", "global", 6))
    secs = time.perf_counter() - t0
    l = bounded_sat(SatQuery(f, "K", "local", 3))
    ok = not g.satisfiable and secs < 120 and l.satisfiable
    return report(9, "infinity regression", ok,
                  f"global bound 6: {g.status} in {secs:.1f}s; local bound 3: {l.status}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def test_criterion_1_euclidean_shape():
    assert criterion_1()


def test_criterion_2_universal_modality():
    assert criterion_2()


def test_criterion_3_translation_correspondence():
    assert criterion_3()


def test_criterion_4_surgery_bounds():
    assert criterion_4()


def test_criterion_5_finitization():
    assert criterion_5()


def test_criterion_6_solver_agreement():
    assert criterion_6()


def test_criterion_7_tiling_end_to_end():
    assert criterion_7()


def test_criterion_8_k_reduction_equivalence():
    assert criterion_8()


def test_criterion_9_infinity_regression():
    assert criterion_9()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)

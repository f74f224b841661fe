"""Compare the compiled and pure-Python kernels on evaluation and model search.

    python3 benchmarks/bench_kernel.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import time

from gradmodal._kernel import BACKEND, kernel, pykernel
from gradmodal._kernel.program import compile_formulas
from gradmodal.generators import random_formula, random_structure
from gradmodal.kripke import FrameClass
from gradmodal.syntax import parse, variables


def _time(fn, repeat: int) -> float:
    fn()  # warm caches
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_eval(mod, cases) -> None:
    for prog, A, masks in cases:
        mod.eval_program(prog.ops, prog.a, prog.b, prog.g, A.n, list(A.succ), list(A.pred), masks)


def eval_cases(seed: int = 0, count: int = 300):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        A = random_structure(rng, rng.randint(4, 40))
        prog = compile_formulas([random_formula(rng, depth=3, size=8)], A.variables)
        out.append((prog, A, [A.truth(v) for v in prog.variables]))
    return out


SEARCHES = [
    ("idia p & idia ~p & dia<=1 true", "K", 3),
    ("dia>=2 p & box (p -> dia ~p)", "K4", 4),
    ("dia p & dia ~p & box box p", "S4", 4),
    ("dia>=3 true & idia>=2 p", "K5", 4),
]


def bench_search(mod) -> None:
    for text, cls, n in SEARCHES:
        f = parse(text)
        names = sorted(variables(f))
        prog = compile_formulas([parse("true"), f], names)
        rg, rl = prog.roots
        mod.find_model(prog.ops, prog.a, prog.b, prog.g, n, FrameClass.from_name(cls).mask, len(names), rg, rl)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if BACKEND != "cython":
        print("compiled kernel unavailable; only the pure backend is timed")
    cases = eval_cases()
    tasks = [("eval x300", lambda m: bench_eval(m, cases)), ("search x4", bench_search)]
    rows = [
        (name, _time(lambda: fn(pykernel), args.repeat), _time(lambda: fn(kernel), args.repeat))
        for name, fn in tasks
    ]
    print(f"{'task':<12}{'python (s)':>12}{kernel.NAME + ' (s)':>14}{'speed-up':>10}")
    for name, ref, fast in rows:
        print(f"{name:<12}{ref:>12.4f}{fast:>14.4f}{ref / fast:>9.1f}x")


if __name__ == "__main__":
    main()

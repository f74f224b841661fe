"""Dedicated engines for the Euclidean classes.

Connected Euclidean structures are one reflexive universal clique plus
lanterns (worlds without predecessors) pointing into it; in the transitive
case every lantern sees the whole clique.  Satisfiability in these classes
can therefore be searched over shapes instead of arbitrary relations.

``sat_k45`` searches counting profiles (how many worlds of each 1-type sit
in the clique and among the lanterns) and is complete.  ``sat_k5`` runs the
SAT encoding on clique-plus-lanterns shapes of growing size and is complete
only up to its size budgets.
"""

from __future__ import annotations

import time
from typing import Optional

import numpy as np

from .._kernel.program import compile_formulas
from ..kripke import FrameClass, KripkeStructure
from ..syntax import (
    And, Atom, Bottom, DiaGeq, Formula, Iff, Implies, InvDiaGeq, Not, Or, TRUE,
    Top, box, desugar, ibox, iter_postorder, max_grade, simplify, variables,
)
from .cnf import ModelEncoder
from .verdict import NO_MODEL, UNSAT, SatVerdict, sat_verdict

__all__ = ["sat_k45", "sat_k5", "global_to_local", "local_to_global", "universal"]


def universal(f: Formula) -> Formula:
    """``f & box box ibox f``: true somewhere iff ``f`` is true everywhere, on
    connected Euclidean structures."""
    return And(f, box(box(ibox(f))))


def global_to_local(f: Formula) -> Formula:
    return universal(f)


def local_to_global(f: Formula) -> Formula:
    return Not(universal(Not(f)))


def _roots(f: Formula, mode: str, local: Optional[Formula]) -> tuple[Formula, Formula]:
    if mode == "local":
        return TRUE, f
    if mode == "global":
        return f, TRUE
    if mode == "combined":
        if local is None:
            raise ValueError("combined mode needs a local formula")
        return f, local
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# K45 / D45: profile search


PROFILE_BUDGET = 4_000_000
CHUNK = 1 << 16


def _profile_eval(formulas, names, kinds, counts):
    """Truth of each formula at each kind, for a batch of count vectors.

    ``kinds`` lists ``(1-type bits, is_lantern)``; ``counts`` has shape
    ``(P, len(kinds))``.  Every world's truth depends only on its kind and
    the counts: all worlds see exactly the clique, clique worlds are seen by
    every world, lanterns by none.
    """
    P, K = counts.shape
    inner = np.array([not lan for _, lan in kinds])
    ones = np.ones((P, K), dtype=bool)
    slot = {v: i for i, v in enumerate(names)}
    memo: dict[Formula, np.ndarray] = {}
    for f in formulas:
        for g in iter_postorder(f):
            if g in memo:
                continue
            if isinstance(g, Atom):
                if g.name in slot:
                    col = np.array([bool(t >> slot[g.name] & 1) for t, _ in kinds])
                    out = ones & col
                else:
                    out = ~ones
            elif isinstance(g, Top):
                out = ones
            elif isinstance(g, Bottom):
                out = ~ones
            elif isinstance(g, Not):
                out = ~memo[g.sub]
            elif isinstance(g, And):
                out = memo[g.left] & memo[g.right]
            elif isinstance(g, Or):
                out = memo[g.left] | memo[g.right]
            elif isinstance(g, Implies):
                out = ~memo[g.left] | memo[g.right]
            elif isinstance(g, Iff):
                out = memo[g.left] == memo[g.right]
            elif isinstance(g, DiaGeq):
                total = (counts * (memo[g.sub] & inner)).sum(axis=1)
                out = np.repeat((total >= g.n)[:, None], K, axis=1)
            elif isinstance(g, InvDiaGeq):
                total = (counts * memo[g.sub]).sum(axis=1)
                out = (total >= g.n)[:, None] & inner if g.n > 0 else ones
            else:
                raise TypeError(g)
            memo[g] = out
    return [memo[f] for f in formulas]


def _materialize(names, kinds, counts) -> KripkeStructure:
    order = [k for k in range(len(kinds)) if not kinds[k][1]] + [k for k in range(len(kinds)) if kinds[k][1]]
    worlds = []
    for k in order:
        worlds += [k] * int(counts[k])
    n = len(worlds)
    q = sum(1 << w for w, k in enumerate(worlds) if not kinds[k][1])
    succ = [q] * n  # clique worlds and lanterns all see the clique
    val = {
        v: sum(1 << w for w, k in enumerate(worlds) if kinds[k][0] >> i & 1)
        for i, v in enumerate(names)
    }
    return KripkeStructure.from_masks(succ, val)


def sat_k45(
    f: Formula,
    serial: bool = False,
    mode: str = "local",
    local: Optional[Formula] = None,
    budget: int = PROFILE_BUDGET,
) -> SatVerdict:
    """Decide satisfiability over K45 (D45 if ``serial``)."""
    t0 = time.perf_counter()
    fg, fl = (simplify(desugar(x)) for x in _roots(f, mode, local))
    names = sorted(variables(fg) | variables(fl))
    cap = max(1, max_grade(fg), max_grade(fl))
    kinds = [(t, lan) for lan in (False, True) for t in range(1 << len(names))]
    K = len(kinds)
    cls = FrameClass.from_name("D45" if serial else "K45")
    if (cap + 1) ** K > budget:
        return _k45_by_shapes(fg, fl, names, cap, serial, cls, t0)
    inner_idx = np.array([k for k in range(K) if not kinds[k][1]])
    lan_idx = np.array([k for k in range(K) if kinds[k][1]])
    best = None
    for chunk in _count_vectors(K, cap):
        n_in = chunk[:, inner_idx].sum(axis=1)
        n_lan = chunk[:, lan_idx].sum(axis=1)
        ok = (n_in + n_lan) > 0
        # without a clique the only connected shape is one isolated world
        ok &= (n_in > 0) | (n_lan == 1)
        if serial:
            ok &= n_in > 0
        if not ok.any():
            continue
        chunk = chunk[ok]
        tg, tl = _profile_eval([fg, fl], names, kinds, chunk)
        present = chunk > 0
        good = (~present | tg).all(axis=1) & (present & tl).any(axis=1)
        if good.any():
            cand = chunk[good]
            sizes = cand.sum(axis=1)
            i = int(np.argmin(sizes))
            if best is None or sizes[i] < best.sum():
                best = cand[i]
    if best is None:
        return SatVerdict(UNSAT, reason="profile search exhausted", engine="k45",
                          stats={"seconds": time.perf_counter() - t0})
    A = _materialize(names, kinds, best)
    return sat_verdict(A, cls, fg, fl, "k45", "profile search",
                       seconds=time.perf_counter() - t0)


def _count_vectors(K: int, cap: int):
    """All vectors in ``{0..cap}^K`` in chunks, ordered lexicographically."""
    base = cap + 1
    total = base ** K
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        out = np.empty((len(idx), K), dtype=np.int64)
        for k in range(K - 1, -1, -1):
            out[:, k] = idx % base
            idx //= base
        yield out


def _k45_by_shapes(fg, fl, names, cap, serial, cls, t0) -> SatVerdict:
    """Profile space too large: run shape SAT up to the completeness size."""
    K = 2 << len(names)
    limit = K * cap
    for n in range(1, limit + 1):
        for c in range(n, -1, -1):
            L = n - c
            if c == 0 and (L != 1 or serial):
                continue
            A = _shape_model(fg, fl, names, c, L, transitive=True)
            if A is not None:
                return sat_verdict(A, cls, fg, fl, "k45", "shape search",
                                   seconds=time.perf_counter() - t0)
    return SatVerdict(UNSAT, reason="shape search exhausted the counting bound",
                      engine="k45", stats={"seconds": time.perf_counter() - t0})


# ---------------------------------------------------------------------------
# K5 / D5: shape-guided SAT


def _shape_model(fg, fl, names, c: int, L: int, transitive: bool) -> Optional[KripkeStructure]:
    """Clique on worlds ``0..c-1``, lanterns ``c..c+L-1``; lantern rows free
    (or full, when ``transitive``) over the clique."""
    n = c + L
    prog = compile_formulas([fg, fl], names)
    fixed = {}
    for i in range(n):
        for j in range(n):
            if j >= c:
                fixed[(i, j)] = False  # nothing points at a lantern
            elif i < c or transitive:
                fixed[(i, j)] = True
    rg, rl = prog.roots
    with ModelEncoder(prog, n, None, rg, rl, fixed_edges=fixed) as enc:
        if c:
            for l in range(c, n):  # connected: every lantern sees the clique
                enc.solver.add_clause([enc.R[l][j] for j in range(c)])
        model = enc.solve()
        return None if model is None else enc.decode(model)


def sat_k5(
    f: Formula,
    serial: bool = False,
    lantern_budget: int = 8,
    mode: str = "local",
    local: Optional[Formula] = None,
    clique_budget: Optional[int] = None,
) -> SatVerdict:
    """Search K5 (D5 if ``serial``) models of clique-plus-lanterns shape,
    smallest total size first."""
    t0 = time.perf_counter()
    fg, fl = (simplify(desugar(x)) for x in _roots(f, mode, local))
    names = sorted(variables(fg) | variables(fl))
    if clique_budget is None:
        clique_budget = max(8, max(max_grade(fg), max_grade(fl)) + 1)
    cls = FrameClass.from_name("D5" if serial else "K5")
    tried = 0
    for n in range(1, clique_budget + lantern_budget + 1):
        for c in range(min(n, clique_budget), -1, -1):
            L = n - c
            if L > lantern_budget or (c == 0 and (L != 1 or serial)):
                continue
            tried += 1
            A = _shape_model(fg, fl, names, c, L, transitive=False)
            if A is not None:
                return sat_verdict(A, cls, fg, fl, "k5", f"clique {c}, lanterns {L}",
                                   shapes=tried, seconds=time.perf_counter() - t0)
    return SatVerdict(NO_MODEL, reason="shape-search-exhausted", engine="k5",
                      stats={"shapes": tried, "seconds": time.perf_counter() - t0})

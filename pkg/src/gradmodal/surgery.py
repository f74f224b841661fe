"""Model surgery on finite transitive models of a normal form.

:func:`reduce_depth` merges R-related worlds that agree on their capped
upward counts and their set of reachable-from-below bodies,
:func:`reduce_width` thins every clique down to selected witnesses, and
:func:`finitize` rebuilds a model layer by layer keeping a bounded number
of cliques per clique type while preserving every surviving clique's
profile.

World indices of the input survive in all intermediate bookkeeping; the
returned structures are renumbered by :meth:`KripkeStructure.restrict`.
Conjunct indices (for :func:`d_value` and :func:`s_set`) are 0-based.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .kripke import (
    KripkeStructure, bits, cliques, depth, frame_axioms,
    transitive_closure, width, world_depths,
)
from .normalform import NormalForm, m_constant, nf_bounds, nf_to_formula, nf_variables
from .semantics import globally_satisfies, truth_sets
from .syntax import Atom

__all__ = [
    "SurgeryError", "Profile", "CliqueType", "d_value", "s_set", "reduce_depth",
    "reduce_width", "layers", "profile", "clique_type", "one_type",
    "clique_profiles", "finitize", "finitize_trace", "FinitizeTrace",
]


class SurgeryError(ValueError):
    """A precondition or a construction invariant failed."""


OneType = tuple[bool, ...]
Multiset = tuple[tuple[OneType, int], ...]


def _require_transitive(A: KripkeStructure) -> None:
    if "4" not in frame_axioms(A):
        raise SurgeryError("input structure is not transitive")


def _require_model(A: KripkeStructure, nf: NormalForm) -> None:
    if not globally_satisfies(A, nf_to_formula(nf)):
        raise SurgeryError("input structure is not a global model of the normal form")


# ---------------------------------------------------------------------------
# Stage 1: depth


def _bodies(A: KripkeStructure, nf: NormalForm) -> tuple[list[int], list[int]]:
    sets = truth_sets(A, [chi for _, _, chi in nf.leq] + [chi for _, chi in nf.inv_box])
    return sets[: nf.m], sets[nf.m:]


def d_value(A: KripkeStructure, w: int, i: int, nf: NormalForm, *, _chi: int | None = None) -> int:
    """``min(D_i + 1, #chi_i-worlds reachable from w in zero or one step)``."""
    _, d, chi = nf.leq[i]
    mask = _chi if _chi is not None else truth_sets(A, [chi])[0]
    return min(d + 1, ((A.succ[w] | (1 << w)) & mask).bit_count())


def s_set(A: KripkeStructure, w: int, nf: NormalForm) -> frozenset[int]:
    """Indices ``i`` such that some chi'_i-world reaches ``w`` in zero or one step."""
    _, box_sets = _bodies(A, nf)
    below = A.pred[w] | (1 << w)
    return frozenset(i for i, m in enumerate(box_sets) if below & m)


def _stage1_keys(A: KripkeStructure, nf: NormalForm) -> list[tuple]:
    leq_sets, box_sets = _bodies(A, nf)
    keys = []
    for w in range(A.n):
        up = A.succ[w] | (1 << w)
        down = A.pred[w] | (1 << w)
        dv = tuple(min(d + 1, (up & m).bit_count()) for (_, d, _), m in zip(nf.leq, leq_sets))
        sv = frozenset(i for i, m in enumerate(box_sets) if down & m)
        keys.append((dv, sv))
    return keys


def _hazards(A: KripkeStructure, nf: NormalForm) -> int:
    """Irreflexive worlds that must stay irreflexive.

    Keys are computed over the reflexive closure, so an irreflexive world
    counts itself.  If it satisfies ``q_i`` and ``chi_i`` with exactly
    ``D_i`` chi_i-successors, or ``q'_i`` and ``chi'_i``, a merge would make
    it reflexive and break that conjunct while leaving its key unchanged.
    """
    leq_sets, box_sets = _bodies(A, nf)
    guards = truth_sets(A, [Atom(q) for q, _, _ in nf.leq] + [Atom(q) for q, _ in nf.inv_box])
    leq_guards, box_guards = guards[: nf.m], guards[nf.m:]
    out = 0
    for w in range(A.n):
        if A.succ[w] >> w & 1:
            continue
        bit = 1 << w
        if any(g & m & bit and (A.succ[w] & m).bit_count() == d
               for (_, d, _), g, m in zip(nf.leq, leq_guards, leq_sets)):
            out |= bit
        elif any(g & m & bit for g, m in zip(box_guards, box_sets)):
            out |= bit
    return out


def reduce_depth(
    A: KripkeStructure, nf: NormalForm, *, check: bool = True, guard_reflexive: bool = True
) -> KripkeStructure:
    """Add the inverse of every R-edge between worlds with equal keys, then
    close transitively.  With ``guard_reflexive`` (the default) edges touching
    a world of :func:`_hazards` are left alone; without it the merge is done
    unconditionally and may break upper-bound conjuncts."""
    _require_transitive(A)
    _require_model(A, nf)
    keys = _stage1_keys(A, nf)
    blocked = _hazards(A, nf) if guard_reflexive else 0
    succ = list(A.succ)
    for i in range(A.n):
        for j in bits(A.succ[i] & ~blocked):
            if keys[i] == keys[j] and not blocked >> i & 1:
                succ[j] |= 1 << i
    out = transitive_closure(A.with_succ(succ))
    if check:
        _check_stage1(A, out, nf, keys)
    return out


def _check_stage1(A, out, nf, keys) -> None:
    if "4" not in frame_axioms(out):
        raise SurgeryError("depth reduction lost transitivity")
    if not globally_satisfies(out, nf_to_formula(nf)):
        raise SurgeryError("depth reduction lost the model property")
    if _stage1_keys(out, nf) != keys:
        raise SurgeryError("depth reduction changed d-values or S-sets")
    bound, _ = nf_bounds(nf)
    # a chain meets at most one guarded hazard per upper-bound conjunct,
    # each allowing one extra equal-key step
    bound += nf.m + nf.m_inv
    if depth(out) > bound:
        raise SurgeryError(f"depth {depth(out)} exceeds bound {bound}")


# ---------------------------------------------------------------------------
# Stage 2: width


def reduce_width(A: KripkeStructure, nf: NormalForm, *, check: bool = True) -> KripkeStructure:
    """Keep, per clique, the first ``C_i`` pi_i-witnesses, the first
    pi'_i-witness and the least member; return the induced substructure."""
    _require_transitive(A)
    _require_model(A, nf)
    dbound, wbound = nf_bounds(nf)
    if depth(A) > dbound:
        raise SurgeryError("input depth exceeds the depth bound; reduce depth first")
    sets = truth_sets(A, [pi for _, _, pi in nf.geq] + [pi for _, pi in nf.inv_dia])
    geq_sets, inv_sets = sets[: nf.l], sets[nf.l:]
    keep = set()
    for Q in cliques(A):
        qm = sum(1 << w for w in Q)
        for (_, c, _), m in zip(nf.geq, geq_sets):
            keep.update(list(bits(qm & m))[:c])
        for m in inv_sets:
            keep.update(list(bits(qm & m))[:1])
        keep.add(min(Q))
    out, _ = A.restrict(keep)
    if check:
        if "4" not in frame_axioms(out):
            raise SurgeryError("width reduction lost transitivity")
        if not globally_satisfies(out, nf_to_formula(nf)):
            raise SurgeryError("width reduction lost the model property")
        if width(out) > wbound:
            raise SurgeryError(f"width {width(out)} exceeds bound {wbound}")
    return out


# ---------------------------------------------------------------------------
# Profiles


@dataclass(frozen=True)
class Profile:
    """Capped counts of 1-types here (``H``, cap k+1) and strictly above
    (``A``, cap k), the 1-types strictly below (``B``), and whether the clique
    is one irreflexive world."""

    H: Multiset
    A: Multiset
    B: frozenset[OneType]
    irref: bool
    k: int


@dataclass(frozen=True)
class CliqueType:
    """``(H, B, S)`` plus the irreflexivity flag; ``S`` names lower fixed
    cliques (by least member) that receive an edge."""

    H: Multiset
    B: frozenset[OneType]
    S: frozenset[int]
    irref: bool = False


def _types(A: KripkeStructure, tvars: Sequence[str]) -> list[OneType]:
    masks = [A.truth(v) for v in tvars]
    return [tuple(bool(m >> w & 1) for m in masks) for w in range(A.n)]


def one_type(A: KripkeStructure, w: int, tvars: Sequence[str]) -> OneType:
    return tuple(A.holds(v, w) for v in tvars)


def _capped(counter: Counter, cap: int) -> Multiset:
    return tuple(sorted((t, min(cap, c)) for t, c in counter.items() if c))


def _profile_from(succ, pred, types, qmask: int, k: int, alive: int) -> Profile:
    members = list(bits(qmask))
    up = down = 0
    for w in members:
        up |= succ[w]
        down |= pred[w]
    up &= alive & ~qmask
    down &= alive & ~qmask
    H = _capped(Counter(types[w] for w in members), k + 1)
    A_ = _capped(Counter(types[w] for w in bits(up)), k)
    B = frozenset(types[w] for w in bits(down))
    w0 = members[0]
    irref = len(members) == 1 and not (succ[w0] >> w0 & 1)
    return Profile(H, A_, B, irref, k)


def profile(A: KripkeStructure, Q, k: int, tvars: Sequence[str] | None = None) -> Profile:
    """k-profile of clique ``Q`` (an iterable of worlds) in transitive ``A``."""
    tvars = A.variables if tvars is None else list(tvars)
    qmask = sum(1 << w for w in Q)
    return _profile_from(A.succ, A.pred, _types(A, tvars), qmask, k, A.full)


def clique_profiles(A: KripkeStructure, k: int, tvars: Sequence[str] | None = None) -> dict[int, Profile]:
    """Profile of every clique, keyed by the clique's least world."""
    tvars = A.variables if tvars is None else list(tvars)
    types = _types(A, tvars)
    return {
        min(Q): _profile_from(A.succ, A.pred, types, sum(1 << w for w in Q), k, A.full)
        for Q in cliques(A)
    }


def layers(A: KripkeStructure) -> list[frozenset[int]]:
    """Worlds grouped by depth (depth 0: no strict successors)."""
    _require_transitive(A)
    dep = world_depths(A)
    out = [set() for _ in range(max(dep, default=-1) + 1)]
    for w, d in enumerate(dep):
        out[d].add(w)
    return [frozenset(u) for u in out]


def clique_type(
    A: KripkeStructure,
    Q,
    fixed_lower: Sequence[frozenset[int]] = (),
    k: int = 1,
    tvars: Sequence[str] | None = None,
) -> CliqueType:
    prof = profile(A, Q, k, tvars)
    anyw = min(Q)
    S = frozenset(min(C) for C in fixed_lower if A.succ[anyw] >> min(C) & 1)
    return CliqueType(prof.H, prof.B, S, prof.irref)


# ---------------------------------------------------------------------------
# Finitization


@dataclass
class FinitizeTrace:
    """Bookkeeping of one :func:`finitize` run (input world indices)."""

    M: int
    layer_of: dict[int, int] = field(default_factory=dict)  # clique -> layer
    type_of: dict[int, CliqueType] = field(default_factory=dict)  # clique -> type when marked
    marked: list[list[int]] = field(default_factory=list)  # per layer, marked cliques
    kept_worlds: list[int] = field(default_factory=list)
    added_edges: int = 0

    def counts_per_type(self) -> Counter:
        return Counter((self.layer_of[q], self.type_of[q]) for layer in self.marked for q in layer)


def finitize_trace(A: KripkeStructure, nf: NormalForm, *, check: bool = True):
    """Run the layered marking construction.  Returns ``(model, trace)``."""
    _require_transitive(A)
    _require_model(A, nf)
    dbound, wbound = nf_bounds(nf)
    if depth(A) > dbound or width(A) > wbound:
        raise SurgeryError("input exceeds the depth/width bounds; reduce it first")
    M = m_constant(nf)
    tvars = nf_variables(nf)
    types = _types(A, tvars)
    succ = list(A.succ)
    pred = list(A.pred)
    alive = A.full
    qs = cliques(A)
    cmask = {min(Q): sum(1 << w for w in Q) for Q in qs}
    dep = world_depths(A)
    by_layer: list[list[int]] = [[] for _ in range(max(dep, default=-1) + 1)]
    for q in sorted(cmask):
        by_layer[dep[q]].append(q)
    trace = FinitizeTrace(M=M)
    for q in cmask:
        trace.layer_of[q] = dep[q]
    fixed: list[int] = []  # marked cliques of processed layers

    def add_edges(src: int, dst: int) -> None:
        dm, sm = cmask[dst], cmask[src]
        for w in bits(sm):
            succ[w] |= dm
        for w in bits(dm):
            pred[w] |= sm

    for i, layer in enumerate(by_layer):
        ctype: dict[int, CliqueType] = {}
        for q in layer:
            prof = _profile_from(succ, pred, types, cmask[q], M, alive)
            S = frozenset(r for r in fixed if succ[q] & cmask[r])
            ctype[q] = CliqueType(prof.H, prof.B, S, prof.irref)
        groups: dict[CliqueType, list[int]] = {}
        for q in layer:  # ascending least member: the fixed numbering
            groups.setdefault(ctype[q], []).append(q)
        marked_of = {beta: qs_[:M] for beta, qs_ in groups.items()}
        marked = sorted(q for ms in marked_of.values() for q in ms)
        marked_set = set(marked)
        layer_mask = sum(cmask[q] for q in layer)
        for q in marked:
            trace.type_of[q] = ctype[q]
        trace.marked.append(marked)

        higher = [q for j in range(i + 1, len(by_layer)) for q in by_layer[j]]
        new_edges = []
        for h in higher:
            hs = succ[h]
            if not hs & layer_mask:
                continue
            for beta, qs_ in groups.items():
                sent = [q for q in qs_ if hs & cmask[q]]
                f = min(M, len(sent))
                f_marked = sum(1 for q in sent if q in marked_set)
                need = f - f_marked
                if need <= 0:
                    continue
                fresh = [q for q in marked_of[beta] if not hs & cmask[q]]
                if len(fresh) < need:
                    raise SurgeryError("not enough marked cliques to rewire")
                new_edges += [(h, q) for q in fresh[:need]]
        for h, q in new_edges:
            add_edges(h, q)
        trace.added_edges += len(new_edges)
        dropped = 0
        for q in layer:
            if q not in marked_set:
                dropped |= cmask[q]
        alive &= ~dropped
        for w in range(A.n):
            succ[w] &= ~dropped
            pred[w] &= ~dropped
        for q in marked:
            fixed.append(q)

    keep = list(bits(alive))
    trace.kept_worlds = keep
    out, _ = A.with_succ(succ).restrict(keep)
    if check:
        _check_finitize(A, out, keep, nf, M, tvars)
    return out, trace


def _check_finitize(A, out, keep, nf, M, tvars) -> None:
    if "4" not in frame_axioms(out):
        raise SurgeryError("finitization lost transitivity")
    before = clique_profiles(A, M, tvars)
    after = clique_profiles(out, M, tvars)
    for new_q, prof in after.items():
        if before.get(keep[new_q]) != prof:
            raise SurgeryError(f"profile of clique at world {keep[new_q]} changed")
    if not globally_satisfies(out, nf_to_formula(nf)):
        raise SurgeryError("finitization lost the model property")


def finitize(A: KripkeStructure, nf: NormalForm, *, check: bool = True) -> KripkeStructure:
    return finitize_trace(A, nf, check=check)[0]

"""Satisfaction of graded two-way formulas on finite structures.

Evaluation is bottom-up over distinct subformulas, one world bit-set per
subformula; graded modalities count successors (or predecessors) by
popcount.  Variables the structure does not declare are false everywhere.
"""

from __future__ import annotations

from typing import Optional, Sequence

from ._kernel import for_worlds
from ._kernel.program import compile_formulas
from .kripke import KripkeStructure
from .syntax import Formula

__all__ = [
    "truth_set", "truth_sets", "satisfies", "globally_satisfies",
    "locally_satisfied_somewhere", "combined_satisfies", "is_model",
]


def truth_sets(A: KripkeStructure, formulas: Sequence[Formula]) -> list[int]:
    """World bit-set of each formula, evaluated in one shared pass."""
    prog = compile_formulas(formulas, A.variables)
    k = for_worlds(A.n)
    masks = [A.valuation[v] for v in prog.variables]
    vals = k.eval_program(prog.ops, prog.a, prog.b, prog.g, A.n, A.succ, A.pred, masks)
    return [vals[r] for r in prog.roots]


def truth_set(A: KripkeStructure, f: Formula) -> int:
    return truth_sets(A, [f])[0]


def satisfies(A: KripkeStructure, w: int, f: Formula) -> bool:
    if not 0 <= w < A.n:
        raise IndexError(f"world {w} not in structure with {A.n} worlds")
    return bool(truth_set(A, f) >> w & 1)


def globally_satisfies(A: KripkeStructure, f: Formula) -> bool:
    return truth_set(A, f) == A.full


def is_model(A: KripkeStructure, f: Formula) -> bool:
    """Alias of :func:`globally_satisfies`."""
    return globally_satisfies(A, f)


def _least(mask: int) -> Optional[int]:
    return (mask & -mask).bit_length() - 1 if mask else None


def locally_satisfied_somewhere(A: KripkeStructure, f: Formula) -> Optional[int]:
    """Least world satisfying ``f``, or ``None``."""
    return _least(truth_set(A, f))


def combined_satisfies(A: KripkeStructure, f_global: Formula, f_local: Formula) -> Optional[int]:
    """Least world satisfying ``f_local`` provided ``f_global`` holds
    everywhere; ``None`` otherwise."""
    g, l = truth_sets(A, [f_global, f_local])
    if g != A.full:
        return None
    return _least(l)

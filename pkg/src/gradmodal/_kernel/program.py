"""Compilation of core formulas into flat instruction arrays.

Each instruction is ``(op, a, b, g)``: ``a``/``b`` index earlier
instructions (or, for atoms, the variable slot), ``g`` is a grade.  Shared
subformulas compile once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..syntax import (
    And, Atom, Bottom, DiaGeq, Formula, Iff, Implies, InvDiaGeq, Not, Or, Top,
    desugar, iter_postorder,
)

ATOM, TOP, BOT, NOT, AND, OR, IMP, IFF, DGE, IDGE = range(10)

# grades above this can never be met at kernel scale (<= 64 worlds)
GRADE_CAP = 65

_BINOP = {And: AND, Or: OR, Implies: IMP, Iff: IFF}


@dataclass(frozen=True)
class Program:
    ops: tuple[int, ...]
    a: tuple[int, ...]
    b: tuple[int, ...]
    g: tuple[int, ...]
    roots: tuple[int, ...]
    variables: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.ops)

    def arrays(self):
        import numpy as np

        return (
            np.asarray(self.ops, dtype=np.int64),
            np.asarray(self.a, dtype=np.int64),
            np.asarray(self.b, dtype=np.int64),
            np.asarray(self.g, dtype=np.int64),
        )


def compile_formulas(formulas: Sequence[Formula], variables: Sequence[str] | None = None) -> Program:
    """Compile several formulas into one program sharing common nodes.

    Variables outside ``variables`` (when given) compile to ``false``.
    """
    formulas = [desugar(f) for f in formulas]
    if variables is None:
        names: set[str] = set()
        for f in formulas:
            names |= {g.name for g in iter_postorder(f) if isinstance(g, Atom)}
        variables = sorted(names)
    slot = {v: k for k, v in enumerate(variables)}
    index: dict[Formula, int] = {}
    ops: list[int] = []
    a: list[int] = []
    b: list[int] = []
    g: list[int] = []

    def emit(op, x=0, y=0, n=0):
        ops.append(op)
        a.append(x)
        b.append(y)
        g.append(n)
        return len(ops) - 1

    roots = []
    for f in formulas:
        for node in iter_postorder(f):
            if node in index:
                continue
            if isinstance(node, Atom):
                k = slot.get(node.name)
                index[node] = emit(ATOM, k) if k is not None else emit(BOT)
            elif isinstance(node, Top):
                index[node] = emit(TOP)
            elif isinstance(node, Bottom):
                index[node] = emit(BOT)
            elif isinstance(node, Not):
                index[node] = emit(NOT, index[node.sub])
            elif isinstance(node, (DiaGeq, InvDiaGeq)):
                op = DGE if isinstance(node, DiaGeq) else IDGE
                index[node] = emit(op, index[node.sub], 0, min(node.n, GRADE_CAP))
            else:
                index[node] = emit(_BINOP[type(node)], index[node.left], index[node.right])
        roots.append(index[f])
    return Program(tuple(ops), tuple(a), tuple(b), tuple(g), tuple(roots), tuple(variables))

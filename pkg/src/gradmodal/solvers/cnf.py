"""SAT encoding of "there is a structure on n worlds satisfying ...".

Variables are edge bits ``R[i][j]``, valuation bits ``P[k][i]`` and one
Tseitin variable per (instruction, world).  Graded modalities become
cardinality constraints over ``R[i][j] & sub(j)`` auxiliaries, guarded by the
node's variable in both directions.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence

from pysat.card import CardEnc, EncType
from pysat.formula import IDPool
from pysat.solvers import Solver

from .._kernel.program import AND, ATOM, BOT, DGE, IDGE, IFF, IMP, NOT, OR, TOP, Program
from ..kripke import FrameClass, KripkeStructure

DEFAULT_SOLVER = "cadical153"


class ModelEncoder:
    """CNF for one world count.  ``fixed_edges`` pins edge bits and
    ``fixed_vals`` pins valuation bits (``(var, world) -> bool``)."""

    def __init__(
        self,
        prog: Program,
        n: int,
        frame_class: FrameClass | None,
        root_g: int,
        root_l: int,
        *,
        fixed_edges: Mapping[tuple[int, int], bool] | None = None,
        fixed_vals: Mapping[tuple[int, int], bool] | None = None,
        solver: str = DEFAULT_SOLVER,
    ):
        self.prog = prog
        self.n = n
        self.pool = IDPool()
        self.clauses: list[list[int]] = []
        self.R = [[self.pool.id(("R", i, j)) for j in range(n)] for i in range(n)]
        self.P = [[self.pool.id(("P", k, i)) for i in range(n)] for k in range(len(prog.variables))]
        self.true = self.pool.id("TRUE")
        self.clauses.append([self.true])
        if frame_class is not None:
            self._frame(frame_class)
        for (i, j), on in (fixed_edges or {}).items():
            self.clauses.append([self.R[i][j] if on else -self.R[i][j]])
        for (k, i), on in (fixed_vals or {}).items():
            self.clauses.append([self.P[k][i] if on else -self.P[k][i]])
        self.node = self._nodes()
        for i in range(n):
            self.clauses.append([self.node[root_g][i]])
        self.clauses.append([self.node[root_l][i] for i in range(n)])
        self.solver = Solver(name=solver, bootstrap_with=self.clauses)

    # -- frame -------------------------------------------------------------

    def _frame(self, F: FrameClass) -> None:
        n, R, add = self.n, self.R, self.clauses.append
        ax = F.axioms
        for i in range(n):
            if "D" in ax:
                add([R[i][j] for j in range(n)])
            if "T" in ax:
                add([R[i][i]])
            for j in range(n):
                if "B" in ax and i < j:
                    add([-R[i][j], R[j][i]])
                    add([-R[j][i], R[i][j]])
                for k in range(n):
                    if "4" in ax:
                        add([-R[i][j], -R[j][k], R[i][k]])
                    if "5" in ax:
                        add([-R[i][j], -R[i][k], R[j][k]])

    # -- formula -----------------------------------------------------------

    def _new(self) -> int:
        return self.pool.id(("aux", self.pool.top + 1))

    def _gate(self, kind: int, x: int, y: int) -> int:
        t = self._new()
        add = self.clauses.append
        if kind == AND:
            add([-t, x]); add([-t, y]); add([t, -x, -y])
        elif kind == OR:
            add([t, -x]); add([t, -y]); add([-t, x, y])
        elif kind == IMP:
            add([t, x]); add([t, -y]); add([-t, -x, y])
        else:  # IFF
            add([-t, -x, y]); add([-t, x, -y]); add([t, x, y]); add([t, -x, -y])
        return t

    def _count(self, es: list[int], g: int) -> int:
        """Variable equivalent to "at least g of es"."""
        if g <= 0:
            return self.true
        if g > len(es):
            return -self.true
        t = self._new()
        add = self.clauses.append
        if g == 1:
            add([-t] + es)
            for e in es:
                add([t, -e])
            return t
        lo = CardEnc.atleast(lits=es, bound=g, vpool=self.pool, encoding=EncType.seqcounter)
        for cl in lo.clauses:
            add([-t] + cl)
        hi = CardEnc.atmost(lits=es, bound=g - 1, vpool=self.pool, encoding=EncType.seqcounter)
        for cl in hi.clauses:
            add([t] + cl)
        return t

    def _conj(self, x: int, y: int) -> int:
        if x == self.true:
            return y
        if y == self.true:
            return x
        if x == -self.true or y == -self.true:
            return -self.true
        return self._gate(AND, x, y)

    def _nodes(self) -> list[list[int]]:
        p, n = self.prog, self.n
        node: list[list[int]] = []
        for k, op in enumerate(p.ops):
            a, b, g = p.a[k], p.b[k], p.g[k]
            if op == ATOM:
                row = list(self.P[a])
            elif op == TOP:
                row = [self.true] * n
            elif op == BOT:
                row = [-self.true] * n
            elif op == NOT:
                row = [-x for x in node[a]]
            elif op in (AND, OR, IMP, IFF):
                row = [self._gate(op, node[a][i], node[b][i]) for i in range(n)]
            elif op in (DGE, IDGE):
                sub = node[a]
                row = []
                for i in range(n):
                    edges = self.R[i] if op == DGE else [self.R[j][i] for j in range(n)]
                    es = [e for e in (self._conj(edges[j], sub[j]) for j in range(n)) if e != -self.true]
                    row.append(self._count(es, g))
            else:
                raise ValueError(f"unknown opcode {op}")
            node.append(row)
        return node

    # -- solving -----------------------------------------------------------

    def bit_order(self) -> list[int]:
        """Search variables from most to least significant: relation code
        first (bit ``i*n + j``), then valuation code (bit ``k*n + i``)."""
        n = self.n
        rel = [self.R[c // n][c % n] for c in reversed(range(n * n))]
        nv = len(self.P)
        val = [self.P[c // n][c % n] for c in reversed(range(n * nv))]
        return rel + val

    def solve(self, assumptions: Sequence[int] = ()) -> Optional[set[int]]:
        if not self.solver.solve(assumptions=list(assumptions)):
            return None
        return {lit for lit in self.solver.get_model() if lit > 0}

    def lex_min(self, model: Optional[set[int]] = None) -> Optional[set[int]]:
        """Least model in (relation code, valuation code) order."""
        if model is None:
            model = self.solve()
            if model is None:
                return None
        fixed: list[int] = []
        for v in self.bit_order():
            if v not in model:
                fixed.append(-v)
                continue
            better = self.solve(fixed + [-v])
            if better is not None:
                model = better
                fixed.append(-v)
            else:
                fixed.append(v)
        return model

    def decode(self, model: set[int], valuation_names: Iterable[str] | None = None) -> KripkeStructure:
        n = self.n
        succ = [sum(1 << j for j in range(n) if self.R[i][j] in model) for i in range(n)]
        names = list(valuation_names) if valuation_names is not None else list(self.prog.variables)
        val = {
            name: sum(1 << i for i in range(n) if self.P[k][i] in model)
            for k, name in enumerate(self.prog.variables)
            if name in names
        }
        return KripkeStructure.from_masks(succ, val)

    def close(self) -> None:
        self.solver.delete()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

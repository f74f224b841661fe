"""Scott-type normal form for the (dia>=n, idia) language.

A normal form is

    eta & AND (p_i -> dia>=C_i pi_i) & AND (q_i -> dia<=D_i chi_i)
        & AND (p'_i -> idia pi'_i) & AND (q'_i -> ibox ~chi'_i)

with propositional ``eta`` and bodies.  :func:`to_normal_form` renames every
modal subformula ``s`` by a guard ``x_s`` and a complement guard ``xbar_s``
(``xbar_s <-> ~x_s`` sits in ``eta``); ``x_s`` carries the lower bound and
``xbar_s`` the upper one, so both directions of ``x_s <-> s`` are enforced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .kripke import KripkeStructure
from .semantics import truth_sets
from .syntax import (
    Atom, Bottom, DiaGeq, Formula, Iff, InvDiaGeq, Not, TRUE, conj,
    desugar, fold_and, is_propositional, iter_postorder, render, simplify,
    substitute, variables,
)

__all__ = [
    "NormalForm", "NormalFormError", "to_normal_form", "nf_to_formula",
    "m_constant", "nf_bounds", "extend_model", "nf_variables", "render_nf",
]


class NormalFormError(ValueError):
    pass


Geq = tuple[str, int, Formula]
Leq = tuple[str, int, Formula]
InvDia = tuple[str, Formula]
InvBox = tuple[str, Formula]


@dataclass(frozen=True)
class NormalForm:
    """The five conjunct families.  ``inv_box`` entries ``(q, chi)`` stand
    for ``q -> ibox ~chi``."""

    eta: Formula = TRUE
    geq: tuple[Geq, ...] = ()
    leq: tuple[Leq, ...] = ()
    inv_dia: tuple[InvDia, ...] = ()
    inv_box: tuple[InvBox, ...] = ()
    # guard -> the original subformula it names (empty for hand-built forms)
    definitions: Mapping[str, Formula] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        bodies = [self.eta]
        bodies += [pi for _, _, pi in self.geq] + [chi for _, _, chi in self.leq]
        bodies += [pi for _, pi in self.inv_dia] + [chi for _, chi in self.inv_box]
        if not all(is_propositional(b) for b in bodies):
            raise NormalFormError("normal-form bodies must be propositional")
        if any(c < 1 for _, c, _ in self.geq):
            raise NormalFormError("lower-bound grades must be positive")
        if any(d < 0 for _, d, _ in self.leq):
            raise NormalFormError("upper-bound grades must be non-negative")

    @property
    def l(self) -> int:
        return len(self.geq)

    @property
    def m(self) -> int:
        return len(self.leq)

    @property
    def l_inv(self) -> int:
        return len(self.inv_dia)

    @property
    def m_inv(self) -> int:
        return len(self.inv_box)

    def conjuncts(self) -> list[Formula]:
        """Each conjunct as a formula, ``eta`` first."""
        out = [self.eta]
        out += [Atom(p) >> DiaGeq(c, pi) for p, c, pi in self.geq]
        out += [Atom(q) >> Not(DiaGeq(d + 1, chi)) for q, d, chi in self.leq]
        out += [Atom(p) >> InvDiaGeq(1, pi) for p, pi in self.inv_dia]
        out += [Atom(q) >> Not(InvDiaGeq(1, chi)) for q, chi in self.inv_box]
        return out


def nf_to_formula(nf: NormalForm) -> Formula:
    return fold_and(nf.conjuncts())


def nf_variables(nf: NormalForm) -> list[str]:
    return sorted(set().union(*(variables(c) for c in nf.conjuncts())))


def m_constant(nf: NormalForm) -> int:
    """``max({C_i} | {D_i + 1})``, and 1 for the empty family."""
    vals = [c for _, c, _ in nf.geq] + [d + 1 for _, d, _ in nf.leq]
    return max(vals, default=1)


def nf_bounds(nf: NormalForm) -> tuple[int, int]:
    """Depth and width a surgically reduced model can be brought under."""
    depth = sum(d for _, d, _ in nf.leq) + nf.m + nf.m_inv + 1
    width = sum(c for _, c, _ in nf.geq) + nf.l_inv + 1
    return depth, width


def to_normal_form(f: Formula) -> NormalForm:
    """Normal form globally satisfiable over exactly the transitive frames
    where ``f`` is.  Rejects graded converse modalities."""
    f = simplify(desugar(f))
    for g in iter_postorder(f):
        if isinstance(g, InvDiaGeq) and g.n > 1:
            raise NormalFormError("graded converse modalities (idia>=n, n >= 2) are not supported")
    taken = set(variables(f))
    guard: dict[Formula, str] = {}
    defs: dict[str, Formula] = {}
    geq: list[Geq] = []
    leq: list[Leq] = []
    inv_dia: list[InvDia] = []
    inv_box: list[InvBox] = []
    glue: list[Formula] = []
    counter = 0

    def skel(g: Formula) -> Formula:
        return substitute(g, {s: Atom(x) for s, x in guard.items()}) if guard else g

    for sigma in iter_postorder(f):
        if not isinstance(sigma, (DiaGeq, InvDiaGeq)):
            continue
        while f"_x{counter}" in taken or f"_x{counter}n" in taken:
            counter += 1
        x, xbar = f"_x{counter}", f"_x{counter}n"
        counter += 1
        body = skel(sigma.sub)
        guard[sigma] = x
        defs[x] = sigma
        defs[xbar] = Not(sigma)
        glue.append(Iff(Atom(xbar), Not(Atom(x))))
        if isinstance(sigma, DiaGeq):
            geq.append((x, sigma.n, body))
            if not isinstance(body, Bottom):
                leq.append((xbar, sigma.n - 1, body))
        else:
            inv_dia.append((x, body))
            inv_box.append((xbar, body))
    eta = conj([skel(f)] + glue)
    return NormalForm(eta, tuple(geq), tuple(leq), tuple(inv_dia), tuple(inv_box), defs)


def extend_model(A: KripkeStructure, nf: NormalForm) -> KripkeStructure:
    """Interpret each guard as the truth set of the subformula it names."""
    if not nf.definitions:
        raise NormalFormError("normal form carries no guard definitions")
    names = list(nf.definitions)
    sets = truth_sets(A, [nf.definitions[g] for g in names])
    return A.with_valuation(dict(zip(names, sets)))


def render_nf(nf: NormalForm) -> str:
    """Text listing with a ``# section:`` comment per family."""
    lines = ["# section: eta", render(nf.eta)]
    sections = [
        ("geq", [f"{p} -> dia>={c} {render(pi)}" for p, c, pi in nf.geq]),
        ("leq", [f"{q} -> dia<={d} {render(chi)}" for q, d, chi in nf.leq]),
        ("inv_dia", [f"{p} -> idia {render(pi)}" for p, pi in nf.inv_dia]),
        ("inv_box", [f"{q} -> ibox ~{render(chi)}" for q, chi in nf.inv_box]),
    ]
    for name, items in sections:
        lines.append(f"# section: {name}")
        lines.extend(items)
    depth, width = nf_bounds(nf)
    lines.append(f"# M = {m_constant(nf)}, depth bound = {depth}, width bound = {width}")
    return "\n".join(lines) + "\n"

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..kripke import FrameClass, KripkeStructure, in_class
from ..semantics import truth_sets
from ..syntax import TRUE, Formula

MODES = ("local", "global", "combined")

SAT = "satisfiable"
NO_MODEL = "no-model-within-bound"
UNSAT = "unsatisfiable"


class VerificationError(RuntimeError):
    """An engine returned a model that fails the independent re-check."""


@dataclass(frozen=True)
class SatQuery:
    """``formula`` is the local formula in local mode and the global one in
    global and combined mode; ``local`` is the combined-mode local part."""

    formula: Formula
    frame_class: FrameClass
    mode: str = "local"
    bound: int = 4
    local: Optional[Formula] = None

    def __post_init__(self):
        if isinstance(self.frame_class, str):
            object.__setattr__(self, "frame_class", FrameClass.from_name(self.frame_class))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.bound < 1:
            raise ValueError("bound must be at least 1")
        if self.mode == "combined" and self.local is None:
            raise ValueError("combined mode needs a local formula")

    def roots(self) -> tuple[Formula, Formula]:
        """(formula required everywhere, formula required somewhere)."""
        if self.mode == "local":
            return TRUE, self.formula
        if self.mode == "global":
            return self.formula, TRUE
        return self.formula, self.local


@dataclass(frozen=True)
class SatVerdict:
    status: str
    model: Optional[KripkeStructure] = None
    witness: Optional[int] = None
    reason: str = ""
    engine: str = ""
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def satisfiable(self) -> bool:
        return self.status == SAT

    @property
    def conclusive(self) -> bool:
        return self.status in (SAT, UNSAT)


def verify_model(
    A: KripkeStructure, frame_class: FrameClass, f_global: Formula, f_local: Formula
) -> int:
    """Re-check a candidate model from scratch; returns the least witness."""
    if not in_class(A, frame_class):
        raise VerificationError(f"model is not in frame class {frame_class.name}")
    g, l = truth_sets(A, [f_global, f_local])
    if g != A.full:
        raise VerificationError("model does not satisfy the global formula everywhere")
    if not l:
        raise VerificationError("model does not satisfy the local formula anywhere")
    return (l & -l).bit_length() - 1


def sat_verdict(A, frame_class, f_global, f_local, engine, reason="", **stats) -> SatVerdict:
    w = verify_model(A, frame_class, f_global, f_local)
    return SatVerdict(SAT, A, w, reason, engine, stats)

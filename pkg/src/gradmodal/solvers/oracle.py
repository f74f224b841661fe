"""Complete bounded-model oracle.

World counts are tried in increasing order.  Small search spaces are
enumerated exhaustively by the kernel; larger ones go to the SAT encoding,
whose answer is then minimised to the same lexicographically-first model
the enumeration would have found.
"""

from __future__ import annotations

import time
from typing import Optional

from .._kernel import kernel
from .._kernel.program import compile_formulas
from ..kripke import KripkeStructure, _decode_relation
from ..syntax import variables
from .cnf import ModelEncoder
from .verdict import NO_MODEL, SatQuery, SatVerdict, sat_verdict

__all__ = ["bounded_sat", "DEFAULT_ENUM_BITS", "search_size"]

# largest n*n + n*|vars| searched by plain enumeration
DEFAULT_ENUM_BITS = 22


def _engine_for(n: int, nvars: int, engine: str, enum_bits: int) -> str:
    if engine != "auto":
        return engine
    return "enumerate" if n * n + n * nvars <= enum_bits else "sat"


def search_size(q: SatQuery, n: int, engine: str = "auto", enum_bits: int = DEFAULT_ENUM_BITS) -> Optional[KripkeStructure]:
    """Lexicographically least model of ``q`` with exactly ``n`` worlds."""
    f_global, f_local = q.roots()
    names = sorted(variables(f_global) | variables(f_local))
    prog = compile_formulas([f_global, f_local], names)
    rg, rl = prog.roots
    how = _engine_for(n, len(names), engine, enum_bits)
    if how == "enumerate":
        if n * n > 63 or n * len(names) > 63:
            raise ValueError("search space too large to enumerate")
        hit = kernel.find_model(prog.ops, prog.a, prog.b, prog.g, n, q.frame_class.mask, len(names), rg, rl)
        if hit is None:
            return None
        code, v = hit
        full = (1 << n) - 1
        val = {name: (v >> (k * n)) & full for k, name in enumerate(names)}
        return KripkeStructure.from_masks(_decode_relation(n, code), val)
    if how != "sat":
        raise ValueError(f"unknown engine {engine!r}")
    with ModelEncoder(prog, n, q.frame_class, rg, rl) as enc:
        model = enc.lex_min()
        return None if model is None else enc.decode(model)


def bounded_sat(
    q: SatQuery, *, engine: str = "auto", enum_bits: int = DEFAULT_ENUM_BITS, start: int = 1
) -> SatVerdict:
    """Smallest model with at most ``q.bound`` worlds, or no-model-within-bound.

    ``engine`` is ``auto``, ``enumerate`` or ``sat``; all return the same
    model.
    """
    f_global, f_local = q.roots()
    t0 = time.perf_counter()
    for n in range(start, q.bound + 1):
        A = search_size(q, n, engine, enum_bits)
        if A is not None:
            return sat_verdict(
                A, q.frame_class, f_global, f_local, "oracle",
                f"least model with {n} worlds", worlds=n, seconds=time.perf_counter() - t0,
            )
    return SatVerdict(
        NO_MODEL, reason=f"no model within bound {q.bound}", engine="oracle",
        stats={"seconds": time.perf_counter() - t0},
    )

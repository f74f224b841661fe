"""Exponential torus tiling encoded into Euclidean two-way graded logic.

Cells of the ``2^n x 2^n`` torus are the inner worlds of a connected Euclidean
structure; their position is written on ``h0..`` (horizontal) and ``v0..``
(vertical) bits, least significant first.  Lanterns of four kinds relate
neighbouring cells, coloured like a chessboard:

``vbw``  black cell below, white cell one step up (same ``h``)
``vwb``  white below, black above
``hbw``  black left, white one step right (same ``v``)
``hwb``  white left, black right

A tiling ``tau`` maps ``(i, j)`` (``i`` horizontal, ``j`` vertical) to a tile;
``(tau(i,j), tau(i+1,j))`` must be in ``horiz`` and ``(tau(i,j), tau(i,j+1))``
in ``vert``, both modulo the side, and the column ``i = 0`` starts with the
initial condition.

``encode_torus(..., literal=True)`` reproduces the unrepaired formulas;
the default repairs three defects in them (see ``_pseudo_unique``,
``_add_one`` and ``_rules``) and asks each cell's witness lantern to carry
its kind letter, which matters only for ``n = 1`` where ``+1`` and ``-1``
coincide.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional

from ..kripke import KripkeStructure, lanterns, mask_of
from ..semantics import truth_set
from ..solvers.euclid import universal
from ..syntax import (
    TRUE, Atom, Formula, InvDiaGeq, Not, conj, dia, dia_eq, disj, iff,
    implies, neg,
)

__all__ = [
    "TilingProblem", "TilingInstance", "TilingSolution", "TilingFormatError",
    "DecodeError", "KINDS", "parse_tiling", "dump_tiling", "check_tiling",
    "solve_tiling", "encode_torus", "encode_tiling", "phi_reduction",
    "torus_parts", "build_intended_model", "decode_tiling", "tile_var",
]

KINDS = ("vbw", "hbw", "vwb", "hwb")
LAN, INN, WHT, BL = Atom("lan"), Atom("inn"), Atom("wht"), Atom("bl")
MAX_N = 31  # keeps 2^(2n) + 1 inside the 64-bit grade range


class TilingFormatError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class DecodeError(ValueError):
    """The model does not describe a tiling (encoder or solver bug)."""


@dataclass(frozen=True)
class TilingProblem:
    tiles: tuple[str, ...]
    horiz: frozenset[tuple[str, str]]
    vert: frozenset[tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "tiles", tuple(self.tiles))
        object.__setattr__(self, "horiz", frozenset(self.horiz))
        object.__setattr__(self, "vert", frozenset(self.vert))
        if len(set(self.tiles)) != len(self.tiles):
            raise ValueError("duplicate tile name")
        known = set(self.tiles)
        for rel in (self.horiz, self.vert):
            for a, b in rel:
                if a not in known or b not in known:
                    raise ValueError(f"pair ({a}, {b}) uses an undeclared tile")


@dataclass(frozen=True)
class TilingInstance:
    problem: TilingProblem
    initial: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(self.initial))
        if not self.initial:
            raise ValueError("initial condition must be non-empty")
        for t in self.initial:
            if t not in self.problem.tiles:
                raise ValueError(f"initial tile {t!r} is undeclared")

    @property
    def n(self) -> int:
        return len(self.initial)

    @property
    def side(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class TilingSolution:
    """``cells[i][j]`` is the tile at horizontal ``i``, vertical ``j``."""

    cells: tuple[tuple[str, ...], ...]

    @classmethod
    def from_mapping(cls, side: int, tau: Mapping[tuple[int, int], str]) -> "TilingSolution":
        return cls(tuple(tuple(tau[i, j] for j in range(side)) for i in range(side)))

    @property
    def side(self) -> int:
        return len(self.cells)

    def __getitem__(self, ij: tuple[int, int]) -> str:
        i, j = ij
        return self.cells[i][j]

    def items(self):
        for i, row in enumerate(self.cells):
            for j, t in enumerate(row):
                yield (i, j), t


# ---------------------------------------------------------------------------
# Files and checking


def parse_tiling(text: str) -> TilingInstance:
    """Lines ``tiles a b c``, ``h a b``, ``v a b``, ``init a b``; ``#`` comments."""
    tiles: list[str] = []
    horiz, vert, init = set(), set(), None
    for no, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        head, rest = words[0], words[1:]
        if head == "tiles":
            tiles += rest
        elif head in ("h", "v"):
            if len(rest) != 2:
                raise TilingFormatError(f"'{head}' takes two tiles", no)
            (horiz if head == "h" else vert).add((rest[0], rest[1]))
        elif head == "init":
            if init is not None:
                raise TilingFormatError("repeated 'init'", no)
            init = rest
        else:
            raise TilingFormatError(f"unknown directive {head!r}", no)
    if init is None:
        raise TilingFormatError("missing 'init' line")
    try:
        return TilingInstance(TilingProblem(tuple(tiles), horiz, vert), tuple(init))
    except ValueError as e:
        raise TilingFormatError(str(e)) from None


def dump_tiling(inst: TilingInstance) -> str:
    p = inst.problem
    lines = ["tiles " + " ".join(p.tiles)]
    lines += [f"h {a} {b}" for a, b in sorted(p.horiz)]
    lines += [f"v {a} {b}" for a, b in sorted(p.vert)]
    lines.append("init " + " ".join(inst.initial))
    return "\n".join(lines) + "\n"


def check_tiling(inst: TilingInstance, tau: TilingSolution) -> bool:
    s = inst.side
    if tau.side != s or any(len(row) != s for row in tau.cells):
        return False
    p = inst.problem
    for (i, j), t in tau.items():
        if t not in p.tiles:
            return False
        if (t, tau[(i + 1) % s, j]) not in p.horiz or (t, tau[i, (j + 1) % s]) not in p.vert:
            return False
    return all(tau[0, k] == t for k, t in enumerate(inst.initial))


def solve_tiling(inst: TilingInstance, limit: int = 1 << 20) -> Optional[TilingSolution]:
    """Brute force over all assignments of the free cells (tiny instances)."""
    s = inst.side
    fixed = {(0, k): t for k, t in enumerate(inst.initial)}
    free = [(i, j) for i in range(s) for j in range(s) if (i, j) not in fixed]
    if len(inst.problem.tiles) ** len(free) > limit:
        raise ValueError("instance too large for brute force")
    for combo in itertools.product(inst.problem.tiles, repeat=len(free)):
        tau = TilingSolution.from_mapping(s, {**fixed, **dict(zip(free, combo))})
        if check_tiling(inst, tau):
            return tau
    return None


# ---------------------------------------------------------------------------
# Encoding


def tile_var(t: str) -> Atom:
    return Atom(f"tile_{t}")


def _bits(axis: str, n: int) -> list[Atom]:
    return [Atom(f"{axis}{i}") for i in range(n)]


def _value(axis: str, n: int, k: int) -> Formula:
    """``H=k`` / ``V=k`` on the position bits."""
    return conj(b if k >> i & 1 else neg(b) for i, b in enumerate(_bits(axis, n)))


def _pseudo_unique(n: int, literal: bool) -> Formula:
    # the verbatim ``dia(c & p) -> box(c & p)`` forces every illuminated
    # world to share one colour, which no lantern can satisfy
    parts = []
    for c in (WHT, BL):
        for axis in ("v", "h"):
            for p in _bits(axis, n):
                body = (c & p) if literal else implies(c, p)
                parts.append(implies(dia(c & p), Not(dia(Not(body)))))
    return conj(parts)


def _equal(axis: str, n: int) -> Formula:
    return conj(iff(dia(BL & b), dia(WHT & b)) for b in _bits(axis, n))


def _add_one(axis: str, src: Atom, dst: Atom, n: int, literal: bool) -> Formula:
    """Position of ``dst`` worlds = position of ``src`` worlds + 1 on ``axis``."""
    x = _bits(axis, n)
    wrap_from = dia(src & conj(x))
    wrap = implies(wrap_from, dia(dst & conj(neg(b) for b in x)))
    carries = []
    for i in range(n):
        low = x[:i]
        carries.append(conj([
            dia(src & neg(x[i]) & conj(low)),
            dia(dst & x[i] & conj(neg(b) for b in low)),
            conj(iff(dia(src & x[j]), dia(dst & x[j])) for j in range(i + 1, n)),
        ]))
    if literal:
        return wrap & disj(carries)
    # the wrap-around case has no carry position, so it must stand alone
    return wrap & (wrap_from | disj(carries))


_KIND_SHAPE = {  # kind -> (axis advanced, other axis, source colour, target colour)
    "vbw": ("v", "h", BL, WHT),
    "vwb": ("v", "h", WHT, BL),
    "hbw": ("h", "v", BL, WHT),
    "hwb": ("h", "v", WHT, BL),
}


def _kind_formula(kind: str, n: int, literal: bool) -> Formula:
    axis, other, src, dst = _KIND_SHAPE[kind]
    return conj([_pseudo_unique(n, literal), _equal(other, n), _add_one(axis, src, dst, n, literal)])


def torus_parts(inst: TilingInstance, literal: bool = False) -> dict[str, Formula]:
    """Named building blocks of the encoding, before the universal wrapper."""
    n = inst.n
    if n > MAX_N:
        raise OverflowError("torus size exceeds the grade range")
    N = 1 << (2 * n)
    v, h = _bits("v", n), _bits("h", n)
    kinds = {k: _kind_formula(k, n, literal) for k in KINDS}
    witness = (lambda k: LAN & kinds[k]) if literal else (lambda k: LAN & Atom(k) & kinds[k])
    parts = {
        "first_cell": conj([INN, WHT] + [neg(b) for b in v] + [neg(b) for b in h]),
        "partition": iff(LAN, neg(INN)) & iff(LAN, neg(InvDiaGeq(1, TRUE))),
        "chessboard": iff(WHT, neg(BL)) & iff(WHT, iff(v[0], h[0])),
        "torus_size": implies(INN, dia_eq(TRUE, N)),
        "successors": implies(LAN, disj(Atom(k) & kinds[k] for k in KINDS))
        & implies(INN, conj(InvDiaGeq(1, witness(k)) for k in KINDS)),
    }
    for k in KINDS:
        parts["kind_" + k] = kinds[k]
    tiles = [tile_var(t) for t in inst.problem.tiles]
    parts["tile"] = implies(INN, disj(tiles) & conj(
        neg(a) | neg(b) for a, b in itertools.combinations(tiles, 2)))
    parts["init_cond"] = conj(
        implies(INN & _value("h", n, 0) & _value("v", n, i), tile_var(t))
        for i, t in enumerate(inst.initial))
    parts["tiling_rules"] = conj(
        implies(LAN & Atom(k), _rule(k, inst.problem, literal)) for k in KINDS)
    return parts


def _rule(kind: str, p: TilingProblem, literal: bool) -> Formula:
    axis, _, src, dst = _KIND_SHAPE[kind]
    rel = p.vert if axis == "v" else p.horiz
    if literal and src is WHT:
        # verbatim orientation of the white-to-black rules: it constrains
        # the black cell as the left/lower tile, which is the wrong pair
        return disj(dia(WHT & tile_var(b)) & dia(BL & tile_var(a)) for a, b in sorted(rel))
    return disj(dia(src & tile_var(a)) & dia(dst & tile_var(b)) for a, b in sorted(rel))


def encode_torus(inst: TilingInstance, literal: bool = False) -> Formula:
    p = torus_parts(inst, literal)
    body = conj([p["partition"], p["chessboard"], p["torus_size"], p["successors"]])
    return p["first_cell"] & universal(body)


def encode_tiling(inst: TilingInstance, literal: bool = False) -> Formula:
    p = torus_parts(inst, literal)
    return universal(conj([p["tile"], p["init_cond"], p["tiling_rules"]]))


def phi_reduction(inst: TilingInstance, literal: bool = False) -> Formula:
    """Locally satisfiable over K5 / D5 iff the instance has a solution."""
    return encode_torus(inst, literal) & encode_tiling(inst, literal)


# ---------------------------------------------------------------------------
# Models


def _cell_index(inst: TilingInstance, i: int, j: int) -> int:
    return i * inst.side + j


def _white(i: int, j: int) -> bool:
    return (i & 1) == (j & 1)


def _neighbour(kind: str, i: int, j: int, s: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """(source, target) cells related by a ``kind`` lantern through cell (i, j)."""
    axis, _, src, _ = _KIND_SHAPE[kind]
    here_is_src = _white(i, j) == (src is WHT)
    step = (1, 0) if axis == "h" else (0, 1)
    if here_is_src:
        return (i, j), ((i + step[0]) % s, (j + step[1]) % s)
    return ((i - step[0]) % s, (j - step[1]) % s), (i, j)


def build_intended_model(inst: TilingInstance, tau: TilingSolution) -> KripkeStructure:
    """Clique of cells plus one lantern per (kind, cell) lighting the source
    and target of that cell's ``kind`` step.  Lanterns sit at position 0
    and are white, as the chessboard rule holds everywhere."""
    if not check_tiling(inst, tau):
        raise ValueError("not a solution of the instance")
    n, s = inst.n, inst.side
    cells = s * s
    clique = (1 << cells) - 1
    succ = [clique] * cells
    val: dict[str, int] = {}

    def put(name: str, w: int) -> None:
        val[name] = val.get(name, 0) | (1 << w)

    for i in range(s):
        for j in range(s):
            w = _cell_index(inst, i, j)
            put("inn", w)
            put("wht" if _white(i, j) else "bl", w)
            put(tile_var(tau[i, j]).name, w)
            for b in range(n):
                if i >> b & 1:
                    put(f"h{b}", w)
                if j >> b & 1:
                    put(f"v{b}", w)
    for kind in KINDS:
        for i in range(s):
            for j in range(s):
                a, b = _neighbour(kind, i, j, s)
                w = len(succ)
                succ.append(mask_of([_cell_index(inst, *a), _cell_index(inst, *b)]))
                put("lan", w)
                put(kind, w)
                put("wht", w)  # the chessboard rule also covers lanterns
    names = [f"v{b}" for b in range(n)] + [f"h{b}" for b in range(n)]
    names += ["lan", "inn", "wht", "bl", *KINDS] + [tile_var(t).name for t in inst.problem.tiles]
    return KripkeStructure.from_masks(succ, {x: val.get(x, 0) for x in names})


def decode_tiling(A: KripkeStructure, inst: TilingInstance) -> TilingSolution:
    """Read positions and tiles off the inner worlds of a model."""
    n, s = inst.n, inst.side
    inner = A.full & ~mask_of(lanterns(A))
    tiles = inst.problem.tiles
    tau: dict[tuple[int, int], str] = {}
    for w in range(A.n):
        if not inner >> w & 1:
            continue
        i = sum(1 << b for b in range(n) if A.holds(f"h{b}", w))
        j = sum(1 << b for b in range(n) if A.holds(f"v{b}", w))
        here = [t for t in tiles if A.holds(tile_var(t).name, w)]
        if len(here) != 1:
            raise DecodeError(f"world {w} carries {len(here)} tiles")
        if (i, j) in tau:
            raise DecodeError(f"position ({i}, {j}) occurs twice")
        tau[i, j] = here[0]
    if len(tau) != s * s:
        raise DecodeError(f"{len(tau)} cells found, expected {s * s}")
    return TilingSolution.from_mapping(s, tau)


def origin_world(A: KripkeStructure, inst: TilingInstance) -> Optional[int]:
    """Least world satisfying the first-cell condition."""
    m = truth_set(A, torus_parts(inst)["first_cell"])
    return (m & -m).bit_length() - 1 if m else None

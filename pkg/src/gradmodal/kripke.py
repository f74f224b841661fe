"""Finite Kripke structures over dense world indices.

Relations are stored as one successor bit-set per world (a Python ``int``);
valuations map each declared variable to a bit-set of worlds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "KripkeStructure", "FrameClass", "FRAME_CLASSES", "ModelFormatError",
    "frame_axioms", "in_class", "lanterns", "inner_worlds", "clique_of", "cliques",
    "clique_groups", "is_connected", "connected_components", "strict_successors",
    "world_depth", "depth", "width", "breadth", "direct_successors",
    "transitive_closure", "reflexive_closure", "serial_completion",
    "euclidean_closure", "symmetric_closure", "enumerate_frames",
    "enumerate_models", "parse_model", "dump_model", "to_dot", "bits",
    "EnumerationBudgetExceeded",
]

AXIOMS = ("D", "T", "B", "4", "5")
AXIOM_BIT = {"D": 1, "T": 2, "B": 4, "4": 8, "5": 16}
DEFAULT_BIT_BUDGET = 26


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(worlds: Iterable[int]) -> int:
    m = 0
    for w in worlds:
        m |= 1 << w
    return m


class KripkeStructure:
    """Immutable finite structure ``<W, R, V>`` with ``W = {0, ..., n-1}``."""

    __slots__ = ("n", "succ", "valuation", "__dict__")

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int]] = (),
        valuation: Mapping[str, Iterable[int] | int] | None = None,
    ):
        if n < 0:
            raise ValueError("number of worlds must be non-negative")
        succ = [0] * n
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} worlds")
            succ[i] |= 1 << j
        self.n = n
        self.succ = tuple(succ)
        self.valuation = self._normalize_valuation(n, valuation or {})

    @staticmethod
    def _normalize_valuation(n, valuation) -> dict[str, int]:
        full = (1 << n) - 1
        out = {}
        for name in sorted(valuation):
            worlds = valuation[name]
            if isinstance(worlds, int):
                if worlds & ~full:
                    raise ValueError(f"valuation of {name!r} mentions worlds out of range")
                out[name] = worlds
            else:
                m = 0
                for w in worlds:
                    if not 0 <= w < n:
                        raise ValueError(f"valuation of {name!r} mentions world {w}")
                    m |= 1 << w
                out[name] = m
        return out

    @classmethod
    def from_masks(cls, succ: Sequence[int], valuation: Mapping[str, int] | None = None):
        n = len(succ)
        obj = cls.__new__(cls)
        full = (1 << n) - 1
        for s in succ:
            if s & ~full:
                raise ValueError("successor mask out of range")
        obj.n = n
        obj.succ = tuple(succ)
        obj.valuation = cls._normalize_valuation(n, valuation or {})
        return obj

    # -- derived data -----------------------------------------------------

    @cached_property
    def pred(self) -> tuple[int, ...]:
        pred = [0] * self.n
        for i, s in enumerate(self.succ):
            for j in bits(s):
                pred[j] |= 1 << i
        return tuple(pred)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def worlds(self) -> range:
        return range(self.n)

    @property
    def variables(self) -> list[str]:
        return list(self.valuation)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in bits(self.succ[i])]

    def num_edges(self) -> int:
        return sum(s.bit_count() for s in self.succ)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.succ[i] >> j & 1)

    def truth(self, var: str) -> int:
        """Bit-set of worlds where ``var`` holds; undeclared variables are false."""
        return self.valuation.get(var, 0)

    def holds(self, var: str, w: int) -> bool:
        return bool(self.truth(var) >> w & 1)

    def one_type(self, w: int, variables: Sequence[str] | None = None) -> tuple[bool, ...]:
        names = self.variables if variables is None else variables
        return tuple(self.holds(v, w) for v in names)

    # -- builders ---------------------------------------------------------

    def with_valuation(self, valuation: Mapping[str, Iterable[int] | int], *, replace: bool = False):
        merged: dict = {} if replace else dict(self.valuation)
        merged.update(valuation)
        out = KripkeStructure.from_masks(self.succ)
        out.valuation = self._normalize_valuation(self.n, merged)
        return out

    def with_succ(self, succ: Sequence[int]) -> "KripkeStructure":
        return KripkeStructure.from_masks(succ, self.valuation)

    def restrict(self, worlds: Iterable[int]) -> tuple["KripkeStructure", list[int]]:
        """Induced substructure on ``worlds``, renumbered in ascending order.

        Returns the structure and the list mapping new indices to old ones.
        """
        keep = sorted(set(worlds))
        index = {w: k for k, w in enumerate(keep)}
        succ = []
        for w in keep:
            succ.append(mask_of(index[j] for j in bits(self.succ[w]) if j in index))
        val = {
            name: mask_of(index[w] for w in bits(m) if w in index)
            for name, m in self.valuation.items()
        }
        return KripkeStructure.from_masks(succ, val), keep

    def disjoint_union(self, other: "KripkeStructure") -> "KripkeStructure":
        shift = self.n
        succ = list(self.succ) + [s << shift for s in other.succ]
        names = set(self.valuation) | set(other.valuation)
        val = {v: self.truth(v) | (other.truth(v) << shift) for v in names}
        return KripkeStructure.from_masks(succ, val)

    # -- identity ---------------------------------------------------------

    def _key(self):
        return (self.n, self.succ, tuple(sorted(self.valuation.items())))

    def __eq__(self, other):
        if not isinstance(other, KripkeStructure):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"KripkeStructure(n={self.n}, edges={self.edges()}, valuation={self.valuation})"


# ---------------------------------------------------------------------------
# Frame classes


def _close_axioms(axioms: Iterable[str]) -> frozenset[str]:
    ax = set(axioms)
    unknown = ax - set(AXIOMS)
    if unknown:
        raise ValueError(f"unknown axioms {sorted(unknown)}")
    changed = True
    while changed:
        before = len(ax)
        if "T" in ax:
            ax.add("D")
        if "B" in ax and "4" in ax:
            ax.add("5")
        if "B" in ax and "5" in ax:
            ax.add("4")
        if "T" in ax and "5" in ax:
            ax.add("B")
        # serial + symmetric + transitive forces reflexivity
        if "D" in ax and "B" in ax and "4" in ax:
            ax.add("T")
        changed = len(ax) != before
    return frozenset(ax)


_CLASS_NAMES = {
    frozenset(): "K",
    frozenset("D"): "D",
    frozenset("DT"): "T",
    frozenset("B"): "KB",
    frozenset("DB"): "DB",
    frozenset("DTB"): "TB",
    frozenset("4"): "K4",
    frozenset("D4"): "D4",
    frozenset("DT4"): "S4",
    frozenset("5"): "K5",
    frozenset("D5"): "D5",
    frozenset("45"): "K45",
    frozenset("D45"): "D45",
    frozenset("B45"): "KB45",
    frozenset("DTB45"): "S5",
}
_ALIASES = {
    "B": "KB", "KTB": "TB", "KT": "T", "KD": "D", "KB4": "KB45", "KB5": "KB45",
    "B4": "KB45", "KD4": "D4", "KD5": "D5", "KD45": "D45", "KT4": "S4", "KT45": "S5",
    "KDB": "DB",
}


@dataclass(frozen=True)
class FrameClass:
    """One of the fifteen classes of the modal cube, as its closed axiom set."""

    axioms: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "axioms", _close_axioms(self.axioms))

    @classmethod
    def of(cls, *axioms: str) -> "FrameClass":
        return cls(frozenset(axioms))

    @classmethod
    def from_name(cls, name: str) -> "FrameClass":
        key = name.strip().upper().replace("KK", "K")
        key = _ALIASES.get(key, key)
        for ax, label in _CLASS_NAMES.items():
            if label == key:
                return cls(ax)
        raise ValueError(f"unknown frame class {name!r}")

    @property
    def name(self) -> str:
        return _CLASS_NAMES[self.axioms]

    @property
    def mask(self) -> int:
        return sum(AXIOM_BIT[a] for a in self.axioms)

    @property
    def euclidean(self) -> bool:
        return "5" in self.axioms

    @property
    def transitive(self) -> bool:
        return "4" in self.axioms

    def __str__(self):
        return self.name


FRAME_CLASSES = {label: FrameClass(ax) for ax, label in _CLASS_NAMES.items()}


def _axioms_from_succ(n: int, succ: Sequence[int], pred: Sequence[int]) -> set[str]:
    out = set()
    if all(succ):
        out.add("D")
    if all(succ[i] >> i & 1 for i in range(n)):
        out.add("T")
    if all(succ[i] == pred[i] for i in range(n)):
        out.add("B")
    trans = eucl = True
    for i in range(n):
        si = succ[i]
        for j in bits(si):
            sj = succ[j]
            if trans and sj & ~si:
                trans = False
            if eucl and si & ~sj:
                eucl = False
        if not (trans or eucl):
            break
    if trans:
        out.add("4")
    if eucl:
        out.add("5")
    return out


def frame_axioms(A: KripkeStructure) -> frozenset[str]:
    """The axioms among D, T, B, 4, 5 that the frame of ``A`` satisfies."""
    return frozenset(_axioms_from_succ(A.n, A.succ, A.pred))


def in_class(A: KripkeStructure, F: FrameClass | str) -> bool:
    if isinstance(F, str):
        F = FrameClass.from_name(F)
    return frame_axioms(A) >= F.axioms


# ---------------------------------------------------------------------------
# Shape analysis


def lanterns(A: KripkeStructure) -> frozenset[int]:
    """Worlds without predecessors."""
    return frozenset(w for w in range(A.n) if A.pred[w] == 0)


def inner_worlds(A: KripkeStructure) -> frozenset[int]:
    return frozenset(w for w in range(A.n) if A.pred[w] != 0)


def clique_mask(A: KripkeStructure, w: int) -> int:
    return (1 << w) | (A.succ[w] & A.pred[w])


def clique_of(A: KripkeStructure, w: int) -> frozenset[int]:
    """``w`` together with every world it is mutually related to."""
    return frozenset(bits(clique_mask(A, w)))


def clique_groups(A: KripkeStructure) -> list[tuple[frozenset[int], bool]]:
    """Classes of the equivalence closure of mutual relatedness, each flagged
    with whether it is a genuine clique (all members pairwise mutual)."""
    parent = list(range(A.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for w in range(A.n):
        for v in bits(A.succ[w] & A.pred[w]):
            a, b = find(w), find(v)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for w in range(A.n):
        groups.setdefault(find(w), []).append(w)
    out = []
    for members in sorted(groups.values()):
        m = mask_of(members)
        genuine = all(clique_mask(A, w) == m for w in members)
        out.append((frozenset(members), genuine))
    return out


def cliques(A: KripkeStructure) -> list[frozenset[int]]:
    """Partition of the worlds into cliques, ordered by least member."""
    return [g for g, _ in clique_groups(A)]


def connected_components(A: KripkeStructure) -> list[frozenset[int]]:
    seen = 0
    comps = []
    for start in range(A.n):
        if seen >> start & 1:
            continue
        comp = 1 << start
        frontier = comp
        while frontier:
            nxt = 0
            for w in bits(frontier):
                nxt |= A.succ[w] | A.pred[w]
            frontier = nxt & ~comp
            comp |= nxt
        seen |= comp
        comps.append(frozenset(bits(comp)))
    return comps


def is_connected(A: KripkeStructure) -> bool:
    return len(connected_components(A)) <= 1


def strict_successors(A: KripkeStructure, w: int) -> int:
    return A.succ[w] & ~A.pred[w]


def _depths(A: KripkeStructure) -> list[int]:
    # longest chain of strict successors, by DFS with cycle detection
    state = [0] * A.n  # 0 new, 1 on stack, 2 done
    out = [0] * A.n
    for root in range(A.n):
        if state[root]:
            continue
        stack = [(root, iter(bits(strict_successors(A, root))))]
        state[root] = 1
        while stack:
            w, it = stack[-1]
            advanced = False
            for v in it:
                if state[v] == 1:
                    raise ValueError("strict-successor relation is cyclic; depth is unbounded")
                if state[v] == 0:
                    state[v] = 1
                    stack.append((v, iter(bits(strict_successors(A, v)))))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                state[w] = 2
                out[w] = max((out[v] + 1 for v in bits(strict_successors(A, w))), default=0)
    return out


def world_depth(A: KripkeStructure, w: int) -> int:
    return _depths(A)[w]


def world_depths(A: KripkeStructure) -> list[int]:
    return _depths(A)


def depth(A: KripkeStructure) -> int:
    return max(_depths(A), default=0)


def width(A: KripkeStructure) -> int:
    return max((len(clique_of(A, w)) for w in range(A.n)), default=0)


def direct_successors(A: KripkeStructure, w: int) -> list[int]:
    """Strict successors ``v`` of ``w`` with nothing strictly in between."""
    qw = clique_mask(A, w)
    out = []
    for v in bits(strict_successors(A, w)):
        between = A.succ[w] & A.pred[v]
        if between & ~(qw | clique_mask(A, v)) == 0:
            out.append(v)
    return out


def breadth(A: KripkeStructure) -> int:
    """Largest number of direct successors of one world with pairwise
    disjoint cliques."""
    best = 0
    for w in range(A.n):
        masks = sorted({clique_mask(A, v) for v in direct_successors(A, w)})
        if all(a & b == 0 for a, b in itertools.combinations(masks, 2)):
            best = max(best, len(masks))
            continue
        # overlapping clique sets only arise on non-transitive inputs
        for k in range(len(masks), best, -1):
            if any(
                all(a & b == 0 for a, b in itertools.combinations(sub, 2))
                for sub in itertools.combinations(masks, k)
            ):
                best = k
                break
    return best


# ---------------------------------------------------------------------------
# Closures


def transitive_closure(A: KripkeStructure) -> KripkeStructure:
    succ = list(A.succ)
    n = A.n
    for k in range(n):
        kb = 1 << k
        sk = succ[k]
        for i in range(n):
            if succ[i] & kb:
                succ[i] |= sk
    return A.with_succ(succ)


def reflexive_closure(A: KripkeStructure) -> KripkeStructure:
    return A.with_succ([s | (1 << i) for i, s in enumerate(A.succ)])


def serial_completion(A: KripkeStructure) -> KripkeStructure:
    """Add a self-loop to every world without successors."""
    return A.with_succ([s if s else (1 << i) for i, s in enumerate(A.succ)])


def symmetric_closure(A: KripkeStructure) -> KripkeStructure:
    return A.with_succ([s | p for s, p in zip(A.succ, A.pred)])


def euclidean_closure(A: KripkeStructure, transitive: bool = False) -> KripkeStructure:
    """Least Euclidean (optionally also transitive) relation containing ``R``."""
    succ = list(A.succ)
    changed = True
    while changed:
        changed = False
        for i in range(A.n):
            si = succ[i]
            for j in bits(si):
                new = succ[j] | si
                if transitive:
                    si |= succ[j]
                if new != succ[j]:
                    succ[j] = new
                    changed = True
            if si != succ[i]:
                succ[i] = si
                changed = True
    return A.with_succ(succ)


# ---------------------------------------------------------------------------
# Enumeration


class EnumerationBudgetExceeded(ValueError):
    pass


def _decode_relation(n: int, code: int) -> tuple[int, ...]:
    full = (1 << n) - 1
    return tuple((code >> (i * n)) & full for i in range(n))


def encode_relation(succ: Sequence[int]) -> int:
    n = len(succ)
    return sum(s << (i * n) for i, s in enumerate(succ))


def enumerate_frames(n: int, F: FrameClass | str = "K") -> Iterator[tuple[int, ...]]:
    """Successor tuples of every relation on ``n`` worlds in class ``F``,
    in increasing relation code (bit ``i*n + j`` encodes edge ``(i, j)``)."""
    from ._kernel import kernel

    if isinstance(F, str):
        F = FrameClass.from_name(F)
    if n * n > 36:
        raise EnumerationBudgetExceeded(f"{n} worlds is beyond frame enumeration")
    for code in kernel.frame_codes(n, F.mask):
        yield _decode_relation(n, code)


def enumerate_models(
    n: int,
    variables: Sequence[str],
    F: FrameClass | str = "K",
    budget: int = DEFAULT_BIT_BUDGET,
) -> Iterator[KripkeStructure]:
    """Every structure on ``n`` worlds with frame in ``F`` and a valuation
    over ``variables``; each exactly once."""
    if n < 1:
        raise ValueError("n must be at least 1")
    variables = sorted(set(variables))
    if n * n + n * len(variables) > budget:
        raise EnumerationBudgetExceeded(
            f"{n * n + n * len(variables)} bits exceed the enumeration budget of {budget}"
        )
    full = (1 << n) - 1
    for succ in enumerate_frames(n, F):
        for code in range(1 << (n * len(variables))):
            val = {v: (code >> (k * n)) & full for k, v in enumerate(variables)}
            yield KripkeStructure.from_masks(succ, val)


# ---------------------------------------------------------------------------
# Text format


class ModelFormatError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


def parse_model(text: str) -> KripkeStructure:
    """Parse the ``.km`` format: ``worlds N``, ``edge i j``, ``val p: i j``."""
    n = None
    edges = []
    val: dict[str, list[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "worlds":
                if n is not None:
                    raise ModelFormatError("duplicate 'worlds' line", lineno)
                n = int(rest)
            elif head == "edge":
                i, j = rest.split()
                edges.append((int(i), int(j)))
            elif head == "val":
                name, colon, worlds = rest.partition(":")
                if not colon:
                    raise ModelFormatError("expected 'val NAME: worlds'", lineno)
                val.setdefault(name.strip(), []).extend(int(w) for w in worlds.split())
            else:
                raise ModelFormatError(f"unknown directive {head!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ModelFormatError):
                raise
            raise ModelFormatError(str(exc), lineno) from None
    if n is None:
        raise ModelFormatError("missing 'worlds' line", 0)
    try:
        return KripkeStructure(n, edges, val)
    except ValueError as exc:
        raise ModelFormatError(str(exc), 0) from None


def dump_model(A: KripkeStructure) -> str:
    lines = [f"worlds {A.n}"]
    lines += [f"edge {i} {j}" for i, j in A.edges()]
    for name, m in A.valuation.items():
        lines.append(f"val {name}: {' '.join(map(str, bits(m)))}".rstrip())
    return "\n".join(lines) + "\n"


def to_dot(A: KripkeStructure, name: str = "K") -> str:
    out = [f"digraph {name} {{"]
    lan = lanterns(A)
    for w in range(A.n):
        props = ",".join(v for v in A.valuation if A.holds(v, w))
        shape = "box" if w in lan else "ellipse"
        out.append(f'  w{w} [label="{w}\\n{props}", shape={shape}];')
    for i, j in A.edges():
        out.append(f"  w{i} -> w{j};")
    out.append("}")
    return "\n".join(out) + "\n"

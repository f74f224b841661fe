"""Command-line front end.

Exit codes: 0 success or satisfiable, 1 unsatisfiable or no model within
the bound (or a failed check), 2 usage or input error, 3 an engine returned
a model that failed re-verification.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import fo
from .kripke import (
    FRAME_CLASSES, FrameClass, ModelFormatError, dump_model, frame_axioms, in_class,
    parse_model, to_dot,
)
from .normalform import NormalFormError, extend_model, render_nf, to_normal_form
from .reductions.kflat import (
    flatten_modal_depth, reduce_global_k_to_k5, reduce_global_k_to_transitive,
)
from .reductions.tiling import TilingFormatError, parse_tiling, phi_reduction
from .semantics import truth_set
from .solvers.euclid import sat_k5, sat_k45
from .solvers.oracle import bounded_sat
from .solvers.verdict import MODES, SAT, UNSAT, SatQuery, VerificationError
from .surgery import SurgeryError, finitize, reduce_depth, reduce_width
from .syntax import FormulaSyntaxError, formula_length, parse_file_text, render

EPILOG = """\
formula grammar (.mf files; '#' starts a comment):
  formula := iff ; iff := impl ("<->" impl)* ; impl := or ("->" or)*
  or := and ("|" and)* ; and := unary ("&" unary)*
  unary := "~" unary | MOD unary | atom
  MOD := dia | box | idia | ibox | dia>=N | dia<=N | idia>=N | idia<=N
  atom := IDENT | true | false | "(" formula ")"

model format (.km files, one item per line):
  worlds N
  edge i j
  val p: i j k

tiling format (.tile files):
  tiles a b c
  h a b        horizontal pair (left, right)
  v a b        vertical pair (lower, upper)
  init a b     initial column; n is its length

exit codes: 0 ok/sat, 1 unsat/no model/check failed, 2 usage error,
3 verification failure
"""

ENGINE_CLASSES = {"k45": ("K45", "D45"), "k5": ("K5", "D5")}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        opts = {k: v for k, v in vars(ns).items() if k not in ("command", "handler")}
        for key in ("bound", "lanterns"):
            if opts.get(key) is not None and opts[key] < 1:
                raise UsageError(f"--{key} must be positive")
        return cls(ns.command, opts)

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None


# ---------------------------------------------------------------------------
# I/O helpers


def _read(path: Optional[str]) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _formula(cfg: RunConfig, key: str = "formula"):
    text = getattr(cfg, "text", None) if key == "formula" else None
    if text is None:
        text = _read(cfg.options.get(key))
    return parse_file_text(text)


def _model(cfg: RunConfig):
    if not cfg.model:
        raise UsageError("a model file is required (-m)")
    return parse_model(_read(cfg.model))


def _emit(cfg: RunConfig, text: str) -> None:
    out = cfg.options.get("output")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_model(cfg: RunConfig, A) -> None:
    _emit(cfg, to_dot(A) if cfg.options.get("dot") else dump_model(A))


def _tsv(cfg: RunConfig) -> bool:
    return cfg.options.get("format") == "tsv"


# ---------------------------------------------------------------------------
# Subcommands


def cmd_parse(cfg: RunConfig) -> int:
    f = _formula(cfg)
    n = formula_length(f)
    if _tsv(cfg):
        print(f"{n}\t{render(f)}")
    else:
        print(render(f))
        print(f"length {n}")
    return 0


def cmd_check(cfg: RunConfig) -> int:
    f, A = _formula(cfg), _model(cfg)
    mask = truth_set(A, f)
    if cfg.world is not None:
        if not 0 <= cfg.world < A.n:
            raise UsageError(f"world {cfg.world} out of range")
        ok = bool(mask >> cfg.world & 1)
        w, mode, verdict = cfg.world, "world", "satisfied" if ok else "not-satisfied"
    elif cfg.is_global:
        bad = A.full & ~mask
        ok = bad == 0
        w = None if ok else (bad & -bad).bit_length() - 1
        mode, verdict = "global", "satisfied" if ok else "counterexample"
    else:
        ok = mask != 0
        w = (mask & -mask).bit_length() - 1 if ok else None
        mode, verdict = "local", "satisfied" if ok else "not-satisfied"
    if _tsv(cfg):
        print(f"{mode}\t{verdict}\t{'' if w is None else w}")
    elif mode == "global":
        print("globally satisfied" if ok else f"counterexample at world {w}")
    elif mode == "local":
        print(f"satisfied at world {w}" if ok else "not satisfied at any world")
    else:
        print(f"world {w}: {'satisfied' if ok else 'not satisfied'}")
    return 0 if ok else 1


def cmd_frame(cfg: RunConfig) -> int:
    A = _model(cfg)
    ax = frame_axioms(A)
    classes = [c for c in FRAME_CLASSES if in_class(A, c)]
    if _tsv(cfg):
        print("axiom\tholds")
        for a in "DTB45":
            print(f"{a}\t{int(a in ax)}")
        print(f"classes\t{','.join(classes)}")
    else:
        names = {"D": "serial", "T": "reflexive", "B": "symmetric", "4": "transitive", "5": "euclidean"}
        for a in "DTB45":
            print(f"{a} ({names[a]}): {'yes' if a in ax else 'no'}")
        print("classes: " + " ".join(classes))
    return 0


def cmd_normalform(cfg: RunConfig) -> int:
    _emit(cfg, render_nf(to_normal_form(_formula(cfg))))
    return 0


def cmd_translate(cfg: RunConfig) -> int:
    f = _formula(cfg)
    if cfg.target == "gc2":
        g = fo.st(f)
    elif cfg.target == "c2-k5":
        g = fo.translate_k5(f, serial=cfg.serial)
    else:
        g = fo.translate_k45_c1(f, serial=cfg.serial)
    _emit(cfg, fo.serialize_fo(g, cfg.dialect) + "\n")
    return 0


def cmd_surgery(cfg: RunConfig) -> int:
    if not cfg.nf:
        raise UsageError("--nf FORMULA_FILE is required")
    nf = to_normal_form(parse_file_text(_read(cfg.nf)))
    A = _model(cfg)
    if nf.definitions:
        A = extend_model(A, nf)
    step = {"depth": reduce_depth, "width": reduce_width, "finitize": finitize}[cfg.stage]
    _emit_model(cfg, step(A, nf))
    return 0


def _report(cfg: RunConfig, v) -> int:
    worlds = v.model.n if v.model is not None else ""
    witness = "" if v.witness is None else v.witness
    if _tsv(cfg):
        print(f"{v.status}\t{v.engine}\t{worlds}\t{witness}\t{v.reason}")
    elif v.status == SAT:
        print(f"satisfiable ({v.reason}); witness world {witness}")
    elif v.status == UNSAT:
        print(f"unsatisfiable ({v.reason})")
    else:
        print(v.reason, file=sys.stderr)
        print(v.reason)
    if v.status == SAT:
        if not _tsv(cfg) or cfg.options.get("output") or cfg.options.get("dot"):
            _emit_model(cfg, v.model)
        return 0
    return 1


def cmd_solve(cfg: RunConfig) -> int:
    f = _formula(cfg)
    local = parse_file_text(_read(cfg.local)) if cfg.local else None
    if cfg.mode == "combined" and local is None:
        raise UsageError("combined mode needs --local FILE")
    cls = FrameClass.from_name(cfg.frame_class)
    if cfg.engine == "oracle":
        q = SatQuery(f, cls, cfg.mode, cfg.bound, local)
        v = bounded_sat(q)
    else:
        allowed = ENGINE_CLASSES[cfg.engine]
        if cls.name not in allowed:
            raise UsageError(f"engine {cfg.engine} handles {' and '.join(allowed)} only")
        serial = cls.name == allowed[1]
        if cfg.engine == "k45":
            v = sat_k45(f, serial=serial, mode=cfg.mode, local=local)
        else:
            v = sat_k5(f, serial=serial, lantern_budget=cfg.lanterns, mode=cfg.mode, local=local)
    return _report(cfg, v)


def cmd_reduce(cfg: RunConfig) -> int:
    if cfg.kind == "tiling":
        if not cfg.tiling:
            raise UsageError("--kind tiling needs -t FILE")
        g = phi_reduction(parse_tiling(_read(cfg.tiling)), literal=cfg.literal)
    else:
        f = flatten_modal_depth(_formula(cfg))
        g = (reduce_global_k_to_transitive if cfg.kind == "k-to-4" else reduce_global_k_to_k5)(f)
    _emit(cfg, render(g) + "\n")
    return 0


def cmd_selftest(cfg: RunConfig) -> int:
    from .selftest import run_selftest

    results = run_selftest(cfg.seed)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        if _tsv(cfg):
            print(f"{r.name}\t{status}\t{r.cases}\t{r.seconds:.3f}\t{r.detail}")
        else:
            extra = f" ({r.detail})" if r.detail else ""
            print(f"{status} {r.name}: {r.cases} cases in {r.seconds:.2f}s{extra}")
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gradmodal", description="Graded two-way modal logic toolkit.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--format", choices=["human", "tsv"], default="human")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, handler, help_):
        sp = sub.add_parser(name, help=help_, epilog=EPILOG,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(handler=handler)
        sp.add_argument("--format", choices=["human", "tsv"], default=argparse.SUPPRESS)
        sp.add_argument("-o", "--output", help="write the main output to a file")
        return sp

    def formula_arg(sp):
        sp.add_argument("-f", "--formula", help="formula file (default: standard input)")

    sp = add("parse", cmd_parse, "echo the normalised formula and its length")
    formula_arg(sp)
    sp.add_argument("text", nargs="?", help="formula text instead of a file")

    sp = add("check", cmd_check, "model-check a formula")
    formula_arg(sp)
    sp.add_argument("-m", "--model")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--global", dest="is_global", action="store_true")
    g.add_argument("--local", dest="is_global", action="store_false")
    g.add_argument("--world", type=int)

    sp = add("frame", cmd_frame, "report frame axioms and classes of a model")
    sp.add_argument("-m", "--model")

    sp = add("normalform", cmd_normalform, "print the normal form")
    formula_arg(sp)

    sp = add("translate", cmd_translate, "translate into first-order counting logic")
    formula_arg(sp)
    sp.add_argument("--target", choices=["gc2", "c2-k5", "c1-k45"], default="gc2")
    sp.add_argument("--serial", action="store_true")
    sp.add_argument("--dialect", choices=["native", "smtlib-approx"], default="native")

    sp = add("surgery", cmd_surgery, "apply a model surgery stage")
    sp.add_argument("--stage", choices=["depth", "width", "finitize"], required=True)
    sp.add_argument("--nf", help="formula file, put through the normal form")
    sp.add_argument("-m", "--model")
    sp.add_argument("--dot", action="store_true")

    sp = add("solve", cmd_solve, "search for a model")
    formula_arg(sp)
    sp.add_argument("--class", dest="frame_class", default="K")
    sp.add_argument("--mode", choices=list(MODES), default="local")
    sp.add_argument("--engine", choices=["oracle", "k45", "k5"], default="oracle")
    sp.add_argument("--bound", type=int, default=4)
    sp.add_argument("--lanterns", type=int, default=8, help="lantern budget of the k5 engine")
    sp.add_argument("--local", help="local formula file for combined mode")
    sp.add_argument("--dot", action="store_true")

    sp = add("reduce", cmd_reduce, "generate a hardness-reduction formula")
    sp.add_argument("--kind", choices=["tiling", "k-to-4", "k-to-5"], required=True)
    sp.add_argument("-t", "--tiling", help="tiling file")
    formula_arg(sp)
    sp.add_argument("--literal", action="store_true",
                    help="emit the unrepaired verbatim formulas (tiling only)")

    sp = add("selftest", cmd_selftest, "run the seeded invariant corpus")
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = RunConfig.from_namespace(ns)
        return ns.handler(cfg)
    except VerificationError as e:
        print(f"error: verification failed: {e}", file=sys.stderr)
        return 3
    except (UsageError, FormulaSyntaxError, ModelFormatError, TilingFormatError,
            NormalFormError, SurgeryError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``vankampen <command> ...``.

Settings resolve as command-line flag, then ``VANKAMPEN_*`` environment
variable, then the JSON config file (``--config`` or ``VANKAMPEN_CONFIG``),
then the built-in default.

Exit codes: 0 success, 1 absent or undecided result, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass
from typing import Optional

from . import schemas
from .diagrams import (DEFAULT_CELL_BUDGET, AnnulusError, CellBudgetError, InvalidDiagramError,
                       VanKampenDiagram, area, build_power_diagram, build_w_diagram,
                       build_xn_diagram, t_annuli, validate)
from .families import (G, P, Q, T, OperationError, ParameterError, Presentation, apply_sequence,
                       g_word, op_from_json, op_to_json, presentations_equal,
                       replay_prefixes, standard_trivialization_sequence, v_word, w_word)
from .oracles import (SearchCaps, dehn_profile, fill_length, min_area, rows_to_csv, rows_to_json,
                      scaling_report)
from .tower import DEFAULT_BIT_CAP, UndecidedAtCap
from .words import Word, free_reduce, word_from_json
from .wordproblem import is_trivial_G, is_trivial_P, undecided

EXIT_OK, EXIT_ABSENT, EXIT_USAGE = 0, 1, 2

_DEFAULTS = {
    "caps_max_len": SearchCaps.max_word_length,
    "caps_max_cost": SearchCaps.max_cost,
    "caps_max_states": SearchCaps.max_states,
    "bit_cap": DEFAULT_BIT_CAP,
    "cell_budget": DEFAULT_CELL_BUDGET,
    "format": "text",
    "backend": None,
    "parallel": False,
}
_INT_SETTINGS = ("caps_max_len", "caps_max_cost", "caps_max_states", "bit_cap", "cell_budget")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    caps: SearchCaps
    bit_cap: int
    cell_budget: int
    format: str
    out: Optional[str]
    backend: Optional[str]
    parallel: bool

    @property
    def search_kw(self) -> dict:
        return {"backend": self.backend, "parallel": self.parallel}


def _read_json(path: str, kind: Optional[str] = None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if kind is not None:
        try:
            schemas.check(kind, data)
        except schemas.SchemaError as exc:
            raise UsageError(f"{path}: {exc}") from exc
    return data


def resolve_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg_path = getattr(args, "config", None) or environ.get("VANKAMPEN_CONFIG")
    file_cfg = _read_json(cfg_path, "config") if cfg_path else {}
    values = {}
    for key, default in _DEFAULTS.items():
        flag = getattr(args, key, None)
        env = environ.get("VANKAMPEN_" + key.upper())
        if flag is not None:
            values[key] = flag
        elif env is not None and env != "":
            if key in _INT_SETTINGS:
                try:
                    values[key] = int(env)
                except ValueError as exc:
                    raise UsageError(f"VANKAMPEN_{key.upper()}={env!r} is not an integer") from exc
            elif key == "parallel":
                values[key] = env.strip().lower() in ("1", "true", "yes", "on")
            else:
                values[key] = env
        elif key in file_cfg:
            values[key] = file_cfg[key]
        else:
            values[key] = default
    for key in _INT_SETTINGS:
        if values[key] <= 0:
            raise UsageError(f"{key.replace('_', '-')} must be positive")
    if values["format"] not in ("json", "csv", "text"):
        raise UsageError(f"unknown format {values['format']!r}")
    if values["backend"] not in (None, "numba", "numpy"):
        raise UsageError(f"unknown backend {values['backend']!r}")
    caps = SearchCaps(values["caps_max_len"], values["caps_max_cost"], values["caps_max_states"])
    return RunConfig(caps, values["bit_cap"], values["cell_budget"], values["format"],
                     getattr(args, "out", None), values["backend"], bool(values["parallel"]))


# -- inputs -----------------------------------------------------------------

def family_presentation(tag: str, n: int) -> Presentation:
    builders = {"G": G, "P": P, "Q": Q, "T": T}
    if tag not in builders:
        raise UsageError(f"unknown family {tag!r}")
    return builders[tag](n)


def load_presentation(args) -> Presentation:
    if getattr(args, "presentation", None):
        data = _read_json(args.presentation, "presentation")
        try:
            return Presentation.from_json(data)
        except ValueError as exc:
            raise UsageError(f"{args.presentation}: {exc}") from exc
    if not getattr(args, "family", None) or args.n is None:
        raise UsageError("give --presentation FILE or --family F --n N")
    return family_presentation(args.family, args.n)


_SHORTHAND = re.compile(r"^(w|v)(?::)?(\d+)$|^g:(\d+):(\d+)$")


def parse_word(text: str, p: Presentation) -> Word:
    """Inline JSON array, ``w1`` / ``v2`` / ``g:n:k`` shorthand, or ``x2 x1^-1`` text."""
    text = text.strip()
    if text.startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--word: column {exc.colno}: {exc.msg}") from exc
        try:
            w = word_from_json(data, p.alphabet)
        except ValueError as exc:
            raise UsageError(f"--word: {exc}") from exc
        return free_reduce(w)
    m = _SHORTHAND.match(text)
    if m:
        try:
            if m.group(1) == "w":
                w = w_word(int(m.group(2)))
            elif m.group(1) == "v":
                w = v_word(int(m.group(2)))
            else:
                w = g_word(int(m.group(3)), int(m.group(4)))
            return free_reduce(w.over(p.alphabet))
        except (ParameterError, ValueError, KeyError) as exc:
            raise UsageError(f"--word {text}: {exc}") from exc
    try:
        return free_reduce(p.alphabet.parse(text))
    except (ValueError, KeyError) as exc:
        raise UsageError(f"--word {text!r}: {exc}") from exc


def load_word(args, p: Presentation) -> Word:
    if getattr(args, "word_file", None):
        data = _read_json(args.word_file, "word")
        try:
            return free_reduce(word_from_json(data, p.alphabet))
        except ValueError as exc:
            raise UsageError(f"{args.word_file}: {exc}") from exc
    if getattr(args, "word", None) is None:
        raise UsageError("give --word or --word-file")
    return parse_word(args.word, p)


# -- output -----------------------------------------------------------------

def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def write_file(path: Optional[str], data) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(data))


# -- commands ---------------------------------------------------------------

def cmd_gen(args, cfg: RunConfig) -> int:
    fam = args.family
    nums = args.params
    w = None
    try:
        if fam in ("G", "P", "Q", "T"):
            if len(nums) != 1:
                raise UsageError(f"gen {fam} takes one parameter n")
            data = family_presentation(fam, nums[0]).to_json()
        elif fam in ("w", "v"):
            if len(nums) != 1:
                raise UsageError(f"gen {fam} takes one parameter")
            w = w_word(nums[0]) if fam == "w" else v_word(nums[0])
            data = {"generators": list(w.alphabet.names), "word": w.to_json()}
        else:
            if len(nums) != 2:
                raise UsageError("gen g takes parameters n k")
            w = g_word(nums[0], nums[1])
            data = {"generators": list(w.alphabet.names), "word": w.to_json()}
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.format == "text":
        if "word" in data:
            text = str(w) + "\n"
        else:
            text = str(Presentation.from_json(data)) + "\n"
        emit(cfg, text)
    else:
        emit(cfg, dumps(data))
    return EXIT_OK


def cmd_wp(args, cfg: RunConfig) -> int:
    p = load_presentation(args)
    w = load_word(args, p)
    if p.family is None or p.family[0] not in ("G", "P", "Q", "T"):
        raise UsageError("wp needs a G, P, Q or T family presentation")
    tag, n = p.family
    if tag == "G":
        verdict = is_trivial_G(n, w, cfg.bit_cap)
        text = str(verdict)
        decided = verdict.kind != "undecided"
    elif tag == "P":
        try:
            text = "trivial" if is_trivial_P(n, w, cfg.bit_cap) else "nontrivial"
            decided = True
        except UndecidedAtCap as exc:
            text, decided = str(undecided(str(exc))), False
    else:
        # Q(n) and T(n) both present the trivial group
        text, decided = "trivial", True
    if cfg.format == "json":
        emit(cfg, dumps({"word": w.to_json(), "verdict": text}))
    else:
        emit(cfg, text + "\n")
    return EXIT_OK if decided else EXIT_ABSENT


def _search_output(cfg, kind, w, value, witness, witness_path):
    if witness is not None:
        write_file(witness_path, witness.to_json())
    if cfg.format == "json":
        emit(cfg, dumps({"word": w.to_json(), kind: value,
                         "witness": witness.to_json() if witness is not None else None}))
    else:
        emit(cfg, ("absent" if value is None else str(value)) + "\n")
    return EXIT_OK if value is not None else EXIT_ABSENT


def cmd_area(args, cfg: RunConfig) -> int:
    p = load_presentation(args)
    w = load_word(args, p)
    res = min_area(p, w, cfg.caps, **cfg.search_kw)
    value, witness = res if res else (None, None)
    return _search_output(cfg, "area", w, value, witness, args.witness)


def cmd_fill(args, cfg: RunConfig) -> int:
    p = load_presentation(args)
    w = load_word(args, p)
    res = fill_length(p, w, cfg.caps, **cfg.search_kw)
    value, witness = res if res else (None, None)
    return _search_output(cfg, "fill_length", w, value, witness, args.witness)


def _load_diagram(path: str) -> VanKampenDiagram:
    data = _read_json(path, "diagram")
    try:
        return VanKampenDiagram.from_json(data)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def cmd_diagram(args, cfg: RunConfig) -> int:
    if args.action == "build":
        try:
            if args.kind == "power":
                d = build_power_diagram(args.m, cell_budget=cfg.cell_budget)
            elif args.kind == "w":
                d = build_w_diagram(args.m, cell_budget=cfg.cell_budget)
            else:
                d = build_xn_diagram(args.m, cell_budget=cfg.cell_budget)
        except CellBudgetError as exc:
            raise UsageError(str(exc)) from exc
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if cfg.format == "text":
            emit(cfg, f"area {area(d)}\nboundary {d.boundary}\n")
        else:
            emit(cfg, d.dumps())
        return EXIT_OK
    d = _load_diagram(args.file)
    if args.action == "validate":
        word = parse_word(args.word, d.presentation) if args.word else None
        report = validate(d, word)
        if cfg.format == "json":
            emit(cfg, dumps(report.to_json()))
        else:
            emit(cfg, str(report) + f"\n{'valid' if report.ok else 'invalid'}\n")
        return EXIT_OK if report.ok else EXIT_ABSENT
    try:
        annuli = t_annuli(d)
    except (InvalidDiagramError, AnnulusError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ABSENT
    rows = [{"cells": list(a.cells), "inner": a.inner_boundary_word.to_json(),
             "outer": a.outer_boundary_word.to_json()} for a in annuli]
    if cfg.format == "json":
        emit(cfg, dumps({"annuli": rows}))
    else:
        lines = [f"{len(annuli)} t-annuli"]
        for k, a in enumerate(annuli):
            lines.append(f"annulus {k}: cells {list(a.cells)} inner {a.inner_boundary_word} "
                         f"outer {a.outer_boundary_word}")
        emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_tietze(args, cfg: RunConfig) -> int:
    if args.action == "trivialize":
        try:
            ops = standard_trivialization_sequence(args.n)
            start = Q(args.n)
        except ParameterError as exc:
            raise UsageError(str(exc)) from exc
    else:
        start = load_presentation(args) if (args.presentation or args.family) else None
        if start is None:
            raise UsageError("tietze replay needs --presentation or --family/--n")
        if not args.ops:
            raise UsageError("tietze replay needs --ops FILE")
        ops = [op_from_json(o) for o in _read_json(args.ops, "ops")]
    try:
        balanced = all(q.is_balanced() == start.is_balanced() for q in replay_prefixes(start, ops))
        final = apply_sequence(start, ops)
    except OperationError as exc:
        raise UsageError(f"operation failed: {exc}") from exc
    n = start.family[1] if start.family else len(start.alphabet) - 1
    try:
        target = T(n)
        matches = presentations_equal(final, target)
    except ParameterError:
        matches = False
    write_file(getattr(args, "ops_out", None), [op_to_json(o) for o in ops])
    if cfg.format == "json":
        emit(cfg, dumps({"ops": len(ops), "final": final.to_json(),
                         "balanced_throughout": balanced, f"matches_T({n})": matches}))
    else:
        emit(cfg, f"ops {len(ops)}\nfinal {final}\nbalanced throughout: {str(balanced).lower()}\n"
                  f"matches T({n}): {str(matches).lower()}\n")
    return EXIT_OK


def _m_range(text: str) -> range:
    m = re.fullmatch(r"(\d+)(?:\.\.(\d+))?", text.strip())
    if not m:
        raise UsageError(f"--m-range {text!r}: expected A..B or A")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    return range(lo, hi + 1)


def cmd_report(args, cfg: RunConfig) -> int:
    if args.kind == "scaling":
        rng = range(0) if args.m_range == "" else _m_range(args.m_range)
        if any(m < 1 for m in rng):
            raise UsageError("m must be >= 1")
        try:
            rows = scaling_report("w_words", rng, cfg.caps, oracle_max_m=args.oracle_max_m,
                                  cell_budget=cfg.cell_budget, **cfg.search_kw)
        except CellBudgetError as exc:
            raise UsageError(str(exc)) from exc
    else:
        p = load_presentation(args)
        rows = dehn_profile(p, args.L, cfg.caps, **cfg.search_kw)
    if cfg.format == "json":
        emit(cfg, rows_to_json(rows))
    else:
        emit(cfg, rows_to_csv(rows))
    return EXIT_OK


# -- parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("settings")
    g.add_argument("--caps-max-len", dest="caps_max_len", type=_positive)
    g.add_argument("--caps-max-cost", dest="caps_max_cost", type=_positive)
    g.add_argument("--caps-max-states", dest="caps_max_states", type=_positive)
    g.add_argument("--bit-cap", dest="bit_cap", type=_positive)
    g.add_argument("--cell-budget", dest="cell_budget", type=_positive)
    g.add_argument("--format", choices=("json", "csv", "text"))
    g.add_argument("--out")
    g.add_argument("--config")
    g.add_argument("--backend", choices=("numba", "numpy"))
    g.add_argument("--parallel", action="store_const", const=True)

    def pres_args(sp):
        sp.add_argument("--presentation", help="presentation JSON file")
        sp.add_argument("--family", choices=("G", "P", "Q", "T"))
        sp.add_argument("--n", type=int)

    def word_args(sp):
        sp.add_argument("--word", help="JSON array, w1 / v2 / g:n:k, or text like 'x2 x1^-1'")
        sp.add_argument("--word-file")

    parser = _Parser(prog="vankampen", description="Presentations, word problems, "
                     "van Kampen diagrams and brute-force area oracles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("gen", parents=[common], help="generate a presentation or word")
    sp.add_argument("family", choices=("G", "P", "Q", "T", "w", "g", "v"))
    sp.add_argument("params", type=int, nargs="+")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("wp", parents=[common], help="decide the word problem")
    pres_args(sp)
    word_args(sp)
    sp.set_defaults(func=cmd_wp)

    for name, func, what in (("area", cmd_area, "least relator insertions"),
                             ("fill", cmd_fill, "least peak length")):
        sp = sub.add_parser(name, parents=[common], help=f"brute-force {what}")
        pres_args(sp)
        word_args(sp)
        sp.add_argument("--witness", help="write the null sequence JSON here")
        sp.set_defaults(func=func)

    sp = sub.add_parser("diagram", parents=[common], help="build, validate or decompose diagrams")
    dsub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = dsub.add_parser("build", parents=[common])
    b.add_argument("kind", choices=("power", "w", "xn"))
    b.add_argument("m", type=int)
    b.set_defaults(func=cmd_diagram)
    v = dsub.add_parser("validate", parents=[common])
    v.add_argument("file")
    v.add_argument("--word")
    v.set_defaults(func=cmd_diagram)
    a = dsub.add_parser("annuli", parents=[common])
    a.add_argument("file")
    a.set_defaults(func=cmd_diagram)

    sp = sub.add_parser("tietze", parents=[common], help="elementary operation sequences")
    tsub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    t = tsub.add_parser("trivialize", parents=[common])
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--ops-out")
    t.set_defaults(func=cmd_tietze)
    r = tsub.add_parser("replay", parents=[common])
    pres_args(r)
    r.add_argument("--ops")
    r.set_defaults(func=cmd_tietze)

    sp = sub.add_parser("report", parents=[common], help="tables")
    rsub = sp.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    s = rsub.add_parser("scaling", parents=[common])
    s.add_argument("--m-range", default="1..3")
    s.add_argument("--oracle-max-m", type=int, default=3)
    s.set_defaults(func=cmd_report)
    dp = rsub.add_parser("dehn-profile", parents=[common])
    pres_args(dp)
    dp.add_argument("--L", type=int, required=True)
    dp.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ParameterError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

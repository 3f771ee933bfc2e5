"""Command-line driver: single-shot, control-script, and incremental modes.

Model output format: an ``Answer: <i>`` line, the shown atoms sorted
lexicographically on one line, an ``Optimization:`` line after improving
models, and a final ``SATISFIABLE`` / ``UNSATISFIABLE`` / ``OPTIMUM FOUND``
(or ``INTERRUPTED``) verdict.  Exit codes: 10 satisfiable, 20 unsatisfiable,
0 interrupted, 65 input or script error.
"""

from __future__ import annotations

import argparse
import signal
import sys
from dataclasses import dataclass, field
from typing import Optional

from .control import Engine
from .errors import MissingSubprogramError, MshotError, ScriptError
from .solver import Mode, SolveStatus
from .syntax import Atom, Integer, Symbol, atom_from_term, parse_term

__all__ = ["CliConfig", "ModelPrinter", "run_default", "run_script", "run_inc", "main"]

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_OTHER = 0
EXIT_INPUT_ERROR = 65

_ENUM = {
    "first": Mode.FIRST,
    "all": Mode.ALL,
    "intersection": Mode.INTERSECTION,
    "union": Mode.UNION,
}


@dataclass
class CliConfig:
    files: list = field(default_factory=list)
    mode: str = "default"  # default | inc (script mode via script=...)
    script: Optional[str] = None
    consts: dict = field(default_factory=dict)
    models: Optional[int] = None
    enum: Optional[str] = None
    seed: Optional[int] = None
    istop: Optional[str] = None
    iinit: Optional[int] = None
    imax: Optional[int] = None
    parts: tuple = ("base", "cumulative", "query")
    dump_ground: bool = False
    verbosity: int = 0


class ModelPrinter:
    """Prints models and verdicts in the standard output format."""

    def __init__(self, out=None):
        self.out = out if out is not None else sys.stdout

    def on_model(self, model):
        print(f"Answer: {model.index}", file=self.out)
        print(model.shown_text(), file=self.out)
        if model.cost:
            print(f"Optimization: {model.cost}", file=self.out)

    def finish(self, result):
        if result.status is SolveStatus.INTERRUPTED:
            print("INTERRUPTED", file=self.out)
        elif result.status is SolveStatus.UNSAT:
            print("UNSATISFIABLE", file=self.out)
        elif result.optimum is not None:
            print("OPTIMUM FOUND", file=self.out)
        else:
            print("SATISFIABLE", file=self.out)

    def exit_code(self, result):
        if result.status is SolveStatus.SAT:
            return EXIT_SAT
        if result.status is SolveStatus.UNSAT:
            return EXIT_UNSAT
        return EXIT_OTHER


class _Dumper:
    """Prints newly grounded units before each solve when requested."""

    def __init__(self, engine, out, enabled):
        self.engine = engine
        self.out = out
        self.enabled = enabled
        self.seen = 0

    def flush_and_dump(self):
        self.engine.flush()
        units = self.engine.units
        if self.enabled and len(units) > self.seen:
            self.out.write(self.engine.dump(units[self.seen :]))
        self.seen = len(units)


_active_engine = None  # SIGINT cancels the solve of the engine driving the CLI


def build_engine(config: CliConfig) -> Engine:
    global _active_engine
    consts = {name: parse_term(text) for name, text in config.consts.items()}
    engine = Engine(constants=consts)
    _active_engine = engine
    for path in config.files:
        engine.load(path)
    conf_bits = []
    if config.models is not None:
        conf_bits.append(f"models={config.models}")
    if config.enum is not None:
        conf_bits.append(f"enum-mode={config.enum}")
    if config.seed is not None:
        conf_bits.append(f"seed={config.seed}")
    if conf_bits:
        engine.set_conf(" ".join(conf_bits))
    return engine


def run_default(config: CliConfig, out=None) -> int:
    """Ground and solve the base subprogram only."""
    out = out if out is not None else sys.stdout
    printer = ModelPrinter(out)
    engine = build_engine(config)
    dumper = _Dumper(engine, out, config.dump_ground)
    engine.ground("base", [])
    dumper.flush_and_dump()
    result = engine.solve(on_model=printer.on_model)
    printer.finish(result)
    return printer.exit_code(result)


# ---------------------------------------------------------------------------
# Control scripts
# ---------------------------------------------------------------------------

def _parse_ground_target(text, lineno):
    text = text.strip()
    if "(" in text:
        term = parse_term(text)
        atom = atom_from_term(term)
        return atom.name, list(atom.args)
    if not text:
        raise ScriptError(lineno, "ground needs a subprogram name")
    return text, []


def _parse_solve_options(tokens, lineno):
    mode = None
    limit = None
    for token in tokens:
        if "=" not in token:
            raise ScriptError(lineno, f"malformed solve option '{token}'")
        key, value = token.split("=", 1)
        if key == "models":
            try:
                limit = int(value)
            except ValueError:
                raise ScriptError(lineno, f"models expects an integer, got '{value}'")
        elif key == "enum":
            if value not in _ENUM:
                raise ScriptError(lineno, f"unknown enumeration mode '{value}'")
            mode = _ENUM[value]
        else:
            raise ScriptError(lineno, f"unknown solve option '{key}'")
    if mode is None and limit is not None:
        mode = Mode.FIRST if limit == 1 else Mode.ALL
    return mode, limit


def run_script(config: CliConfig, out=None) -> int:
    """Execute the control script against one engine over the input files."""
    out = out if out is not None else sys.stdout
    printer = ModelPrinter(out)
    engine = build_engine(config)
    dumper = _Dumper(engine, out, config.dump_ground)
    with open(config.script, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()

    exit_code = EXIT_OTHER
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        command, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if command == "ground":
                name, args = _parse_ground_target(rest, lineno)
                engine.ground(name, args)
            elif command == "assign":
                parts = rest.rsplit(None, 1)
                if len(parts) != 2 or parts[1] not in ("true", "false"):
                    raise ScriptError(lineno, "usage: assign <atom> <true|false>")
                engine.assign_external(parts[0], parts[1] == "true")
            elif command == "release":
                engine.release_external(rest)
            elif command == "solve":
                mode, limit = _parse_solve_options(rest.split(), lineno)
                dumper.flush_and_dump()
                result = engine.solve(on_model=printer.on_model, mode=mode, limit=limit)
                printer.finish(result)
                exit_code = printer.exit_code(result)
            elif command == "add":
                if not rest.endswith("<<END"):
                    raise ScriptError(lineno, "usage: add <name>[(params)] <<END ... END")
                target = rest[: -len("<<END")].strip()
                params = []
                if "(" in target:
                    name, _, plist = target.partition("(")
                    params = [p.strip() for p in plist.rstrip(")").split(",") if p.strip()]
                else:
                    name = target
                body = []
                while i < len(lines) and lines[i].strip() != "END":
                    body.append(lines[i])
                    i += 1
                if i >= len(lines):
                    raise ScriptError(lineno, "unterminated add block (missing END)")
                i += 1
                engine.add(name, params, "\n".join(body))
            elif command == "conf":
                tokens = rest.split()
                replace = bool(tokens) and tokens[-1] == "replace"
                if replace:
                    tokens = tokens[:-1]
                engine.set_conf(" ".join(tokens), replace=replace)
            elif command == "stats":
                s = engine.get_stats()
                print(
                    f"Stats: choices={s.choices} conflicts={s.conflicts} "
                    f"restarts={s.restarts} models={s.models_found} "
                    f"rules={s.rules_ground} atoms={s.atoms} calls={s.solve_calls}",
                    file=out,
                )
            else:
                raise ScriptError(lineno, f"unknown command '{command}'")
        except ScriptError:
            raise
        except MshotError as exc:
            raise ScriptError(lineno, str(exc)) from exc
    return exit_code


# ---------------------------------------------------------------------------
# Incremental mode
# ---------------------------------------------------------------------------

def _const_symbol(engine, name):
    value = engine.constants.get(name)
    if isinstance(value, Symbol):
        return value.name
    if isinstance(value, Integer):
        return value.value
    return None


def run_inc(
    config: CliConfig,
    istop: Optional[str] = None,
    iinit: Optional[int] = None,
    imax: Optional[int] = None,
    out=None,
) -> int:
    """Iterative-deepening driver over base/cumulative(t)/query(t).

    Grounds ``base`` once, then per step grounds the cumulative part,
    assigns the step's query atom true, and solves; when the status matches
    the stop criterion the step is reported, otherwise the query atom is
    permanently falsified and the horizon grows.
    """
    out = out if out is not None else sys.stdout
    printer = ModelPrinter(out)
    engine = build_engine(config)
    dumper = _Dumper(engine, out, config.dump_ground)

    base_name, cum_name, query_name = config.parts
    if (base_name, 0) not in engine.subprograms():
        raise MissingSubprogramError(f"incremental mode requires subprogram {base_name}/0")
    if (cum_name, 1) not in engine.subprograms():
        raise MissingSubprogramError(f"incremental mode requires subprogram {cum_name}/1")

    istop = istop if istop is not None else config.istop
    if istop is None:
        istop = str(_const_symbol(engine, "istop") or "sat")
    istop = istop.lower()
    if istop not in ("sat", "unsat"):
        raise MshotError(f"istop must be 'sat' or 'unsat', got '{istop}'")
    iinit = iinit if iinit is not None else config.iinit
    if iinit is None:
        value = _const_symbol(engine, "iinit")
        iinit = value if isinstance(value, int) else 1
    imax = imax if imax is not None else config.imax
    if imax is None:
        value = _const_symbol(engine, "imax")
        imax = value if isinstance(value, int) else None

    want = SolveStatus.SAT if istop == "sat" else SolveStatus.UNSAT

    engine.ground(base_name, [])
    step = iinit
    result = None
    while True:
        if imax is not None and step > imax:
            step -= 1
            break
        engine.ground(cum_name, [Integer(step)])
        query = Atom(query_name, (Integer(step),))
        engine.assign_external(query, True)
        dumper.flush_and_dump()
        result = engine.solve(on_model=printer.on_model)
        printer.finish(result)
        if result.status is want or result.status is SolveStatus.INTERRUPTED:
            break
        engine.release_external(query)
        step += 1
    print(f"Step: {step}", file=out)
    if result is None:
        return EXIT_OTHER
    return printer.exit_code(result)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mshot",
        description="Multi-shot answer set solver with parameterized subprograms.",
    )
    parser.add_argument("files", nargs="*", help="logic program files")
    parser.add_argument("--mode", choices=["default", "inc"], default="default")
    parser.add_argument("--script", metavar="FILE", help="run a control script")
    parser.add_argument(
        "--const",
        action="append",
        default=[],
        metavar="NAME=TERM",
        help="override a program constant (repeatable)",
    )
    parser.add_argument("--models", type=int, metavar="N", help="model limit (0 = all)")
    parser.add_argument("--enum", choices=["first", "all", "intersection", "union"])
    parser.add_argument("--seed", type=int, metavar="N")
    parser.add_argument("--istop", choices=["sat", "unsat"])
    parser.add_argument("--iinit", type=int, metavar="N")
    parser.add_argument("--imax", type=int, metavar="N")
    parser.add_argument(
        "--parts",
        metavar="BASE,CUMULATIVE,QUERY",
        help="rename the incremental-mode subprograms",
    )
    parser.add_argument("--dump-ground", action="store_true")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _config_from_args(args) -> CliConfig:
    consts = {}
    for item in args.const:
        if "=" not in item:
            raise MshotError(f"--const expects NAME=TERM, got '{item}'")
        name, text = item.split("=", 1)
        consts[name] = text
    parts = ("base", "cumulative", "query")
    if args.parts:
        pieces = tuple(p.strip() for p in args.parts.split(","))
        if len(pieces) != 3 or not all(pieces):
            raise MshotError("--parts expects three comma-separated names")
        parts = pieces
    return CliConfig(
        files=args.files,
        mode=args.mode,
        script=args.script,
        consts=consts,
        models=args.models,
        enum=args.enum,
        seed=args.seed,
        istop=args.istop,
        iinit=args.iinit,
        imax=args.imax,
        parts=parts,
        dump_ground=args.dump_ground,
        verbosity=args.verbose,
    )


def _on_sigint(*_):
    if _active_engine is not None:
        _active_engine.interrupt()


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        try:
            signal.signal(signal.SIGINT, _on_sigint)
        except ValueError:
            pass  # not on the main thread
        if config.script:
            return run_script(config)
        if config.mode == "inc":
            return run_inc(config)
        return run_default(config)
    except (MshotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())

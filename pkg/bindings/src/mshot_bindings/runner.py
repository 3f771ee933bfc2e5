"""Run a user script's ``main(prg)`` against input files.

Equivalent of the core CLI in binding mode: the script gets a
:class:`~mshot_bindings.BoundEngine` whose solves print models exactly like
the ``mshot`` executable, so scripted control loops produce the same
listings as the built-in drivers.
"""

from __future__ import annotations

import argparse
import runpy
import sys

from mshot.cli import EXIT_INPUT_ERROR, EXIT_OTHER, EXIT_SAT, EXIT_UNSAT
from mshot.errors import MshotError, ScriptError
from mshot.solver import SolveStatus
from mshot.syntax import parse_term

from . import BoundEngine


def bind_main(script_path, files=(), consts=None, out=None) -> int:
    """Execute the script's ``main`` with an engine over ``files``.

    Returns the exit status of the last solve (10/20/0); host-language
    exceptions raised by the script propagate to the caller.
    """
    namespace = runpy.run_path(str(script_path))
    entry = namespace.get("main")
    if not callable(entry):
        raise ScriptError(0, f"{script_path} defines no main(prg) routine")
    constants = {name: parse_term(text) for name, text in (consts or {}).items()}
    prg = BoundEngine(files=files, constants=constants, echo=True, out=out)
    entry(prg)
    result = prg.last_result
    if result is None:
        return EXIT_OTHER
    if result.status is SolveStatus.SAT:
        return EXIT_SAT
    if result.status is SolveStatus.UNSAT:
        return EXIT_UNSAT
    return EXIT_OTHER


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mshot-bind",
        description="Run a Python control script (defining main(prg)) over "
        "logic program files.",
    )
    parser.add_argument("script", help="Python file defining main(prg)")
    parser.add_argument("files", nargs="*", help="logic program files")
    parser.add_argument(
        "--const", action="append", default=[], metavar="NAME=TERM"
    )
    args = parser.parse_args(argv)
    consts = {}
    for item in args.const:
        if "=" not in item:
            print(f"error: --const expects NAME=TERM, got '{item}'", file=sys.stderr)
            return EXIT_INPUT_ERROR
        name, text = item.split("=", 1)
        consts[name] = text
    try:
        return bind_main(args.script, args.files, consts)
    except MshotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""The engine object tying parsing, grounding, the store, and the solver.

Grounding requests are queued and only take effect at the next flush, which
a solve (or an external assignment) triggers: each queued request is
substituted, instantiated jointly with the others against a shared
possible-atom view, and joined into the store as its own increment, in queue
order.  Truth values of declared external atoms can be assigned or released
between solves; per-call assumptions are restricted to declared externals.
"""

from __future__ import annotations

import dataclasses
import threading
import warnings
from dataclasses import dataclass
from typing import Optional

from .errors import (
    ShadowedConstWarning,
    SolveAlreadyRunningError,
    UnknownOptionError,
    UnknownSubprogramError,
)
from . import grounder, solver, syntax
from .grounder import Instantiator, dump_ground
from .solver import CancelToken, Mode, SolveResult, Statistics
from .store import ProgramStore
from .syntax import Atom, SubprogramDef, parse_program, parse_term

__all__ = ["Config", "Engine", "SolveHandle"]

_ENUM_MODES = {
    "first": Mode.FIRST,
    "all": Mode.ALL,
    "intersection": Mode.INTERSECTION,
    "union": Mode.UNION,
}

_DEFAULTS = {"models": 1, "restarts": 128, "seed": 0, "enum-mode": None}


@dataclass
class Config:
    models: int = 1
    restarts: int = 128
    seed: int = 0
    enum_mode: Optional[str] = None
    models_set: bool = False  # user configured a model count explicitly

    def reset(self):
        self.models = 1
        self.restarts = 128
        self.seed = 0
        self.enum_mode = None
        self.models_set = False


class SolveHandle:
    """Handle on a background solve: wait, cancel, fetch the result."""

    def __init__(self, token: CancelToken):
        self._token = token
        self._done = threading.Event()
        self._result = None
        self._error = None

    def cancel(self):
        self._token.cancel()

    def wait(self, timeout=None) -> bool:
        return self._done.wait(timeout)

    def result(self) -> SolveResult:
        self._done.wait()
        if self._error is not None:
            raise self._error
        return self._result

    def _finish(self, result, error):
        self._result = result
        self._error = error
        self._done.set()


class Engine:
    """Multi-shot control object over one evolving program state."""

    def __init__(self, text: Optional[str] = None, constants: Optional[dict] = None):
        self._defs = {}
        self._constants = {}
        self._const_overrides = dict(constants or {})
        self._store = ProgramStore()
        self._units = []
        self._queue = []
        self._config = Config()
        self._stats = Statistics()
        self._lock = threading.RLock()
        self._handle = None
        self._token = None
        self._register(parse_program(""))
        if text is not None:
            self.add_source(text)

    # -- program input -----------------------------------------------------

    def load(self, path) -> None:
        with open(path, "r", encoding="utf-8") as handle:
            self.add_source(handle.read())

    def add_source(self, text: str) -> None:
        """Parse and register program text (statements outside any
        ``#program`` directive extend ``base``)."""
        self._check_idle()
        defs = parse_program(text)
        self._validate(defs)
        self._register(defs)

    def add(self, name: str, params, text: str) -> None:
        """Append statements to the named subprogram, creating it if new."""
        self._check_idle()
        params = tuple(params)
        defs = parse_program(text)
        self._validate(defs)
        # Unattributed statements go to (name, params); explicit #program
        # blocks inside the text register as usual.
        merged = []
        for sub in defs:
            if sub.key == ("base", 0):
                merged.append(SubprogramDef(name, params, sub.statements))
            else:
                merged.append(sub)
        self._register(merged)

    def _validate(self, defs):
        for sub in defs:
            for stmt in sub.statements:
                if isinstance(stmt, syntax.Rule):
                    syntax.check_safety(stmt)
                else:
                    syntax.check_directive_safety(stmt)

    def _register(self, defs):
        for sub in defs:
            existing = self._defs.get(sub.key)
            if existing is None:
                self._defs[sub.key] = SubprogramDef(
                    sub.name, sub.params, list(sub.statements)
                )
            else:
                if existing.params != sub.params:
                    mapping = {
                        p: syntax.Symbol(q)
                        for p, q in zip(sub.params, existing.params)
                    }
                    existing.statements.extend(
                        syntax.substitute_symbols(s, mapping) for s in sub.statements
                    )
                else:
                    existing.statements.extend(sub.statements)
            for stmt in sub.statements:
                if isinstance(stmt, syntax.ConstDef):
                    self._constants.setdefault(stmt.name, stmt.value)

    @property
    def constants(self):
        merged = dict(self._constants)
        merged.update(self._const_overrides)
        return merged

    def subprograms(self):
        return list(self._defs)

    # -- grounding -----------------------------------------------------------

    def ground(self, name: str, args=()) -> None:
        """Queue one instantiation request; grounding happens at the next
        flush or solve."""
        self._check_idle()
        args = tuple(self._coerce_term(a) for a in args)
        if (name, len(args)) not in self._defs:
            raise UnknownSubprogramError(name, len(args))
        self._queue.append((name, args))

    def flush(self) -> None:
        """Instantiate all queued requests jointly and join them in order."""
        self._check_idle()
        if not self._queue:
            return
        requests, self._queue = self._queue, []
        consts = self.constants
        substituted = []
        for name, args in requests:
            sub = self._defs[(name, len(args))]
            for param in sub.params:
                if param in consts:
                    warnings.warn(
                        f"parameter '{param}' of {name}/{len(sub.params)} shadows "
                        f"a constant of the same name",
                        ShadowedConstWarning,
                        stacklevel=3,
                    )
            args = tuple(
                syntax.substitute_symbols(a, consts) if consts else a for a in args
            )
            resolved = grounder.substitute_params(sub, args)
            remaining = {k: v for k, v in consts.items() if k not in sub.params}
            if remaining:
                resolved = SubprogramDef(
                    resolved.name,
                    (),
                    [syntax.substitute_symbols(s, remaining) for s in resolved.statements],
                )
            substituted.append(resolved)

        inst = Instantiator(
            self._store.atoms,
            self._store.possible,
            self._store.facts,
            next_tag=self._store.next_tag,
            warn=lambda category, message: warnings.warn(message, category, stacklevel=2),
        )
        units = inst.run(substituted)
        try:
            for unit in units:
                self._store.join_module(unit)
                self._units.append(unit)
        finally:
            self._stats.rules_ground = self._store.num_rules()
            self._stats.atoms = len(self._store.atoms)

    def dump(self, units=None) -> str:
        """Ground-program listing; defaults to everything joined so far."""
        return dump_ground(self._units if units is None else units)

    @property
    def units(self):
        return list(self._units)

    # -- externals ---------------------------------------------------------------

    def assign_external(self, atom, value: bool) -> None:
        """Assign a free input atom; flushes pending grounding first so the
        assignment observes the post-flush state."""
        self._check_idle()
        self.flush()
        self._store.assign_external(self._coerce_atom(atom), value)

    def release_external(self, atom) -> None:
        """Permanently falsify a free input atom."""
        self._check_idle()
        self.flush()
        self._store.release_external(self._coerce_atom(atom))

    # -- solving --------------------------------------------------------------------

    def solve(
        self,
        on_model=None,
        assumptions=(),
        mode: Optional[Mode] = None,
        limit: Optional[int] = None,
    ) -> SolveResult:
        """Flush pending grounding, then search the accumulated program."""
        self._check_idle()
        with self._lock:
            program, eff_mode, eff_limit, token = self._prepare(assumptions, mode, limit)
            self._token = token
            return solver.solve(
                program,
                on_model=on_model,
                mode=eff_mode,
                limit=eff_limit,
                cancel=token,
                stats=self._stats,
                seed=self._config.seed,
                restart_base=self._config.restarts,
            )

    def asolve(self, on_model=None, mode: Optional[Mode] = None, limit=None) -> SolveHandle:
        """Run the search in a background thread; mutations are rejected
        until the returned handle completes."""
        self._check_idle()
        program, eff_mode, eff_limit, token = self._prepare((), mode, limit)
        handle = SolveHandle(token)
        self._handle = handle
        self._token = token

        def work():
            result, error = None, None
            try:
                result = solver.solve(
                    program,
                    on_model=on_model,
                    mode=eff_mode,
                    limit=eff_limit,
                    cancel=token,
                    stats=self._stats,
                    seed=self._config.seed,
                    restart_base=self._config.restarts,
                )
            except BaseException as exc:  # surfaces via handle.result()
                error = exc
            finally:
                self._handle = None
                handle._finish(result, error)

        thread = threading.Thread(target=work, name="mshot-solve", daemon=True)
        thread.start()
        return handle

    def interrupt(self) -> None:
        """Cancel the running solve, if any."""
        if self._token is not None:
            self._token.cancel()

    def _prepare(self, assumptions, mode, limit):
        self.flush()
        extra = [(self._coerce_atom(a), bool(v)) for a, v in assumptions]
        program = self._store.snapshot(extra)
        if mode is None:
            if self._config.enum_mode is not None:
                eff_mode = _ENUM_MODES[self._config.enum_mode]
            else:
                eff_mode = Mode.FIRST if self._config.models == 1 else Mode.ALL
            if limit is not None:
                eff_limit = limit or None
            elif not self._config.models_set and (
                program.objective or eff_mode in (Mode.INTERSECTION, Mode.UNION)
            ):
                # With no explicit model count, optimization runs to the
                # proven optimum and set-operation modes see every model.
                eff_limit = None
            else:
                eff_limit = self._config.models or None
        else:
            eff_mode = mode
            eff_limit = limit or None
        return program, eff_mode, eff_limit, CancelToken()

    # -- configuration and stats -------------------------------------------------------

    def set_conf(self, options: str, replace: bool = False) -> None:
        """Apply ``key=value`` configuration pairs, optionally from defaults."""
        pairs = []
        for token in options.split():
            if "=" not in token:
                raise UnknownOptionError(token, f"malformed option '{token}'")
            key, value = token.split("=", 1)
            if key not in _DEFAULTS:
                raise UnknownOptionError(key)
            pairs.append((key, value))
        staged = dataclasses.replace(self._config)
        if replace:
            staged.reset()
        for key, value in pairs:
            if key == "enum-mode":
                if value not in _ENUM_MODES:
                    raise UnknownOptionError(key, f"invalid enum-mode '{value}'")
                staged.enum_mode = value
            else:
                try:
                    number = int(value)
                except ValueError:
                    raise UnknownOptionError(key, f"option '{key}' expects an integer")
                if key == "models":
                    if number < 0:
                        raise UnknownOptionError(key, "models must be >= 0")
                    staged.models = number
                    staged.models_set = True
                elif key == "restarts":
                    if number <= 0:
                        raise UnknownOptionError(key, "restarts must be positive")
                    staged.restarts = number
                else:
                    staged.seed = number
        self._config = staged

    @property
    def config(self) -> Config:
        return self._config

    def get_stats(self) -> Statistics:
        return self._stats.copy()

    @property
    def store(self) -> ProgramStore:
        return self._store

    # -- helpers -----------------------------------------------------------------

    def _check_idle(self):
        if self._handle is not None:
            raise SolveAlreadyRunningError("a background solve is in progress")

    @staticmethod
    def _coerce_term(value):
        if isinstance(value, str):
            return parse_term(value)
        if isinstance(value, int):
            return syntax.Integer(value)
        return value

    def _coerce_atom(self, atom):
        if isinstance(atom, Atom):
            return atom
        if isinstance(atom, str):
            return syntax.atom_from_term(parse_term(atom))
        return syntax.atom_from_term(atom)

"""Scripting bindings over the mshot engine.

A :class:`BoundEngine` wraps the engine so control loops and ``on_model``
callbacks can be written as plain Python functions, mirroring the scripted
``main(prg)`` style::

    def main(prg):
        prg.ground("base", [])
        prg.solve()

Model objects handed to callbacks are views valid only for the duration of
the callback; call :meth:`ModelView.copy` to retain one.  Engine errors
surface unchanged (the same exception types the core raises); two extra
types are binding-specific: ``UseAfterCallbackError`` and ``EngineBusyError``.
"""

from __future__ import annotations

import sys
from typing import Optional

from mshot import Engine, Mode, SolveResult
from mshot.cli import ModelPrinter
from mshot.errors import MshotError
from mshot.solver import CostVector

__all__ = [
    "BoundEngine",
    "ModelView",
    "UseAfterCallbackError",
    "EngineBusyError",
]

_MODES = {m.value: m for m in Mode}


class UseAfterCallbackError(MshotError):
    """A model view was used after its callback returned."""


class EngineBusyError(MshotError):
    """A callback re-entered the engine with a mutating call."""


class ModelView:
    """Window onto one stable model, live only inside the callback."""

    def __init__(self, model, persistent=False):
        self._model = model
        self._valid = True
        self._persistent = persistent

    def _live(self):
        if not self._valid and not self._persistent:
            raise UseAfterCallbackError(
                "model accessed after its callback returned; use copy() to retain it"
            )
        return self._model

    def atoms(self):
        """Shown atoms of the model, sorted."""
        return list(self._live().shown_atoms)

    def contains(self, atom) -> bool:
        model = self._live()
        if isinstance(atom, str):
            return atom in {str(a) for a in model.shown_atoms}
        return atom in set(model.shown_atoms)

    def cost(self) -> CostVector:
        return self._live().cost

    @property
    def index(self) -> int:
        return self._live().index

    def copy(self) -> "ModelView":
        """Detached snapshot that stays valid after the callback."""
        return ModelView(self._live(), persistent=True)

    def __contains__(self, atom):
        return self.contains(atom)

    def __str__(self):
        return self._live().shown_text()


class BoundEngine:
    """Engine wrapper whose operations match the control API one to one."""

    def __init__(self, files=(), text: Optional[str] = None, constants=None,
                 echo=False, out=None):
        self._engine = Engine(constants=constants)
        for path in files:
            self._engine.load(path)
        if text is not None:
            self._engine.add_source(text)
        self._printer = ModelPrinter(out if out is not None else sys.stdout)
        self._echo = echo
        self._in_callback = False
        self.last_result: Optional[SolveResult] = None

    # -- program assembly ---------------------------------------------------

    def ground(self, name, args=()):
        self._guard()
        self._engine.ground(name, args)

    def add(self, name, params, text):
        self._guard()
        self._engine.add(name, params, text)

    def assign_external(self, atom, value):
        self._guard()
        self._engine.assign_external(atom, value)

    def release_external(self, atom):
        self._guard()
        self._engine.release_external(atom)

    def set_conf(self, options, replace=False):
        self._guard()
        self._engine.set_conf(options, replace)

    def get_stats(self):
        return self._engine.get_stats()

    def get_const(self, name, default=None):
        """Program constant as a plain int or string, or ``default``."""
        term = self._engine.constants.get(name)
        if term is None:
            return default
        value = getattr(term, "value", None)
        if value is not None:
            return value
        return getattr(term, "name", default)

    # -- solving ---------------------------------------------------------------

    def solve(self, on_model=None, assumptions=(), mode=None, limit=None) -> SolveResult:
        self._guard()
        result = self._engine.solve(
            on_model=self._wrap(on_model),
            assumptions=assumptions,
            mode=self._mode(mode),
            limit=limit,
        )
        self._finish(result)
        return result

    def asolve(self, on_model=None, mode=None, limit=None):
        self._guard()
        handle = self._engine.asolve(
            on_model=self._wrap(on_model), mode=self._mode(mode), limit=limit
        )
        return _BoundHandle(self, handle)

    def interrupt(self):
        self._engine.interrupt()

    # -- internals ------------------------------------------------------------------

    @staticmethod
    def _mode(mode):
        if isinstance(mode, str):
            try:
                return _MODES[mode]
            except KeyError:
                raise MshotError(f"unknown enumeration mode '{mode}'") from None
        return mode

    def _guard(self):
        if self._in_callback:
            raise EngineBusyError("engine call from inside an on_model callback")

    def _wrap(self, on_model):
        def deliver(model):
            if self._echo:
                self._printer.on_model(model)
            if on_model is None:
                return None
            view = ModelView(model)
            self._in_callback = True
            try:
                return on_model(view)
            finally:
                self._in_callback = False
                view._valid = False

        return deliver

    def _finish(self, result):
        self.last_result = result
        if self._echo:
            self._printer.finish(result)


class _BoundHandle:
    """Background-solve handle: wait, cancel, result."""

    def __init__(self, owner, handle):
        self._owner = owner
        self._handle = handle

    def wait(self, timeout=None):
        return self._handle.wait(timeout)

    def cancel(self):
        self._handle.cancel()

    def result(self) -> SolveResult:
        result = self._handle.result()
        self._owner._finish(result)
        return result

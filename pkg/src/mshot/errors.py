"""Exception and warning types raised across the engine.

Everything user-facing derives from ``MshotError`` so callers can catch one
base class; warnings derive from ``MshotWarning`` and are emitted through the
standard ``warnings`` machinery.
"""


class MshotError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MshotError):
    """Malformed input text; carries the 1-based source position."""

    def __init__(self, line, column, message):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class DuplicateParamError(ParseError):
    """A subprogram declares the same parameter name twice."""

    def __init__(self, line, column, name):
        super().__init__(line, column, f"duplicate subprogram parameter '{name}'")
        self.name = name


class NonGroundTermError(MshotError):
    """A term that must be ground contains a variable."""


class UnsafeVariableError(MshotError):
    """A rule variable is not bound by any positive body literal."""

    def __init__(self, variable, statement=None):
        where = f" in '{statement}'" if statement else ""
        super().__init__(f"unsafe variable '{variable}'{where}")
        self.variable = variable


class ArityMismatchError(MshotError):
    """Argument list length does not match the parameter list."""


class GroundingError(MshotError):
    """Base class for errors during instantiation."""


class GroundArithmeticError(GroundingError):
    """Division by zero, non-integer operand, or 64-bit overflow."""


class RedefinitionError(MshotError):
    """An atom defined in an earlier increment gains a new defining rule."""

    def __init__(self, atom, increment):
        super().__init__(f"atom '{atom}' already defined in increment {increment}")
        self.atom = atom
        self.increment = increment


class CrossIncrementCycleError(MshotError):
    """A positive dependency cycle spans two or more increments."""

    def __init__(self, cycle):
        names = ", ".join(str(a) for a in cycle)
        super().__init__(f"positive cycle across increments: [{names}]")
        self.cycle = tuple(cycle)


class NotExternalError(MshotError):
    """The atom was never declared with an external directive."""


class AlreadyDefinedError(MshotError):
    """The atom has a defining rule and cannot be assigned or released."""


class AlreadyReleasedError(MshotError):
    """The atom was released and is permanently false."""


class UnknownSubprogramError(MshotError):
    """No subprogram with this name and arity exists."""

    def __init__(self, name, arity):
        super().__init__(f"unknown subprogram {name}/{arity}")
        self.name = name
        self.arity = arity


class MissingSubprogramError(MshotError):
    """A required subprogram (incremental mode contract) is absent."""


class SolveAlreadyRunningError(MshotError):
    """The engine has a live background solve; mutation is rejected."""


class UnknownOptionError(MshotError):
    """Unrecognized configuration key or value."""

    def __init__(self, key, message=None):
        super().__init__(message or f"unknown option '{key}'")
        self.key = key


class TooLargeError(MshotError):
    """Exhaustive enumeration refused beyond the supported atom count."""


class ScriptError(MshotError):
    """A control script command failed; carries the script line number."""

    def __init__(self, line, message):
        super().__init__(f"script line {line}: {message}")
        self.line = line
        self.script_message = message


class MshotWarning(UserWarning):
    """Base class for warnings emitted by this package."""


class ConditionNotDomainWarning(MshotWarning):
    """A grounding-time condition references atoms that are not facts."""


class ShadowedConstWarning(MshotWarning):
    """A subprogram parameter shadows a global constant of the same name."""


class ExternalIgnoredWarning(MshotWarning):
    """An external declaration targeted an already defined/released atom."""


class AssignmentDiscardedWarning(MshotWarning):
    """A free external became defined; its pending assignment is dropped."""


class AlreadyReleasedWarning(MshotWarning):
    """Release of an atom that was already released (idempotent)."""

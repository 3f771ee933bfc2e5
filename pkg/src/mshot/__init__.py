"""Multi-shot answer set programming engine.

Programs are split into named, parameterizable subprograms that are grounded
on demand and joined into one evolving ground program; the accumulated
program is solved repeatedly under changing assignments to declared external
(input) atoms, with incremental lexicographic optimization.

Typical use::

    from mshot import Engine

    engine = Engine("a(1). #program acid(k). b(k). #program base. a(2).")
    engine.ground("acid", [42])
    result = engine.solve(on_model=print)
"""

from .control import Config, Engine, SolveHandle
from .errors import (
    AlreadyDefinedError,
    AlreadyReleasedError,
    ArityMismatchError,
    CrossIncrementCycleError,
    DuplicateParamError,
    GroundArithmeticError,
    GroundingError,
    MissingSubprogramError,
    MshotError,
    MshotWarning,
    NonGroundTermError,
    NotExternalError,
    ParseError,
    RedefinitionError,
    ScriptError,
    SolveAlreadyRunningError,
    TooLargeError,
    UnknownOptionError,
    UnknownSubprogramError,
    UnsafeVariableError,
)
from .grounder import AtomTable, GroundRule, GroundUnit, dump_ground, instantiate, substitute_params
from .solver import (
    CancelToken,
    CostVector,
    Mode,
    Model,
    Ordering,
    SolveResult,
    SolveStatus,
    Statistics,
    brute_force_models,
    check_stable,
    compare_costs,
    interrupt,
    solve,
)
from .store import ExternalState, ProgramStore, SolverProgram
from .syntax import (
    Atom,
    AtomLiteral,
    BinOp,
    ChoiceHead,
    Comparison,
    Function,
    Integer,
    Interval,
    Rule,
    SubprogramDef,
    Symbol,
    Variable,
    check_safety,
    parse_program,
    parse_term,
)

__version__ = "0.1.0"

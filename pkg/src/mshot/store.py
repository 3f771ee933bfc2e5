"""The evolving ground program.

The store accumulates ground units as increments and enforces module
composition: an atom defined in an earlier increment gains no new defining
rule, and no positive dependency cycle may span two increments.  It also
tracks the lifecycle of input atoms declared external (free, defined,
released), accumulates the optimization objective, and produces immutable
solver snapshots.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import (
    AlreadyDefinedError,
    AlreadyReleasedError,
    AssignmentDiscardedWarning,
    CrossIncrementCycleError,
    ExternalIgnoredWarning,
    AlreadyReleasedWarning,
    NotExternalError,
    RedefinitionError,
)
from .grounder import AtomTable, GroundChoice, GroundUnit
from .syntax import Atom, atom_str

__all__ = ["AtomTable", "ExternalState", "ProgramStore", "SolverProgram", "IncrementRecord"]


class ExternalState(Enum):
    FREE = "free"
    DEFINED = "defined"
    RELEASED = "released"


@dataclass
class _ExternalInfo:
    state: ExternalState
    value: bool = False  # assigned truth value while FREE


@dataclass
class IncrementRecord:
    tag: int
    defined: list = field(default_factory=list)
    rule_range: tuple = (0, 0)
    external_decls: list = field(default_factory=list)


@dataclass(frozen=True)
class SolverProgram:
    """Immutable view of the accumulated program for one solve call.

    ``assumptions`` fix one literal per free external (plus per-call
    overrides); ``externals`` lists the input atoms exempt from the
    no-rule-means-false treatment; atoms in ``released`` are forced false.
    ``objective`` maps priority levels to (weight, conditions) terms where a
    weight counts once per model if any of its conditions holds.
    """

    rules: tuple
    assumptions: tuple  # of (atom id, bool)
    externals: frozenset
    released: frozenset
    objective: tuple  # of (priority, ((weight, (condition, ...)), ...))
    shown: Optional[frozenset]  # None means: show every table atom
    atom_count: int
    atoms: AtomTable


def _warn(category, message):
    warnings.warn(message, category, stacklevel=3)


class ProgramStore:
    """Single-owner state machine holding the accumulated ground program."""

    def __init__(self):
        self.atoms = AtomTable()
        self.rules = []
        self.increments = []
        self.defined_at = {}  # atom id -> increment tag
        self.externals = {}  # atom id -> _ExternalInfo
        self.released_at = {}  # atom id -> increment tag at release time
        self.objective = {}  # priority -> {tuple key -> [weight, [condition, ...]]}
        self.shown = {}  # ordered set of (name, arity)
        self.show_seen = False
        self.pos_edges = {}  # head atom id -> list of (body atom id, tag)
        # grounding context: (name, arity) -> ordered arg-tuple sets
        self.possible = {}
        self.facts = {}
        self.warn = _warn

    # -- grounding context -------------------------------------------------

    @property
    def next_tag(self):
        return len(self.increments)

    def num_rules(self):
        return len(self.rules)

    # -- module composition ---------------------------------------------------

    def join_module(self, unit: GroundUnit) -> None:
        """Append one ground unit as a new increment.

        Raises ``RedefinitionError`` or ``CrossIncrementCycleError`` before
        any state is modified; a failed join leaves the store unchanged.
        """
        tag = unit.increment_tag
        newly_defined = {}
        for rule in unit.rules:
            for atom_id in rule.head_atoms():
                earlier = self.defined_at.get(atom_id)
                if earlier is not None and earlier != tag:
                    raise RedefinitionError(atom_str(self.atoms.symbol(atom_id)), earlier)
                released = self.released_at.get(atom_id)
                if released is not None:
                    raise RedefinitionError(atom_str(self.atoms.symbol(atom_id)), released)
                newly_defined.setdefault(atom_id, None)

        new_edges = []
        for rule in unit.rules:
            for head in rule.head_atoms():
                for dep in rule.pos:
                    new_edges.append((head, dep))
        self._check_cycles(new_edges, tag)

        # Committed past this point.
        start = len(self.rules)
        self.rules.extend(unit.rules)
        record = IncrementRecord(tag, list(newly_defined), (start, len(self.rules)), [])
        self.increments.append(record)

        for atom_id in newly_defined:
            self.defined_at[atom_id] = tag
            info = self.externals.get(atom_id)
            if info is not None and info.state is ExternalState.FREE:
                info.state = ExternalState.DEFINED
                self.warn(
                    AssignmentDiscardedWarning,
                    f"external atom '{atom_str(self.atoms.symbol(atom_id))}' is now "
                    f"defined by rules; its assignment is discarded",
                )
        for head, dep in new_edges:
            self.pos_edges.setdefault(head, []).append((dep, tag))

        for atom_id in unit.external_decls:
            name = atom_str(self.atoms.symbol(atom_id))
            if atom_id in self.defined_at:
                self.warn(
                    ExternalIgnoredWarning,
                    f"external declaration for defined atom '{name}' ignored",
                )
                continue
            if atom_id in self.released_at:
                self.warn(
                    ExternalIgnoredWarning,
                    f"external declaration for released atom '{name}' ignored",
                )
                continue
            if atom_id not in self.externals:
                self.externals[atom_id] = _ExternalInfo(ExternalState.FREE, False)
            record.external_decls.append(atom_id)

        for entry in unit.minimize_entries:
            level = self.objective.setdefault(entry.priority, {})
            key = entry.terms
            existing = level.get(key)
            if existing is None:
                level[key] = [entry.weight, [entry.condition]]
            elif entry.condition not in existing[1]:
                existing[1].append(entry.condition)

        for sig in unit.shown:
            self.shown[sig] = None
            self.show_seen = True

        self._index_unit(unit)

    def _check_cycles(self, new_edges, tag):
        adjacency = {}
        for head, deps in self.pos_edges.items():
            adjacency[head] = [(d, t) for d, t in deps]
        for head, dep in new_edges:
            adjacency.setdefault(head, []).append((dep, tag))
        for scc in _tarjan(adjacency):
            if len(scc) < 2:
                continue
            members = set(scc)
            tags = set()
            for node in scc:
                for dep, edge_tag in adjacency.get(node, ()):
                    if dep in members:
                        tags.add(edge_tag)
            if len(tags) > 1:
                cycle = [atom_str(self.atoms.symbol(a)) for a in sorted(scc)]
                raise CrossIncrementCycleError(cycle)

    def _index_unit(self, unit):
        for rule in unit.rules:
            head_ids = rule.head_atoms()
            for atom_id in head_ids:
                atom = self.atoms.symbol(atom_id)
                self.possible.setdefault((atom.name, atom.arity), {})[atom.args] = None
            if (
                not isinstance(rule.head, GroundChoice)
                and rule.head is not None
                and not rule.pos
                and not rule.neg
            ):
                atom = self.atoms.symbol(rule.head)
                self.facts.setdefault((atom.name, atom.arity), {})[atom.args] = None
        for atom_id in unit.external_decls:
            atom = self.atoms.symbol(atom_id)
            self.possible.setdefault((atom.name, atom.arity), {})[atom.args] = None

    # -- external lifecycle ------------------------------------------------------

    def _resolve(self, atom):
        atom_id = self.atoms.get(atom) if isinstance(atom, Atom) else atom
        if atom_id is None:
            raise NotExternalError(f"atom '{atom_str(atom)}' was never declared external")
        return atom_id

    def assign_external(self, atom, value: bool) -> None:
        atom_id = self._resolve(atom)
        info = self.externals.get(atom_id)
        name = atom_str(self.atoms.symbol(atom_id))
        if info is None:
            if atom_id in self.defined_at:
                raise AlreadyDefinedError(f"atom '{name}' is defined by rules")
            raise NotExternalError(f"atom '{name}' was never declared external")
        if info.state is ExternalState.DEFINED:
            raise AlreadyDefinedError(f"atom '{name}' is defined by rules")
        if info.state is ExternalState.RELEASED:
            raise AlreadyReleasedError(f"atom '{name}' was released")
        info.value = bool(value)

    def release_external(self, atom) -> None:
        atom_id = self._resolve(atom)
        info = self.externals.get(atom_id)
        name = atom_str(self.atoms.symbol(atom_id))
        if info is None:
            if atom_id in self.defined_at:
                raise AlreadyDefinedError(f"atom '{name}' is defined by rules")
            raise NotExternalError(f"atom '{name}' was never declared external")
        if info.state is ExternalState.DEFINED:
            raise AlreadyDefinedError(f"atom '{name}' is defined by rules")
        if info.state is ExternalState.RELEASED:
            self.warn(AlreadyReleasedWarning, f"atom '{name}' was already released")
            return
        info.state = ExternalState.RELEASED
        self.released_at[atom_id] = self.next_tag
        info.value = False

    def external_state(self, atom):
        atom_id = self.atoms.get(atom) if isinstance(atom, Atom) else atom
        info = self.externals.get(atom_id)
        if info is None:
            return None, None
        return info.state, info.value

    # -- snapshots ------------------------------------------------------------

    def snapshot(self, assumptions_extra=()) -> SolverProgram:
        """Freeze the accumulated program plus per-call assumption overrides."""
        overrides = {}
        for atom, value in assumptions_extra:
            atom_id = self._resolve(atom)
            info = self.externals.get(atom_id)
            name = atom_str(self.atoms.symbol(atom_id))
            if info is None:
                if atom_id in self.defined_at:
                    raise AlreadyDefinedError(f"atom '{name}' is defined by rules")
                raise NotExternalError(f"atom '{name}' was never declared external")
            if info.state is ExternalState.DEFINED:
                raise AlreadyDefinedError(f"atom '{name}' is defined by rules")
            if info.state is ExternalState.RELEASED:
                raise AlreadyReleasedError(f"atom '{name}' was released")
            overrides[atom_id] = bool(value)

        assumptions = []
        free_ids = []
        released = []
        for atom_id, info in self.externals.items():
            if info.state is ExternalState.FREE:
                free_ids.append(atom_id)
                assumptions.append((atom_id, overrides.get(atom_id, info.value)))
            elif info.state is ExternalState.RELEASED:
                released.append(atom_id)

        objective = []
        for priority in sorted(self.objective, reverse=True):
            terms = tuple(
                (weight, tuple(conditions))
                for weight, conditions in self.objective[priority].values()
            )
            objective.append((priority, terms))

        return SolverProgram(
            rules=tuple(self.rules),
            assumptions=tuple(assumptions),
            externals=frozenset(free_ids),
            released=frozenset(released),
            objective=tuple(objective),
            shown=frozenset(self.shown) if self.show_seen else None,
            atom_count=len(self.atoms),
            atoms=self.atoms,
        )


def _tarjan(adjacency):
    """Strongly connected components, iterative, deterministic order."""
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    counter = [0]
    sccs = []

    def strongconnect(root):
        work = [(root, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = counter[0]
                lowlink[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack.add(node)
            recurse = False
            deps = adjacency.get(node, ())
            for i in range(pi, len(deps)):
                dep = deps[i][0]
                if dep not in index:
                    work[-1] = (node, i + 1)
                    work.append((dep, 0))
                    recurse = True
                    break
                if dep in on_stack:
                    lowlink[node] = min(lowlink[node], index[dep])
            if recurse:
                continue
            if lowlink[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == node:
                        break
                sccs.append(scc)
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])

    nodes = sorted(adjacency)
    for node in nodes:
        if node not in index:
            strongconnect(node)
    return sccs

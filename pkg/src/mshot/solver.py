"""Stable-model search over the accumulated ground program.

The search is conflict-driven clause learning over the Clark completion of
the program, with an unfounded-set check at every propagation fixpoint so
that non-tight programs yield stable models: atoms of a non-trivial strongly
connected component of the positive dependency graph that cannot be founded
from outside are forced false with a loop-formula reason.  Choice rules are
translated with complement atoms and counting chains for the bounds; the
translation never changes shown projections because auxiliary variables live
outside the atom table.

Assumptions are fixed as top-level decisions.  With a nonempty objective the
search runs branch and bound: after each model with cost ``c`` subsequent
models are constrained to cost lexicographically below ``c`` via an
optimistic-bound propagator, so the final model is the optimum and every
improving model is reported.

``check_stable`` and ``brute_force_models`` form the independent oracle
route: they test candidates directly against the reduct semantics (choice
rules are reduced relative to the candidate, which is the aux-free reading
of their normal-rule translation), sharing nothing with the CDCL path.
"""

from __future__ import annotations

import heapq
import random
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from typing import Optional

from .errors import TooLargeError
from .grounder import GroundChoice
from .syntax import atom_str

__all__ = [
    "Mode",
    "Ordering",
    "CostVector",
    "compare_costs",
    "Model",
    "Statistics",
    "SolveStatus",
    "SolveResult",
    "CancelToken",
    "interrupt",
    "solve",
    "check_stable",
    "brute_force_models",
]


class Mode(Enum):
    FIRST = "first"
    ALL = "all"
    INTERSECTION = "intersection"
    UNION = "union"


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class CostVector:
    """Objective totals per priority level; missing levels read as zero."""

    values: tuple = ()  # of (priority, total) pairs, highest priority first

    def get(self, priority):
        for p, v in self.values:
            if p == priority:
                return v
        return 0

    def as_dict(self):
        return dict(self.values)

    def __bool__(self):
        return bool(self.values)

    def __str__(self):
        return " ".join(str(v) for _, v in self.values)


def compare_costs(a: CostVector, b: CostVector) -> Ordering:
    """Lexicographic comparison, highest priority level first."""
    levels = sorted({p for p, _ in a.values} | {p for p, _ in b.values}, reverse=True)
    for p in levels:
        av, bv = a.get(p), b.get(p)
        if av < bv:
            return Ordering.LESS
        if av > bv:
            return Ordering.GREATER
    return Ordering.EQUAL


@dataclass(frozen=True)
class Model:
    """One stable model: true atoms, shown projection, cost, ordinal."""

    true_ids: frozenset
    shown_atoms: tuple
    cost: CostVector
    index: int

    def shown_text(self):
        return " ".join(atom_str(a) for a in self.shown_atoms)


@dataclass
class Statistics:
    choices: int = 0
    conflicts: int = 0
    restarts: int = 0
    models_found: int = 0
    rules_ground: int = 0
    atoms: int = 0
    solve_calls: int = 0
    last_solve_time: float = 0.0

    def copy(self):
        return replace(self)


class SolveStatus(Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    INTERRUPTED = "INTERRUPTED"


@dataclass
class SolveResult:
    status: SolveStatus
    models: tuple = ()
    optimum: Optional[CostVector] = None
    exhausted: bool = False


class CancelToken:
    """Cross-thread cancellation flag checked at propagation boundaries."""

    def __init__(self):
        self._event = threading.Event()

    def cancel(self):
        self._event.set()

    @property
    def cancelled(self):
        return self._event.is_set()


def interrupt(token: CancelToken) -> None:
    """Stop the solve owning ``token`` at its next propagation boundary."""
    token.cancel()


# ---------------------------------------------------------------------------
# CDCL search
# ---------------------------------------------------------------------------

def _luby(i):
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        k -= 1
        i -= (1 << k) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


class _Search:
    def __init__(self, program, seed=0, restart_base=128, stats=None, cancel=None):
        self.program = program
        self.stats = stats if stats is not None else Statistics()
        self.cancel = cancel
        self.restart_base = max(1, restart_base)

        self.nvars = program.atom_count
        self.clauses = []
        self.root_units = []
        self._defs = {}
        self._translate(program)

        n = self.nvars
        self.assign = [0] * (n + 1)
        self.level = [0] * (n + 1)
        self.reason = [None] * (n + 1)
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.watches = {}
        self.activity = [0.0] * (n + 1)
        self.var_inc = 1.0
        self.phase = [False] * (n + 1)
        self.heap = []
        rng = random.Random(seed)
        order = list(range(1, n + 1))
        if seed:
            rng.shuffle(order)
        self.tiebreak = [0] * (n + 1)
        for pos, var in enumerate(order):
            self.tiebreak[var] = pos
        self.conflict_budget = self.restart_base
        self.restart_count = 1
        self.best_cost = None
        self.ok = True

        for clause in self.clauses:
            if not self._attach_initial(clause):
                self.ok = False
                return
        for lit in self.root_units:
            if not self._enqueue(lit, None):
                self.ok = False
                return
        self._rebuild_heap()

    # -- translation -------------------------------------------------------

    def _new_var(self):
        self.nvars += 1
        return self.nvars

    def _conj(self, lits):
        """Literal equivalent to the conjunction of ``lits``."""
        if not lits:
            if not hasattr(self, "_true_lit"):
                self._true_lit = self._new_var()
                self.root_units.append(self._true_lit)
            return self._true_lit
        if len(lits) == 1:
            return lits[0]
        d = self._new_var()
        for l in lits:
            self.clauses.append([-d, l])
        self.clauses.append([d] + [-l for l in lits])
        return d

    def _translate(self, program):
        defs = {}  # atom -> list of support-literal conjunctions (as tuples)
        self.unf_rules = {}  # atom -> list of (body lits, pos atoms)

        def add_def(atom, body_lits, pos_atoms):
            defs.setdefault(atom, []).append(tuple(body_lits))
            self.unf_rules.setdefault(atom, []).append((tuple(body_lits), tuple(pos_atoms)))

        for rule in program.rules:
            body = [a for a in rule.pos] + [-a for a in rule.neg]
            if rule.head is None:
                self._add_constraint(body)
            elif isinstance(rule.head, GroundChoice):
                self._add_choice(rule.head, body, rule.pos, add_def)
            else:
                add_def(rule.head, body, rule.pos)

        facts = set()
        for atom, bodies in defs.items():
            if any(len(b) == 0 for b in bodies):
                facts.add(atom)
                self.root_units.append(atom)
        for atom in range(1, program.atom_count + 1):
            if atom in program.externals:
                continue  # input atoms: value fixed by assumptions only
            if atom in program.released:
                self.root_units.append(-atom)
                continue
            bodies = defs.get(atom)
            if not bodies:
                self.root_units.append(-atom)
                continue
            if atom in facts:
                continue
            supports = []
            for body in bodies:
                s = self._conj(list(body))
                supports.append(s)
                self.clauses.append([-s, atom])
            self.clauses.append([-atom] + supports)

        self._defs = defs
        self._build_sccs(program)
        self.obj_levels = program.objective

    def _add_constraint(self, body):
        # An empty body means the constraint is violated outright; the empty
        # clause makes the attach step flag the program unsatisfiable.
        self.clauses.append([-l for l in body])

    def _add_choice(self, head, body, pos_atoms, add_def):
        m = len(head.atoms)
        lo, up = head.lower, head.upper
        beta = self._conj(list(body))
        if (up is not None and up < 0) or (lo is not None and lo > m):
            self.clauses.append([-beta])
            return
        for a in head.atoms:
            c = self._new_var()
            self.clauses.append([c, a])
            self.clauses.append([-c, -a])
            add_def(a, (beta, -c), pos_atoms)
        need_lo = lo is not None and lo > 0
        need_up = up is not None and up < m
        if not (need_lo or need_up):
            return
        depth = max(lo if need_lo else 0, (up + 1) if need_up else 0)
        # counter[i][j]: at least j of the first i choice atoms are true
        prev = {}
        for i, a in enumerate(head.atoms, start=1):
            cur = {}
            for j in range(1, min(i, depth) + 1):
                s = self._new_var()
                bodies = []
                if j in prev:
                    bodies.append((prev[j],))
                if j == 1:
                    bodies.append((a,))
                elif j - 1 in prev:
                    bodies.append((prev[j - 1], a))
                supports = []
                for b in bodies:
                    d = self._conj(list(b))
                    supports.append(d)
                    self.clauses.append([-d, s])
                self.clauses.append([-s] + supports)
                cur[j] = s
            prev = cur
        if need_lo:
            self.clauses.append([-beta, prev[lo]])
        if need_up:
            self.clauses.append([-beta, -prev[up + 1]])

    def _build_sccs(self, program):
        adjacency = {}
        for atom, rules in self.unf_rules.items():
            deps = []
            for _, pos in rules:
                deps.extend(pos)
            adjacency[atom] = deps
        index, low, on_stack = {}, {}, set()
        stack, sccs, counter = [], [], [0]

        for root in sorted(adjacency):
            if root in index:
                continue
            work = [(root, 0)]
            while work:
                node, pi = work[-1]
                if pi == 0:
                    index[node] = low[node] = counter[0]
                    counter[0] += 1
                    stack.append(node)
                    on_stack.add(node)
                deps = adjacency.get(node, ())
                advanced = False
                for i in range(pi, len(deps)):
                    dep = deps[i]
                    if dep not in adjacency:
                        continue  # no defining rules: never part of a loop
                    if dep not in index:
                        work[-1] = (node, i + 1)
                        work.append((dep, 0))
                        advanced = True
                        break
                    if dep in on_stack:
                        low[node] = min(low[node], index[dep])
                if advanced:
                    continue
                if low[node] == index[node]:
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
                    low[parent] = min(low[parent], low[node])

        self.scc_of = {}
        self.sccs = []
        for scc in sccs:
            nontrivial = len(scc) > 1 or any(
                scc[0] in pos for _, pos in self.unf_rules.get(scc[0], ())
            )
            if nontrivial:
                idx = len(self.sccs)
                members = sorted(scc)
                self.sccs.append(members)
                for a in members:
                    self.scc_of[a] = idx

    # -- assignment ------------------------------------------------------------

    def _value(self, lit):
        v = self.assign[abs(lit)]
        if v == 0:
            return 0
        return v if lit > 0 else -v

    def _enqueue(self, lit, reason):
        if lit == 0:
            return False
        var = abs(lit)
        val = 1 if lit > 0 else -1
        if self.assign[var] != 0:
            return self.assign[var] == val
        self.assign[var] = val
        self.level[var] = self.decision_level()
        self.reason[var] = reason
        self.trail.append(lit)
        return True

    def decision_level(self):
        return len(self.trail_lim)

    def _attach_initial(self, clause):
        clause = list(dict.fromkeys(clause))
        if not clause:
            return False
        if any(-l in set(clause) for l in clause):
            return True  # tautology
        if len(clause) == 1:
            self.root_units.append(clause[0])
            return True
        self._watch(clause)
        return True

    def _watch(self, clause):
        self.watches.setdefault(clause[0], []).append(clause)
        self.watches.setdefault(clause[1], []).append(clause)

    def _propagate(self):
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            falsified = -lit
            watch_list = self.watches.get(falsified)
            if not watch_list:
                continue
            i = 0
            while i < len(watch_list):
                clause = watch_list[i]
                if clause[0] == falsified:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self._value(first) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(clause)):
                    if self._value(clause[k]) != -1:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches.setdefault(clause[1], []).append(clause)
                        watch_list[i] = watch_list[-1]
                        watch_list.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self._value(first) == -1:
                    return clause
                self._enqueue(first, clause)
                i += 1
        return None

    # -- unfounded sets -----------------------------------------------------------

    def _unfounded_check(self):
        """Propagate falsity of unfounded atoms; returns a conflict or None."""
        for members in self.sccs:
            candidates = [a for a in members if self.assign[a] != -1]
            if not candidates:
                continue
            member_set = set(members)
            founded = set()
            changed = True
            while changed:
                changed = False
                for a in candidates:
                    if a in founded:
                        continue
                    for body, pos in self.unf_rules.get(a, ()):
                        if any(self._value(l) == -1 for l in body):
                            continue
                        if all(
                            (p not in member_set) or (p in founded)
                            for p in pos
                        ):
                            founded.add(a)
                            changed = True
                            break
            unfounded = [a for a in candidates if a not in founded]
            if not unfounded:
                continue
            uset = set(unfounded)
            ext_lits = []
            for a in unfounded:
                for body, pos in self.unf_rules.get(a, ()):
                    if any(p in uset for p in pos):
                        continue
                    # every external support of an unfounded set is currently
                    # inapplicable, so a false body literal must exist
                    false_lit = next(
                        (l for l in body if self._value(l) == -1), None
                    )
                    assert false_lit is not None, "external support without false body"
                    ext_lits.append(false_lit)
            ext_lits = list(dict.fromkeys(ext_lits))
            for a in unfounded:
                clause = [-a] + ext_lits
                if self.assign[a] == 1:
                    return clause
                if self.assign[a] == 0:
                    self._enqueue(-a, clause)
        return None

    # -- objective bound ------------------------------------------------------------

    def _bound_check(self):
        """Conflict clause when even the optimistic cost reaches the bound."""
        if self.best_cost is None or not self.obj_levels:
            return None
        reason = []
        optimistic = []
        for priority, terms in self.obj_levels:
            total = 0
            for weight, conditions in terms:
                if weight > 0:
                    forced = None
                    for cond in conditions:
                        if all(self._cond_lit_value(c) == 1 for c in cond):
                            forced = cond
                            break
                    if forced is not None:
                        total += weight
                        reason.extend(self._cond_lit(c) for c in forced)
                else:
                    excluded = []
                    possible = False
                    for cond in conditions:
                        false_lit = None
                        for c in cond:
                            if self._cond_lit_value(c) == -1:
                                false_lit = self._cond_lit(c)
                                break
                        if false_lit is None:
                            possible = True
                            break
                        excluded.append(false_lit)
                    if possible:
                        total += weight
                    else:
                        reason.extend(-l for l in excluded)
            optimistic.append((priority, total))
        if compare_costs(CostVector(tuple(optimistic)), self.best_cost) is Ordering.LESS:
            return None
        return [-l for l in dict.fromkeys(reason)]

    def _cond_lit(self, cond):
        atom, positive = cond
        return atom if positive else -atom

    def _cond_lit_value(self, cond):
        return self._value(self._cond_lit(cond))

    def model_cost(self):
        values = []
        for priority, terms in self.obj_levels:
            total = 0
            for weight, conditions in terms:
                if any(
                    all(self._cond_lit_value(c) == 1 for c in cond)
                    for cond in conditions
                ):
                    total += weight
            values.append((priority, total))
        return CostVector(tuple(values))

    # -- heuristics --------------------------------------------------------------

    def _rebuild_heap(self):
        self.heap = [
            (-self.activity[v], self.tiebreak[v], v)
            for v in range(1, self.nvars + 1)
            if self.assign[v] == 0
        ]
        heapq.heapify(self.heap)

    def _bump(self, var):
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for v in range(1, self.nvars + 1):
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
            return
        heapq.heappush(self.heap, (-self.activity[var], self.tiebreak[var], var))

    def _pick_var(self):
        while self.heap:
            neg_act, _, var = heapq.heappop(self.heap)
            if self.assign[var] == 0 and -neg_act == self.activity[var]:
                return var
        for v in range(1, self.nvars + 1):
            if self.assign[v] == 0:
                return v
        return None

    # -- backtracking ---------------------------------------------------------------

    def _backtrack(self, target):
        while self.decision_level() > target:
            limit = self.trail_lim.pop()
            while len(self.trail) > limit:
                lit = self.trail.pop()
                var = abs(lit)
                self.phase[var] = lit > 0
                self.assign[var] = 0
                self.reason[var] = None
                heapq.heappush(
                    self.heap, (-self.activity[var], self.tiebreak[var], var)
                )
        self.qhead = min(self.qhead, len(self.trail))

    def _analyze(self, conflict):
        learnt = [0]
        seen = set()
        counter = 0
        idx = len(self.trail) - 1
        p = None
        reason = conflict
        current = self.decision_level()
        while True:
            for q in reason:
                if p is not None and q == p:
                    continue  # the literal this reason propagated
                var = abs(q)
                if var in seen or self.level[var] == 0:
                    continue
                seen.add(var)
                self._bump(var)
                if self.level[var] == current:
                    counter += 1
                else:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            var = abs(p)
            seen.discard(var)
            counter -= 1
            if counter <= 0:
                learnt[0] = -p
                break
            reason = self.reason[var]
            idx -= 1
        if len(learnt) == 1:
            bt = 0
        else:
            bt = max(self.level[abs(q)] for q in learnt[1:])
        self.var_inc /= 0.95
        return learnt, bt

    def _add_learnt(self, learnt, bt):
        self._backtrack(bt)
        asserting = learnt[0]
        if len(learnt) == 1:
            return self._enqueue(asserting, None)
        # The non-asserting literals stay assigned at levels <= bt; watching
        # the highest-level one keeps the two-watch invariant.
        rest = sorted(learnt[1:], key=lambda q: -self.level[abs(q)])
        clause = [asserting] + rest
        self._watch(clause)
        return self._enqueue(asserting, clause)

    def add_clause_dynamic(self, lits):
        """Add a clause mid-search (model blocking); False when empty/violated."""
        lits = list(dict.fromkeys(lits))
        if not lits:
            return False
        self._backtrack(0)
        non_false = [l for l in lits if self._value(l) != -1]
        if not non_false:
            return False
        if len(lits) == 1:
            return self._enqueue(lits[0], None)
        lits.sort(key=lambda q: (self._value(q) == -1, self.tiebreak[abs(q)]))
        self._watch(lits)
        if self._value(lits[1]) == -1 and self._value(lits[0]) == 0:
            self._enqueue(lits[0], lits)
        return True

    # -- main loop ------------------------------------------------------------------

    def _fixpoint(self):
        """Propagate to fixpoint including unfounded and bound checks."""
        while True:
            conflict = self._propagate()
            if conflict is not None:
                return conflict
            if self.sccs:
                conflict = self._unfounded_check()
                if conflict is not None:
                    return conflict
                if self.qhead < len(self.trail):
                    continue
            conflict = self._bound_check()
            if conflict is not None:
                return conflict
            return None

    def run(self, on_total):
        """Search loop; calls ``on_total()`` at each total assignment.

        ``on_total`` returns False to stop the search.  Returns "exhausted"
        or "stopped" or "interrupted".
        """
        if self.cancel is not None and self.cancel.cancelled:
            return "interrupted"
        if not self.ok:
            return "exhausted"
        assumptions = list(self.program.assumptions)
        conflicts_since_restart = 0
        while True:
            conflict = self._fixpoint()
            if conflict is not None:
                self.stats.conflicts += 1
                conflicts_since_restart += 1
                levels = [self.level[abs(q)] for q in conflict]
                max_level = max(levels) if levels else 0
                if max_level == 0:
                    return "exhausted"
                if max_level < self.decision_level():
                    self._backtrack(max_level)
                learnt, bt = self._analyze(conflict)
                if not self._add_learnt(learnt, bt):
                    return "exhausted"
                if self.cancel is not None and self.cancel.cancelled:
                    return "interrupted"
                continue
            if self.cancel is not None and self.cancel.cancelled:
                return "interrupted"
            if conflicts_since_restart >= self.restart_base * _luby(self.restart_count):
                conflicts_since_restart = 0
                self.restart_count += 1
                self.stats.restarts += 1
                self._backtrack(0)
                continue
            # decide: re-assert assumptions, then pick by activity
            decided = False
            failed = False
            for atom, value in assumptions:
                lit = atom if value else -atom
                v = self._value(lit)
                if v == 1:
                    continue
                if v == -1:
                    failed = True
                    break
                self.trail_lim.append(len(self.trail))
                self._enqueue(lit, None)
                decided = True
                break
            if failed:
                return "exhausted"
            if decided:
                continue
            var = self._pick_var()
            if var is None:
                if not on_total():
                    return "stopped"
                continue
            self.stats.choices += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(var if self.phase[var] else -var, None)


# ---------------------------------------------------------------------------
# Public solve
# ---------------------------------------------------------------------------

def _shown_projection(program, true_ids):
    atoms = []
    for a in sorted(true_ids):
        sym = program.atoms.symbol(a)
        if program.shown is None or (sym.name, sym.arity) in program.shown:
            atoms.append(sym)
    return tuple(sorted(atoms, key=atom_str))


def _blocking_ids(program):
    if program.shown is None:
        return list(range(1, program.atom_count + 1))
    ids = []
    for a in range(1, program.atom_count + 1):
        sym = program.atoms.symbol(a)
        if (sym.name, sym.arity) in program.shown:
            ids.append(a)
    return ids


def solve(
    program,
    on_model=None,
    mode: Mode = Mode.FIRST,
    limit: Optional[int] = None,
    cancel: Optional[CancelToken] = None,
    stats: Optional[Statistics] = None,
    seed: int = 0,
    restart_base: int = 128,
) -> SolveResult:
    """Compute stable models of ``program`` under its assumptions.

    Models are delivered through ``on_model`` (which may return False to stop
    enumeration) and collected on the result.  In Intersection/Union modes the
    enumerated projections are folded into a single synthetic model.
    """
    stats = stats if stats is not None else Statistics()
    started = time.perf_counter()
    stats.solve_calls += 1
    search = _Search(program, seed=seed, restart_base=restart_base, stats=stats, cancel=cancel)

    has_objective = bool(program.objective)
    if mode is Mode.FIRST:
        effective_limit = 1 if not has_objective else (limit or None)
    else:
        effective_limit = limit if limit else None

    blocking = _blocking_ids(program)
    delivered = []
    collected = []  # projections for intersection/union
    stop = {"flag": False}

    def on_total():
        true_ids = frozenset(
            a for a in range(1, program.atom_count + 1) if search.assign[a] == 1
        )
        if __debug__:
            assert check_stable(program, true_ids), "unstable model escaped the search"
        cost = search.model_cost() if has_objective else CostVector()
        model = Model(true_ids, _shown_projection(program, true_ids), cost, len(delivered) + 1)
        if mode in (Mode.INTERSECTION, Mode.UNION):
            collected.append(model)
            count = len(collected)
        else:
            delivered.append(model)
            stats.models_found += 1
            count = len(delivered)
            if on_model is not None:
                if on_model(model) is False:
                    stop["flag"] = True
                    return False
        if has_objective:
            search.best_cost = cost
            if effective_limit is not None and count >= effective_limit:
                stop["flag"] = True
                return False
            search._backtrack(0)
            return True
        if effective_limit is not None and count >= effective_limit:
            stop["flag"] = True
            return False
        clause = [(-a if a in true_ids else a) for a in blocking]
        if not search.add_clause_dynamic(clause):
            return False
        return True

    outcome = search.run(on_total)
    stats.last_solve_time = time.perf_counter() - started

    if outcome == "interrupted":
        return SolveResult(SolveStatus.INTERRUPTED, tuple(delivered), None, False)

    exhausted = outcome == "exhausted"
    if mode in (Mode.INTERSECTION, Mode.UNION):
        if not collected:
            return SolveResult(SolveStatus.UNSAT, (), None, exhausted)
        sets = [set(m.shown_atoms) for m in collected]
        agg = set.intersection(*sets) if mode is Mode.INTERSECTION else set.union(*sets)
        true_ids = frozenset(program.atoms.get(sym) for sym in agg)
        synthetic = Model(
            true_ids, tuple(sorted(agg, key=atom_str)), CostVector(), 1
        )
        stats.models_found += 1
        if on_model is not None:
            on_model(synthetic)
        return SolveResult(SolveStatus.SAT, (synthetic,), None, exhausted)

    if not delivered:
        return SolveResult(SolveStatus.UNSAT, (), None, exhausted)
    optimum = None
    if has_objective and exhausted:
        optimum = delivered[-1].cost
    return SolveResult(SolveStatus.SAT, tuple(delivered), optimum, exhausted)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def check_stable(program, candidate) -> bool:
    """True iff ``candidate`` is a stable model of ``program``.

    The test is the reduct construction applied directly: true free externals
    act as facts, choice rules justify exactly their true atoms when the
    reduct body applies, and count bounds are checked as constraints.
    """
    cand = frozenset(candidate)
    for atom, value in program.assumptions:
        if (atom in cand) != value:
            return False
    for atom in program.released:
        if atom in cand:
            return False

    for rule in program.rules:
        body_sat = all(p in cand for p in rule.pos) and all(
            n not in cand for n in rule.neg
        )
        if not body_sat:
            continue
        if rule.head is None:
            return False
        if isinstance(rule.head, GroundChoice):
            k = sum(1 for a in rule.head.atoms if a in cand)
            if rule.head.lower is not None and k < rule.head.lower:
                return False
            if rule.head.upper is not None and k > rule.head.upper:
                return False
        elif rule.head not in cand:
            return False

    derived = {a for a in program.externals if a in cand}
    changed = True
    while changed:
        changed = False
        for rule in program.rules:
            if rule.head is None:
                continue
            if any(n in cand for n in rule.neg):
                continue
            if not all(p in derived for p in rule.pos):
                continue
            if isinstance(rule.head, GroundChoice):
                for a in rule.head.atoms:
                    if a in cand and a not in derived:
                        derived.add(a)
                        changed = True
            elif rule.head not in derived:
                derived.add(rule.head)
                changed = True
    return derived == cand


def brute_force_models(program):
    """All stable models by exhaustive enumeration; atom count capped at 20."""
    n = program.atom_count
    if n > 20:
        raise TooLargeError(f"{n} atoms exceed the brute-force cap of 20")

    fixed_true = 0
    fixed_false = 0
    for atom, value in program.assumptions:
        if value:
            fixed_true |= 1 << (atom - 1)
        else:
            fixed_false |= 1 << (atom - 1)
    for atom in program.released:
        fixed_false |= 1 << (atom - 1)
    free = [a for a in range(1, n + 1) if not ((fixed_true | fixed_false) >> (a - 1)) & 1]

    ext_mask = 0
    for atom in program.externals:
        ext_mask |= 1 << (atom - 1)

    rules = []
    for rule in program.rules:
        pos_mask = 0
        for p in rule.pos:
            pos_mask |= 1 << (p - 1)
        neg_mask = 0
        for q in rule.neg:
            neg_mask |= 1 << (q - 1)
        if rule.head is None:
            rules.append(("c", pos_mask, neg_mask, None))
        elif isinstance(rule.head, GroundChoice):
            amask = 0
            for a in rule.head.atoms:
                amask |= 1 << (a - 1)
            rules.append(
                ("ch", pos_mask, neg_mask, (amask, rule.head.lower, rule.head.upper))
            )
        else:
            rules.append(("n", pos_mask, neg_mask, 1 << (rule.head - 1)))

    models = set()
    for bits in range(1 << len(free)):
        cand = fixed_true
        for i, atom in enumerate(free):
            if (bits >> i) & 1:
                cand |= 1 << (atom - 1)
        if _stable_mask(rules, cand, ext_mask):
            models.add(frozenset(a for a in range(1, n + 1) if (cand >> (a - 1)) & 1))
    return models


def _stable_mask(rules, cand, ext_mask):
    for kind, pos, neg, extra in rules:
        if (cand & pos) != pos or (cand & neg):
            continue
        if kind == "c":
            return False
        if kind == "n":
            if not (cand & extra):
                return False
        else:
            amask, lo, up = extra
            k = bin(cand & amask).count("1")
            if lo is not None and k < lo:
                return False
            if up is not None and k > up:
                return False
    derived = cand & ext_mask
    changed = True
    while changed:
        changed = False
        for kind, pos, neg, extra in rules:
            if kind == "c" or (cand & neg):
                continue
            if (derived & pos) != pos:
                continue
            if kind == "n":
                if not (derived & extra):
                    derived |= extra
                    changed = True
            else:
                add = extra[0] & cand & ~derived
                if add:
                    derived |= add
                    changed = True
    return derived == cand

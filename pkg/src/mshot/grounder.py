"""Instantiation of subprograms against the accumulated ground domain.

One instantiation turns a parameter-substituted subprogram into a
``GroundUnit``: ground rules, external input declarations, minimize entries,
and show signatures.  Grounding happens in two phases.  Phase one runs a
semi-naive bottom-up fixpoint that derives the possible-atom set: an atom is
possible when some rule (or choice element, or external declaration) can
derive it from possible atoms, reading negative literals optimistically.
Phase two emits instances against the settled set: a ground rule instance is
kept exactly when every positive body atom is possible.  External directives
are grounded like virtual rules ``head :- condition``: the resulting heads
become input declarations and the rules themselves are discarded.

Several instantiation requests can be grounded jointly: their head atoms
feed a shared possible-atom view so units queued for the same flush can match
each other's output, while each request still yields its own unit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import (
    ArityMismatchError,
    ConditionNotDomainWarning,
    GroundArithmeticError,
    GroundingError,
)
from . import syntax
from .syntax import (
    Atom,
    AtomLiteral,
    BinOp,
    ChoiceHead,
    ConstDef,
    ExternalDecl,
    Function,
    Integer,
    Interval,
    Minimize,
    Rule,
    ScriptBlock,
    ShowSig,
    SubprogramDef,
    Symbol,
    Variable,
    atom_str,
    substitute_symbols,
)

__all__ = [
    "AtomTable",
    "GroundChoice",
    "GroundRule",
    "GroundMinimize",
    "GroundUnit",
    "make_rule",
    "substitute_params",
    "Instantiator",
    "instantiate",
    "dump_ground",
    "eval_term",
    "term_order_key",
]

_INT_MIN = -(2 ** 63)
_INT_MAX = 2 ** 63 - 1
_MAX_INTERVAL = 10 ** 6


# ---------------------------------------------------------------------------
# Ground program data
# ---------------------------------------------------------------------------

class AtomTable:
    """Bijection between ground atom symbols and dense integer ids.

    Ids start at 1 and are never reused or reassigned; id 0 is reserved as
    the always-false atom.
    """

    def __init__(self):
        self._ids = {}
        self._symbols = [None]

    def intern(self, atom: Atom) -> int:
        idx = self._ids.get(atom)
        if idx is None:
            idx = len(self._symbols)
            self._ids[atom] = idx
            self._symbols.append(atom)
        return idx

    def get(self, atom: Atom) -> Optional[int]:
        return self._ids.get(atom)

    def symbol(self, idx: int) -> Atom:
        return self._symbols[idx]

    def __len__(self):
        return len(self._symbols) - 1

    def __contains__(self, atom):
        return atom in self._ids

    def atoms(self):
        """All interned atoms in id order, as (id, symbol) pairs."""
        return list(enumerate(self._symbols))[1:]


@dataclass(frozen=True)
class GroundChoice:
    atoms: tuple
    lower: Optional[int] = None
    upper: Optional[int] = None


@dataclass(frozen=True)
class GroundRule:
    head: Union[None, int, GroundChoice]
    pos: tuple = ()
    neg: tuple = ()

    def head_atoms(self):
        if self.head is None:
            return ()
        if isinstance(self.head, GroundChoice):
            return self.head.atoms
        return (self.head,)


@dataclass(frozen=True)
class GroundMinimize:
    weight: int
    priority: int
    terms: tuple
    condition: tuple  # of (atom id, positive) pairs
    has_priority: bool = True


@dataclass
class GroundUnit:
    increment_tag: int
    atoms: AtomTable
    rules: list = field(default_factory=list)
    external_decls: list = field(default_factory=list)
    minimize_entries: list = field(default_factory=list)
    shown: list = field(default_factory=list)


def make_rule(head, pos, neg):
    """Build a ground rule; drops it when the body is contradictory."""
    pos = tuple(dict.fromkeys(pos))
    neg = tuple(dict.fromkeys(neg))
    if set(pos) & set(neg):
        return None
    return GroundRule(head, pos, neg)


# ---------------------------------------------------------------------------
# Term evaluation
# ---------------------------------------------------------------------------

def _check_int(value):
    if value < _INT_MIN or value > _INT_MAX:
        raise GroundArithmeticError("integer overflow in arithmetic term")
    return value


def _arith(op, a, b):
    if op == "+":
        return _check_int(a + b)
    if op == "-":
        return _check_int(a - b)
    if op == "*":
        return _check_int(a * b)
    if b == 0:
        raise GroundArithmeticError("division by zero")
    q = abs(a) // abs(b)
    return _check_int(-q if (a < 0) != (b < 0) else q)


class _Range:
    """Evaluated interval; only expansion contexts accept it."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi


def eval_term(term, binding):
    """Evaluate a term to a ground value under ``binding``.

    Returns a ground ``Term``, or a ``_Range`` for intervals, which callers
    must either expand or reject.
    """
    if isinstance(term, (Integer, Symbol)):
        return term
    if isinstance(term, Variable):
        value = binding.get(term.name)
        if value is None:
            raise GroundingError(f"unbound variable '{term.name}' during instantiation")
        return value
    if isinstance(term, Function):
        args = []
        for a in term.args:
            v = eval_term(a, binding)
            if isinstance(v, _Range):
                raise GroundingError("interval not allowed here")
            args.append(v)
        return Function(term.name, tuple(args))
    if isinstance(term, BinOp):
        left = eval_term(term.left, binding)
        right = eval_term(term.right, binding)
        if not isinstance(left, Integer) or not isinstance(right, Integer):
            raise GroundArithmeticError(
                f"non-integer operand in '{syntax.term_str(term)}'"
            )
        return Integer(_arith(term.op, left.value, right.value))
    if isinstance(term, Interval):
        lo = eval_term(term.lo, binding)
        hi = eval_term(term.hi, binding)
        if isinstance(lo, _Range) or isinstance(hi, _Range):
            raise GroundingError("nested intervals are not supported")
        if not isinstance(lo, Integer) or not isinstance(hi, Integer):
            raise GroundArithmeticError("interval endpoints must be integers")
        if hi.value - lo.value > _MAX_INTERVAL:
            raise GroundingError("interval too large")
        return _Range(lo.value, hi.value)
    raise TypeError(f"cannot evaluate {term!r}")


def expand_term(term, binding):
    """All ground instances of a term, expanding intervals pointwise."""
    if isinstance(term, Function):
        alternatives = [expand_term(a, binding) for a in term.args]
        return [
            Function(term.name, combo) for combo in itertools.product(*alternatives)
        ]
    value = eval_term(term, binding)
    if isinstance(value, _Range):
        return [Integer(v) for v in range(value.lo, value.hi + 1)]
    return [value]


def expand_atom(atom, binding):
    alternatives = [expand_term(a, binding) for a in atom.args]
    return [Atom(atom.name, combo) for combo in itertools.product(*alternatives)]


def ground_atom_single(atom, binding, context="literal"):
    """Ground an atom that must not expand (negative literals)."""
    expanded = expand_atom(atom, binding)
    if len(expanded) != 1:
        raise GroundingError(f"interval in negative {context} is not supported")
    return expanded[0]


def term_order_key(term):
    """Total order on ground terms: integers, then symbols, strings, functions."""
    if isinstance(term, Integer):
        return (0, term.value)
    if isinstance(term, Symbol):
        return (2, term.name) if term.quoted else (1, term.name)
    if isinstance(term, Function):
        return (3, term.name, len(term.args), tuple(term_order_key(a) for a in term.args))
    raise TypeError(f"not a ground term: {term!r}")


def _compare(op, left, right):
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    lk, rk = term_order_key(left), term_order_key(right)
    if op == "<":
        return lk < rk
    if op == "<=":
        return lk <= rk
    if op == ">":
        return lk > rk
    return lk >= rk


# ---------------------------------------------------------------------------
# Parameter substitution
# ---------------------------------------------------------------------------

def substitute_params(subprogram: SubprogramDef, args) -> SubprogramDef:
    """Replace the subprogram's parameters by the given ground terms."""
    args = tuple(args)
    if len(args) != len(subprogram.params):
        raise ArityMismatchError(
            f"subprogram {subprogram.name}/{len(subprogram.params)} "
            f"instantiated with {len(args)} arguments"
        )
    if not args:
        return SubprogramDef(subprogram.name, (), list(subprogram.statements))
    mapping = dict(zip(subprogram.params, args))
    statements = [substitute_symbols(s, mapping) for s in subprogram.statements]
    return SubprogramDef(subprogram.name, (), statements)


# ---------------------------------------------------------------------------
# Body plans
# ---------------------------------------------------------------------------

class _Plan:
    """Static execution order for one rule body or condition.

    Steps are ("match", atom, k), ("assign", var, term),
    ("assign_guard", comparison), ("test", comparison), ("negtest", atom) or
    ("neg", atom).  Comparisons are scheduled as soon as their variables are
    bound; ``prebound`` names variables supplied by an enclosing plan.
    """

    def __init__(self, body, eval_negatives, origin, prebound=()):
        self.steps = []
        self.match_count = 0
        self.preds = set()
        bound = set(prebound)
        pending = []

        def flush_pending():
            progress = True
            while progress:
                progress = False
                for cmp_ in list(pending):
                    step = self._comparison_step(cmp_, bound)
                    if step is not None:
                        pending.remove(cmp_)
                        self.steps.append(step)
                        progress = True

        negatives = []
        for lit in body:
            if isinstance(lit, AtomLiteral):
                if lit.negated:
                    negatives.append(lit)
                    continue
                self.steps.append(("match", lit.atom, self.match_count))
                self.match_count += 1
                self.preds.add((lit.atom.name, lit.atom.arity))
                out = []
                for arg in lit.atom.args:
                    syntax._binding_vars(arg, out)
                bound.update(out)
                flush_pending()
            else:
                step = self._comparison_step(lit, bound)
                if step is not None:
                    self.steps.append(step)
                else:
                    pending.append(lit)
        flush_pending()
        if pending:
            raise GroundingError(
                f"cannot order comparisons in '{origin}'; unsafe construction"
            )
        for lit in negatives:
            self.steps.append(("negtest" if eval_negatives else "neg", lit.atom))

    @staticmethod
    def _comparison_step(cmp_, bound):
        def is_bound(term):
            out = []
            syntax._all_vars(term, out)
            return all(v in bound for v in out)

        if cmp_.op == "=":
            for var_side, other in ((cmp_.left, cmp_.right), (cmp_.right, cmp_.left)):
                if (
                    isinstance(var_side, Variable)
                    and var_side.name not in bound
                    and is_bound(other)
                ):
                    bound.add(var_side.name)
                    return ("assign", var_side.name, other)
        if is_bound(cmp_.left) and is_bound(cmp_.right):
            return ("test", cmp_)
        return None


# ---------------------------------------------------------------------------
# Instantiator
# ---------------------------------------------------------------------------

class _PredIndex:
    """Layered (name, arity) -> ordered arg-tuple sets, base plus overlay."""

    def __init__(self, base):
        self.base = base  # read-only mapping
        self.local = {}

    def add(self, key, args):
        base = self.base.get(key)
        if base is not None and args in base:
            return False
        bucket = self.local.setdefault(key, {})
        if args in bucket:
            return False
        bucket[args] = None
        return True

    def __contains__(self, item):
        key, args = item
        base = self.base.get(key)
        if base is not None and args in base:
            return True
        local = self.local.get(key)
        return local is not None and args in local

    def candidates(self, key):
        # Copy: the fixpoint loop extends these buckets while joins scan them.
        base = self.base.get(key)
        local = self.local.get(key)
        out = list(base) if base else []
        if local:
            out.extend(local)
        return out


class Instantiator:
    """Joint bottom-up instantiation of one or more subprogram requests."""

    def __init__(self, atoms, possible, facts, next_tag=0, warn=None):
        self.atoms = atoms
        self.possible = _PredIndex(possible)
        self.facts = _PredIndex(facts)
        self.next_tag = next_tag
        self.warn = warn or (lambda category, message: None)
        self._optimistic = False

    # -- public ---------------------------------------------------------

    def run(self, subprograms):
        """Ground the given parameter-free subprograms as one joint fixpoint.

        Returns one ``GroundUnit`` per subprogram, tagged in order.
        """
        units = [
            GroundUnit(self.next_tag + i, self.atoms) for i in range(len(subprograms))
        ]
        emit_tasks = []
        derive_tasks = []
        for idx, sub in enumerate(subprograms):
            for stmt in sub.statements:
                task = self._compile(stmt, units[idx])
                if task is None:
                    continue
                emit_tasks.append(task)
                derive_tasks.extend(task["derive"])

        self._derive_possible(derive_tasks)
        for task in emit_tasks:
            self._emit(task)
        return units

    # -- phase one: possible atoms ---------------------------------------

    def _derive_possible(self, derive_tasks):
        self._optimistic = True
        try:
            delta = None
            while True:
                new_delta = {}
                for plan, head, fact_eligible in derive_tasks:
                    if delta is not None and not (plan.preds & set(delta)):
                        continue
                    for binding, matched in self._solve(plan, delta):
                        is_fact = fact_eligible and all(
                            ((a.name, a.arity), a.args) in self.facts for a in matched
                        )
                        for atom in expand_atom(head, binding):
                            key = (atom.name, atom.arity)
                            if self.possible.add(key, atom.args):
                                new_delta.setdefault(key, {})[atom.args] = None
                            if is_fact:
                                self.facts.add(key, atom.args)
                if not new_delta:
                    break
                delta = new_delta
        finally:
            self._optimistic = False

    def _solve(self, plan, delta):
        """Yield (binding, matched positive atoms) for each body solution.

        With a delta, the plan is re-run once per positive literal
        constrained to freshly derived atoms, so old joins are not redone
        wholesale; possible-set and emission dedup absorb the overlap.
        """
        if delta is None:
            yield from self._run_plan(plan)
            return
        if plan.match_count == 0:
            return
        for delta_idx in range(plan.match_count):
            yield from self._run_plan(plan, delta_idx, delta)

    # -- compilation -------------------------------------------------------

    def _compile(self, stmt, unit):
        if isinstance(stmt, Rule):
            if isinstance(stmt.head, ChoiceHead):
                plan = _Plan(stmt.body, eval_negatives=False, origin=stmt)
                prebound = syntax._bound_from_body(stmt.body)
                elements = []
                derive = []
                for e in stmt.head.elements:
                    elem_plan = _Plan(
                        e.condition, eval_negatives=True, origin=stmt, prebound=prebound
                    )
                    elements.append((elem_plan, e.atom))
                    combined = _Plan(
                        tuple(stmt.body) + tuple(e.condition),
                        eval_negatives=True,
                        origin=stmt,
                    )
                    derive.append((combined, e.atom, False))
                return {
                    "kind": "choice",
                    "plan": plan,
                    "elements": elements,
                    "lower": stmt.head.lower,
                    "upper": stmt.head.upper,
                    "unit": unit,
                    "seen": set(),
                    "derive": derive,
                }
            plan = _Plan(stmt.body, eval_negatives=False, origin=stmt)
            derive = []
            if stmt.head is not None:
                fact_eligible = not any(
                    isinstance(l, AtomLiteral) and l.negated for l in stmt.body
                )
                derive.append((plan, stmt.head, fact_eligible))
            return {
                "kind": "rule",
                "plan": plan,
                "head": stmt.head,
                "unit": unit,
                "seen": set(),
                "derive": derive,
            }
        if isinstance(stmt, ExternalDecl):
            plan = _Plan(stmt.condition, eval_negatives=True, origin=stmt)
            return {
                "kind": "external",
                "plan": plan,
                "head": stmt.atom,
                "unit": unit,
                "seen": set(),
                "derive": [(plan, stmt.atom, False)],
            }
        if isinstance(stmt, Minimize):
            plans = [
                (_Plan(e.condition, eval_negatives=False, origin=stmt), e)
                for e in stmt.elements
            ]
            return {
                "kind": "minimize",
                "elements": plans,
                "unit": unit,
                "seen": set(),
                "derive": [],
            }
        if isinstance(stmt, ShowSig):
            sig = (stmt.name, stmt.arity)
            if sig not in unit.shown:
                unit.shown.append(sig)
            return None
        if isinstance(stmt, (ConstDef, ScriptBlock)):
            return None
        raise TypeError(f"cannot ground {stmt!r}")

    # -- plan execution ------------------------------------------------------

    def _run_plan(self, plan, delta_idx=None, delta=None, initial=None):
        steps = plan.steps

        def rec(i, binding, matched):
            if i == len(steps):
                yield binding, matched
                return
            step = steps[i]
            kind = step[0]
            if kind == "match":
                _, pattern, match_idx = step
                key = (pattern.name, pattern.arity)
                if delta_idx is not None and match_idx == delta_idx:
                    source = delta.get(key, ())
                else:
                    source = self.possible.candidates(key)
                for args in source:
                    new_binding = self._match_atom(pattern, args, binding)
                    if new_binding is None:
                        continue
                    yield from rec(
                        i + 1, new_binding, matched + [Atom(pattern.name, args)]
                    )
            elif kind == "assign":
                _, name, term = step
                value = eval_term(term, binding)
                if isinstance(value, _Range):
                    for v in range(value.lo, value.hi + 1):
                        nb = dict(binding)
                        nb[name] = Integer(v)
                        yield from rec(i + 1, nb, matched)
                else:
                    nb = dict(binding)
                    nb[name] = value
                    yield from rec(i + 1, nb, matched)
            elif kind == "test":
                if self._eval_comparison(step[1], binding):
                    yield from rec(i + 1, binding, matched)
            elif kind == "negtest":
                if self._optimistic:
                    yield from rec(i + 1, binding, matched)
                    return
                atom = ground_atom_single(step[1], binding, context="condition")
                key = (atom.name, atom.arity)
                if (key, atom.args) in self.possible:
                    if (key, atom.args) not in self.facts:
                        self.warn(
                            ConditionNotDomainWarning,
                            f"condition literal 'not {atom_str(atom)}' is not a "
                            f"domain fact; treated as false",
                        )
                else:
                    yield from rec(i + 1, binding, matched)
            else:  # "neg": grounded at emission, never filters
                yield from rec(i + 1, binding, matched)

        yield from rec(0, dict(initial) if initial else {}, [])

    def _eval_comparison(self, cmp_, binding):
        left = eval_term(cmp_.left, binding)
        right = eval_term(cmp_.right, binding)
        if isinstance(right, _Range) and cmp_.op == "=":
            return isinstance(left, Integer) and right.lo <= left.value <= right.hi
        if isinstance(left, _Range) and cmp_.op == "=":
            return isinstance(right, Integer) and left.lo <= right.value <= left.hi
        if isinstance(left, _Range) or isinstance(right, _Range):
            raise GroundingError("interval not allowed in this comparison")
        return _compare(cmp_.op, left, right)

    def _match_atom(self, pattern, args, binding):
        binding = dict(binding)
        for p, v in zip(pattern.args, args):
            if not self._match_term(p, v, binding):
                return None
        return binding

    def _match_term(self, pattern, value, binding):
        if isinstance(pattern, Variable):
            seen = binding.get(pattern.name)
            if seen is None:
                binding[pattern.name] = value
                return True
            return seen == value
        if isinstance(pattern, (Integer, Symbol)):
            return pattern == value
        if isinstance(pattern, Function):
            if not isinstance(value, Function) or value.name != pattern.name:
                return False
            if len(value.args) != len(pattern.args):
                return False
            return all(
                self._match_term(p, v, binding)
                for p, v in zip(pattern.args, value.args)
            )
        evaluated = eval_term(pattern, binding)
        if isinstance(evaluated, _Range):
            return (
                isinstance(value, Integer)
                and evaluated.lo <= value.value <= evaluated.hi
            )
        return evaluated == value

    # -- phase two: emission ---------------------------------------------------

    def _emit(self, task):
        kind = task["kind"]
        if kind == "minimize":
            for elem_plan, element in task["elements"]:
                for binding, _ in self._run_plan(elem_plan):
                    self._emit_minimize(task, element, elem_plan, binding)
            return
        for binding, matched in self._run_plan(task["plan"]):
            if kind == "rule":
                self._emit_rule(task, binding, matched)
            elif kind == "external":
                self._emit_external(task, binding)
            else:
                self._emit_choice(task, binding, matched)

    def _negatives(self, plan, binding):
        out = []
        for step in plan.steps:
            if step[0] == "neg":
                atom = ground_atom_single(step[1], binding)
                out.append(self.atoms.intern(atom))
        return out

    def _emit_rule(self, task, binding, matched):
        unit = task["unit"]
        pos = [self.atoms.intern(a) for a in matched]
        neg = self._negatives(task["plan"], binding)
        heads = [None] if task["head"] is None else expand_atom(task["head"], binding)
        for head in heads:
            head_id = None if head is None else self.atoms.intern(head)
            rule = make_rule(head_id, pos, neg)
            if rule is None:
                continue
            key = (rule.head, rule.pos, rule.neg)
            if key in task["seen"]:
                continue
            task["seen"].add(key)
            unit.rules.append(rule)

    def _emit_external(self, task, binding):
        unit = task["unit"]
        self._warn_uncertain_plan(task["plan"], binding)
        for head in expand_atom(task["head"], binding):
            head_id = self.atoms.intern(head)
            if head_id in task["seen"]:
                continue
            task["seen"].add(head_id)
            unit.external_decls.append(head_id)

    def _emit_choice(self, task, binding, matched):
        unit = task["unit"]
        pos = [self.atoms.intern(a) for a in matched]
        neg = self._negatives(task["plan"], binding)
        atoms_out = []
        for elem_plan, elem_atom in task["elements"]:
            for elem_binding, elem_matched in self._run_plan(elem_plan, initial=binding):
                self._warn_uncertain(elem_matched)
                atoms_out.extend(expand_atom(elem_atom, elem_binding))
        ids = tuple(dict.fromkeys(self.atoms.intern(a) for a in atoms_out))
        lower, upper = task["lower"], task["upper"]
        if not ids:
            if lower is not None and lower > 0:
                rule = make_rule(None, pos, neg)
            else:
                return
        else:
            rule = make_rule(GroundChoice(ids, lower, upper), pos, neg)
        if rule is None:
            return
        key = (rule.head, rule.pos, rule.neg)
        if key in task["seen"]:
            return
        task["seen"].add(key)
        unit.rules.append(rule)

    def _emit_minimize(self, task, element, plan, binding):
        unit = task["unit"]
        weight = eval_term(element.weight, binding)
        priority = eval_term(element.priority, binding)
        if not isinstance(weight, Integer) or not isinstance(priority, Integer):
            raise GroundingError(
                "minimize weight and priority must ground to integers"
            )
        condition = []
        for step in plan.steps:
            if step[0] == "match":
                atom = ground_atom_single(step[1], binding, context="condition")
                condition.append((self.atoms.intern(atom), True))
            elif step[0] == "neg":
                atom = ground_atom_single(step[1], binding)
                condition.append((self.atoms.intern(atom), False))
        condition = tuple(dict.fromkeys(condition))
        tuple_alternatives = [expand_term(t, binding) for t in element.tuple_terms()]
        for terms in itertools.product(*tuple_alternatives):
            entry = GroundMinimize(
                weight.value, priority.value, terms, condition, element.has_priority
            )
            key = (entry.priority, entry.terms, entry.condition)
            if key in task["seen"]:
                continue
            task["seen"].add(key)
            unit.minimize_entries.append(entry)

    # -- warnings -----------------------------------------------------------

    def _warn_uncertain(self, matched):
        for atom in matched:
            key = (atom.name, atom.arity)
            if (key, atom.args) not in self.facts:
                self.warn(
                    ConditionNotDomainWarning,
                    f"condition atom '{atom_str(atom)}' is not a domain fact; "
                    f"included because it is possibly derivable",
                )

    def _warn_uncertain_plan(self, plan, binding):
        for step in plan.steps:
            if step[0] == "match":
                atom = ground_atom_single(step[1], binding, context="condition")
                self._warn_uncertain([atom])


# ---------------------------------------------------------------------------
# Convenience single-subprogram entry point
# ---------------------------------------------------------------------------

def instantiate(subprogram, args, atoms=None, possible=None, facts=None, warn=None, tag=0):
    """Ground one subprogram for one argument list against a context."""
    atoms = atoms if atoms is not None else AtomTable()
    inst = Instantiator(atoms, possible or {}, facts or {}, next_tag=tag, warn=warn)
    substituted = substitute_params(subprogram, args)
    return inst.run([substituted])[0]


# ---------------------------------------------------------------------------
# Dump format
# ---------------------------------------------------------------------------

def _literal_text(table, atom_id, positive):
    text = atom_str(table.symbol(atom_id))
    return text if positive else "not " + text


def _rule_text(table, rule):
    body = sorted(_literal_text(table, a, True) for a in rule.pos)
    body += sorted(_literal_text(table, a, False) for a in rule.neg)
    body_text = ", ".join(body)
    if rule.head is None:
        return f":- {body_text}." if body else ":- ."
    if isinstance(rule.head, GroundChoice):
        atoms = "; ".join(atom_str(table.symbol(a)) for a in rule.head.atoms)
        head = "{ " + atoms + " }"
        if rule.head.lower is not None:
            head = f"{rule.head.lower} {head}"
        if rule.head.upper is not None:
            head = f"{head} {rule.head.upper}"
    else:
        head = atom_str(table.symbol(rule.head))
    return f"{head} :- {body_text}." if body else f"{head}."


def _minimize_text(table, entry):
    head = f"{entry.weight}@{entry.priority}"
    rest = entry.terms[2:] if entry.has_priority else entry.terms[1:]
    if rest:
        head += "," + ",".join(syntax.term_str(t) for t in rest)
    cond = sorted(_literal_text(table, a, pos) for a, pos in entry.condition)
    if cond:
        return "#minimize{" + head + " : " + ", ".join(cond) + "}."
    return "#minimize{" + head + "}."


def dump_ground(units):
    """Deterministic textual listing of ground units in increment order."""
    lines = []
    for unit in sorted(units, key=lambda u: u.increment_tag):
        lines.append(f"% inc {unit.increment_tag}")
        table = unit.atoms
        for rule in unit.rules:
            lines.append(_rule_text(table, rule))
        for ext in unit.external_decls:
            lines.append(f"#external {atom_str(table.symbol(ext))}.")
        for entry in unit.minimize_entries:
            lines.append(_minimize_text(table, entry))
        for name, arity in unit.shown:
            lines.append(f"#show {name}/{arity}.")
    return "\n".join(lines) + ("\n" if lines else "")

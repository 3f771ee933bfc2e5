import pytest

from mshot.errors import (
    AlreadyDefinedError,
    AlreadyReleasedError,
    AlreadyReleasedWarning,
    CrossIncrementCycleError,
    NotExternalError,
    RedefinitionError,
)
from mshot import solver
from mshot.grounder import GroundUnit, instantiate
from mshot.solver import Mode
from mshot.store import ExternalState, ProgramStore
from mshot.syntax import Atom, Integer, parse_program


def ground_into(store, text, possible=None):
    """Instantiate `text` as the next increment of `store` and join it."""
    sub = {d.key: d for d in parse_program(text)}[("base", 0)]
    unit = instantiate(
        sub,
        [],
        atoms=store.atoms,
        possible=store.possible,
        facts=store.facts,
        tag=store.next_tag,
    )
    store.join_module(unit)
    return unit


def model_sets(store, assumptions=()):
    program = store.snapshot(assumptions)
    result = solver.solve(program, mode=Mode.ALL)
    return {m.true_ids for m in result.models}


def atom(name, *args):
    return Atom(name, tuple(Integer(a) if isinstance(a, int) else a for a in args))


# -- join_module -----------------------------------------------------------------

def test_redefinition_across_increments():
    store = ProgramStore()
    ground_into(store, "a.")
    with pytest.raises(RedefinitionError) as err:
        ground_into(store, "b. a :- b.")
    assert err.value.increment == 0
    # the failed unit joined nothing
    assert store.next_tag == 1


def test_cross_increment_positive_cycle():
    store = ProgramStore()
    ground_into(store, "#external e. a :- e.")
    with pytest.raises(CrossIncrementCycleError) as err:
        ground_into(store, "e :- a.")
    assert set(err.value.cycle) == {"a", "e"}


def test_acyclic_extension_defines_external():
    store = ProgramStore()
    ground_into(store, "#external e. a :- e.")
    with pytest.warns(UserWarning):
        ground_into(store, "b. e :- b.")
    state, _ = store.external_state(atom("e"))
    assert state is ExternalState.DEFINED


def test_local_cycles_allowed():
    store = ProgramStore()
    ground_into(store, "a :- b. b :- a.")
    assert store.next_tag == 1


def test_disjoint_defined_sets():
    store = ProgramStore()
    ground_into(store, "a. b :- a.")
    ground_into(store, "c :- a.")
    defined = [set(rec.defined) for rec in store.increments]
    assert defined[0] & defined[1] == set()


def test_external_decl_on_defined_atom_ignored():
    store = ProgramStore()
    ground_into(store, "a.")
    with pytest.warns(UserWarning):
        ground_into(store, "#external a.")
    assert store.external_state(atom("a")) == (None, None)


# -- assign / release -----------------------------------------------------------

def test_assign_external():
    store = ProgramStore()
    ground_into(store, "#external query(3).")
    store.assign_external(atom("query", 3), True)
    assert store.external_state(atom("query", 3)) == (ExternalState.FREE, True)


def test_assign_defined_atom():
    store = ProgramStore()
    ground_into(store, "a.")
    with pytest.raises(AlreadyDefinedError):
        store.assign_external(atom("a"), True)


def test_assign_false_idempotent():
    store = ProgramStore()
    ground_into(store, "#external e.")
    store.assign_external(atom("e"), False)
    store.assign_external(atom("e"), False)
    assert store.external_state(atom("e")) == (ExternalState.FREE, False)


def test_release_then_assign_raises():
    store = ProgramStore()
    ground_into(store, "#external query(2).")
    store.release_external(atom("query", 2))
    with pytest.raises(AlreadyReleasedError):
        store.assign_external(atom("query", 2), True)


def test_release_never_declared():
    store = ProgramStore()
    ground_into(store, "a.")
    with pytest.raises(NotExternalError):
        store.release_external(atom("zzz"))


def test_double_release_warns():
    store = ProgramStore()
    ground_into(store, "#external e.")
    store.release_external(atom("e"))
    with pytest.warns(AlreadyReleasedWarning):
        store.release_external(atom("e"))


def test_release_equals_constraint():
    def build(extra):
        store = ProgramStore()
        ground_into(store, "#external q(2). a :- q(2). b :- not q(2). " + extra)
        return store

    released = build("")
    released.release_external(atom("q", 2))
    constrained = build(":- q(2).")
    left = {
        frozenset(map(str, (released.atoms.symbol(a) for a in ids)))
        for ids in model_sets(released)
    }
    right = {
        frozenset(map(str, (constrained.atoms.symbol(a) for a in ids)))
        for ids in model_sets(constrained)
    }
    assert left == right


def test_defining_released_atom_rejected():
    store = ProgramStore()
    ground_into(store, "#external e.")
    store.release_external(atom("e"))
    with pytest.raises(RedefinitionError):
        ground_into(store, "e.")


# -- snapshot ------------------------------------------------------------------------

def test_snapshot_default_false_assumption():
    store = ProgramStore()
    ground_into(store, "a(1). #external e.")
    program = store.snapshot()
    eid = store.atoms.get(atom("e"))
    assert (eid, False) in program.assumptions
    models = model_sets(store)
    assert all(eid not in m for m in models)


def test_snapshot_assigned_true():
    store = ProgramStore()
    ground_into(store, "a(1). #external e.")
    store.assign_external(atom("e"), True)
    eid = store.atoms.get(atom("e"))
    assert (eid, True) in store.snapshot().assumptions


def test_snapshot_override_per_call():
    store = ProgramStore()
    ground_into(store, "#external e.")
    eid = store.atoms.get(atom("e"))
    program = store.snapshot([(atom("e"), True)])
    assert (eid, True) in program.assumptions
    # store state unchanged
    assert store.external_state(atom("e")) == (ExternalState.FREE, False)


def test_snapshot_conditioned_objective_inactive_contributes_zero():
    store = ProgramStore()
    ground_into(
        store,
        "#external activateObjective(1). { move(x,y) }. "
        "#minimize{ 3@1,x,y : move(x,y), activateObjective(1) }.",
    )
    program = store.snapshot()
    result = solver.solve(program, mode=Mode.FIRST)
    assert result.optimum.as_dict() == {1: 0}

    store.assign_external(atom("activateObjective", 1), True)
    result = solver.solve(store.snapshot(), mode=Mode.FIRST)
    assert result.optimum.as_dict() == {1: 0}  # optimum still avoids the move
    # forcing the move makes the weight count
    ground_into(store, ":- not move(x,y).")
    result = solver.solve(store.snapshot(), mode=Mode.FIRST)
    assert result.optimum.as_dict() == {1: 3}


def test_assignment_toggle_non_destructive():
    store = ProgramStore()
    ground_into(store, "#external e. a :- e.")
    before = model_sets(store)
    store.assign_external(atom("e"), True)
    middle = model_sets(store)
    store.assign_external(atom("e"), False)
    after = model_sets(store)
    store.assign_external(atom("e"), True)
    again = model_sets(store)
    assert before == after
    assert middle == again
    assert before != middle


def test_snapshot_deterministic():
    store = ProgramStore()
    ground_into(store, "a(1..3). #external e. #minimize{ 1@1 : e }.")
    s1 = store.snapshot()
    s2 = store.snapshot()
    assert s1 == s2


def test_external_soundness_in_all_models():
    store = ProgramStore()
    ground_into(
        store,
        "#external e1. #external e2. { a }. b :- e1. c :- e2, a.",
    )
    e1, e2 = atom("e1"), atom("e2")
    for v1 in (False, True):
        for v2 in (False, True):
            store.assign_external(e1, v1)
            store.assign_external(e2, v2)
            ids = {
                "e1": store.atoms.get(e1),
                "e2": store.atoms.get(e2),
            }
            models = model_sets(store)
            assert models, "free externals never make the program UNSAT here"
            for m in models:
                assert (ids["e1"] in m) == v1
                assert (ids["e2"] in m) == v2


def test_released_atom_false_in_all_models():
    store = ProgramStore()
    ground_into(store, "#external e. { a }.")
    store.release_external(atom("e"))
    eid = store.atoms.get(atom("e"))
    for m in model_sets(store):
        assert eid not in m


def test_minimize_dedup_across_increments():
    store = ProgramStore()
    ground_into(store, "x. #minimize{ 2@1,t : x }.")
    ground_into(store, "y. #minimize{ 2@1,t : y }.")
    program = store.snapshot()
    ((priority, terms),) = program.objective
    assert priority == 1
    ((weight, conditions),) = terms
    assert weight == 2
    assert len(conditions) == 2  # both conditions kept, weight counted once
    result = solver.solve(program, mode=Mode.FIRST)
    assert result.optimum.as_dict() == {1: 2}

import pathlib
import threading
import time

import pytest

from corpus import moves_from_model, pigeonhole_program, simulate_toh
from mshot.control import Engine
from mshot.errors import (
    NotExternalError,
    ParseError,
    SolveAlreadyRunningError,
    UnknownOptionError,
    UnknownSubprogramError,
)
from mshot.solver import Mode, SolveStatus
from mshot.syntax import Atom, Integer

TOH_DIR = pathlib.Path(__file__).parent.parent / "demos" / "toh"

SEC2 = "a(1). #program acid(k). b(k). #program base. a(2)."


def shown(result):
    return [m.shown_text() for m in result.models]


# -- ground / flush ------------------------------------------------------------

def test_ground_base_then_solve():
    engine = Engine(SEC2)
    engine.ground("base", [])
    result = engine.solve()
    assert shown(result) == ["a(1) a(2)"]


def test_ground_without_solve_has_no_effect():
    engine = Engine(SEC2)
    engine.ground("acid", [42])
    assert engine.store.num_rules() == 0
    assert len(engine.store.atoms) == 0


def test_unknown_subprogram():
    engine = Engine(SEC2)
    with pytest.raises(UnknownSubprogramError):
        engine.ground("nosuch", [])


def test_flush_two_requests_two_increments():
    engine = Engine(SEC2)
    engine.ground("acid", [42])
    engine.ground("acid", [7])
    engine.flush()
    assert engine.store.next_tag == 2
    result = engine.solve()
    assert shown(result) == ["b(42) b(7)"] or shown(result) == ["b(7) b(42)"]


def test_flush_empty_queue_noop():
    engine = Engine(SEC2)
    engine.flush()
    assert engine.store.num_rules() == 0


def test_queue_transparency():
    left = Engine(SEC2)
    left.ground("base", [])
    r1 = left.solve()
    right = Engine(SEC2)
    right.ground("base", [])
    right.flush()
    r2 = right.solve()
    assert shown(r1) == shown(r2)


def test_solve_on_empty_engine():
    engine = Engine()
    result = engine.solve()
    assert result.status is SolveStatus.SAT
    assert shown(result) == [""]


def test_multi_shot_equals_one_shot():
    multi = Engine(SEC2 + " #program extra. c :- a(1).")
    multi.ground("base", [])
    multi.ground("extra", [])
    rm = multi.solve(mode=Mode.ALL)
    single = Engine("a(1). a(2). c :- a(1).")
    single.ground("base", [])
    rs = single.solve(mode=Mode.ALL)
    assert sorted(shown(rm)) == sorted(shown(rs))


def random_layered_parts(rng, layers=3):
    """Subprogram layers where layer i only defines its own predicates and
    may read lower layers positively, so composition always holds."""
    parts = []
    for layer in range(layers):
        lines = []
        own = [f"p{layer}_{j}" for j in range(rng.randint(1, 3))]
        below = [f"p{lo}_{j}" for lo in range(layer) for j in range(3)]
        for pred in own:
            if layer == 0 or rng.random() < 0.4:
                for _ in range(rng.randint(1, 2)):
                    lines.append(f"{pred}({rng.randint(1, 3)}).")
            else:
                body = rng.choice(below)
                if rng.random() < 0.5:
                    lines.append(f"{pred}(X) :- {body}(X).")
                else:
                    lines.append(f"{{ {pred}(X) : {body}(X) }}.")
        parts.append("\n".join(lines))
    return parts


@pytest.mark.parametrize("seed", range(15))
def test_multi_shot_equals_one_shot_generated(seed):
    rng = __import__("random").Random(seed)
    parts = random_layered_parts(rng)
    source = "".join(
        f"#program part{i}.\n{text}\n" for i, text in enumerate(parts)
    )
    multi = Engine(source)
    for i in range(len(parts)):
        multi.ground(f"part{i}", [])
    rm = multi.solve(mode=Mode.ALL)
    single = Engine("\n".join(parts))
    single.ground("base", [])
    rs = single.solve(mode=Mode.ALL)
    assert sorted(shown(rm)) == sorted(shown(rs))


# -- listing-1 style loop -----------------------------------------------------------

def toh_engine():
    engine = Engine()
    engine.load(TOH_DIR / "tohI.lp")
    engine.load(TOH_DIR / "tohE.lp")
    return engine


def test_incremental_toh_loop():
    engine = toh_engine()
    engine.ground("base", [])
    step = 0
    result = None
    while True:
        step += 1
        assert step <= 10
        engine.ground("cumulative", [Integer(step)])
        engine.assign_external(Atom("query", (Integer(step),)), True)
        result = engine.solve()
        if result.status is SolveStatus.SAT:
            break
        engine.release_external(Atom("query", (Integer(step),)))
    assert step == 7
    moves = moves_from_model(result.models[0])
    assert simulate_toh(3, moves)
    # released queries stay false, the live one is true
    model = result.models[0]
    table = engine.store.atoms
    for t in range(1, 7):
        qid = table.get(Atom("query", (Integer(t),)))
        assert qid not in model.true_ids
    assert table.get(Atom("query", (Integer(7),))) in model.true_ids


# -- add ----------------------------------------------------------------------------

def test_add_external_hypothesis():
    engine = Engine()
    engine.add("hyp", [], "#external h. :- not h.")
    engine.ground("hyp", [])
    result = engine.solve()
    assert result.status is SolveStatus.UNSAT
    engine.assign_external("h", True)
    assert engine.solve().status is SolveStatus.SAT


def test_add_appends_to_existing():
    engine = Engine(SEC2)
    engine.add("acid", ["k"], "c(k).")
    engine.ground("acid", [1])
    result = engine.solve()
    assert shown(result) == ["b(1) c(1)"]


def test_add_parameterized():
    engine = Engine()
    engine.add("p", ["k"], "q(k).")
    engine.ground("p", [1])
    assert shown(engine.solve()) == ["q(1)"]


def test_add_parse_error_leaves_engine_unchanged():
    engine = Engine(SEC2)
    before = engine.subprograms()
    with pytest.raises(ParseError):
        engine.add("broken", [], "p :- .")
    assert engine.subprograms() == before


# -- externals through the engine -----------------------------------------------------

def test_assign_flushes_pending_ground():
    engine = Engine("#program step(t). #external query(t).")
    engine.ground("step", [1])
    # grounding is still pending; the assignment must observe post-flush state
    engine.assign_external(Atom("query", (Integer(1),)), True)
    assert engine.store.num_rules() == 0  # only an external was declared
    assert len(engine.store.atoms) == 1


def test_assumptions_restricted_to_externals():
    engine = Engine("a. #external e.")
    engine.ground("base", [])
    result = engine.solve(assumptions=[("e", True)])
    assert result.status is SolveStatus.SAT
    with pytest.raises(NotExternalError):
        engine.solve(assumptions=[("zzz", True)])


# -- asolve ------------------------------------------------------------------------

def test_asolve_then_wait_matches_solve():
    engine = Engine("{ a }. { b }.")
    engine.ground("base", [])
    sync = engine.solve(mode=Mode.ALL)
    handle = engine.asolve(mode=Mode.ALL)
    result = handle.result()
    assert {m.true_ids for m in sync.models} == {m.true_ids for m in result.models}


def test_asolve_cancel():
    engine = Engine(pigeonhole_program(8, 7))
    engine.ground("base", [])
    handle = engine.asolve()
    time.sleep(0.05)
    handle.cancel()
    result = handle.result()
    assert result.status is SolveStatus.INTERRUPTED
    # engine is usable again
    assert engine.solve is not None
    engine2 = Engine("a.")
    engine2.ground("base", [])
    assert engine2.solve().status is SolveStatus.SAT


def test_second_asolve_rejected_while_live():
    engine = Engine(pigeonhole_program(8, 7))
    engine.ground("base", [])
    handle = engine.asolve()
    try:
        with pytest.raises(SolveAlreadyRunningError):
            engine.asolve()
        with pytest.raises(SolveAlreadyRunningError):
            engine.ground("base", [])
    finally:
        handle.cancel()
        handle.wait()


def test_asolve_callback_exception_surfaces():
    engine = Engine("a.")
    engine.ground("base", [])

    def cb(model):
        raise ValueError("from callback")

    handle = engine.asolve(on_model=cb)
    with pytest.raises(ValueError):
        handle.result()
    # engine usable afterwards
    assert engine.solve().status is SolveStatus.SAT


# -- configuration -------------------------------------------------------------------

def test_set_conf_models_zero_means_all():
    engine = Engine("{ a }.")
    engine.ground("base", [])
    engine.set_conf("models=0")
    result = engine.solve()
    assert len(result.models) == 2


def test_set_conf_unknown_option():
    engine = Engine()
    with pytest.raises(UnknownOptionError):
        engine.set_conf("bogus=1")


def test_set_conf_replace_resets():
    engine = Engine("{ a }.")
    engine.ground("base", [])
    engine.set_conf("models=0")
    engine.set_conf("seed=7", replace=True)
    assert engine.config.models == 1
    assert engine.config.seed == 7
    result = engine.solve()
    assert len(result.models) == 1


def test_set_conf_enum_mode():
    engine = Engine("a :- not b. b :- not a.")
    engine.ground("base", [])
    engine.set_conf("enum-mode=union")
    result = engine.solve()
    assert shown(result) == ["a b"]


def test_get_stats_counts():
    engine = Engine("a. b :- a.")
    engine.ground("base", [])
    engine.solve()
    stats = engine.get_stats()
    assert stats.solve_calls == 1
    assert stats.models_found == 1
    assert stats.rules_ground == 2
    assert stats.atoms == 2


def test_on_model_stop_via_return_value():
    engine = Engine("{ a }. { b }.")
    engine.ground("base", [])
    count = []
    engine.set_conf("models=0")
    engine.solve(on_model=lambda m: (count.append(1), False)[1])
    assert len(count) == 1


def test_constants_override():
    engine = Engine("p(n).", constants={"n": Integer(5)})
    engine.ground("base", [])
    assert shown(engine.solve()) == ["p(5)"]


def test_const_directive_used():
    engine = Engine("#const n=3. p(1..n).")
    engine.ground("base", [])
    assert shown(engine.solve()) == ["p(1) p(2) p(3)"]


def test_param_shadows_const_warns_and_wins():
    from mshot.errors import ShadowedConstWarning

    engine = Engine("#const k=9. #program p(k). q(k).")
    engine.ground("p", [1])
    with pytest.warns(ShadowedConstWarning):
        result = engine.solve()
    assert shown(result) == ["q(1)"]


def test_assign_on_unknown_atom_is_not_external():
    engine = Engine("a.")
    engine.ground("base", [])
    engine.flush()
    with pytest.raises(NotExternalError):
        engine.assign_external("ghost", True)


def test_flush_partial_failure_keeps_joined_units_and_clears_queue():
    from mshot.errors import RedefinitionError

    engine = Engine("#program ok. fine. #program bad. fine :- other. other.")
    engine.ground("ok", [])
    engine.ground("bad", [])
    with pytest.raises(RedefinitionError):
        engine.flush()
    # the first request joined; the queue is gone
    assert engine.store.next_tag == 1
    engine.flush()  # no-op, queue already cleared
    assert engine.store.next_tag == 1
    assert shown(engine.solve()) == ["fine"]


def test_redeclared_external_keeps_assignment():
    engine = Engine("#external e. #program more. #external e. z.")
    engine.ground("base", [])
    engine.flush()
    engine.assign_external("e", True)
    engine.ground("more", [])
    result = engine.solve()
    assert "e" in result.models[0].shown_text()


def test_restart_configuration_takes_effect():
    engine = Engine(
        "hole(1..4). pigeon(1..5). 1 { in(P,H) : hole(H) } 1 :- pigeon(P). "
        ":- in(P1,H), in(P2,H), P1 < P2."
    )
    engine.ground("base", [])
    engine.set_conf("restarts=1")
    result = engine.solve()
    assert result.status is SolveStatus.UNSAT
    assert engine.get_stats().restarts >= 1

"""Whole-pipeline differential test.

Random textual programs travel two independent routes: (1) parser, grounder,
store, CDCL search; (2) naive grounding (substitute-everything oracle from
the grounder tests) followed by exhaustive model enumeration.  Model sets
must agree symbol-for-symbol.
"""

import random

import pytest

from test_grounder import naive_ground
from mshot.control import Engine
from mshot.grounder import AtomTable, make_rule
from mshot.solver import Mode, brute_force_models, solve
from mshot.store import SolverProgram
from mshot.syntax import check_safety, parse_program


def tiny_program(rng):
    preds = [(f"p{i}", rng.randint(0, 1)) for i in range(rng.randint(2, 4))]
    consts = [str(c) for c in range(1, rng.randint(2, 4))]
    lines = []
    for _ in range(rng.randint(1, 3)):
        name, arity = rng.choice(preds)
        lines.append(f"{name}({rng.choice(consts)})." if arity else f"{name}.")
    for _ in range(rng.randint(1, 5)):
        name, arity = rng.choice(preds)
        body = []
        bound = set()
        for _ in range(rng.randint(1, 2)):
            bn, ba = rng.choice(preds)
            if ba:
                arg = rng.choice(["X", "Y"] + consts)
                if arg in ("X", "Y"):
                    bound.add(arg)
                body.append(f"{bn}({arg})")
            else:
                body.append(bn)
        if rng.random() < 0.5:
            bn, ba = rng.choice(preds)
            if ba and (bound or consts):
                body.append(f"not {bn}({rng.choice(sorted(bound) + consts)})")
            elif not ba:
                body.append(f"not {bn}")
        if rng.random() < 0.2:
            lines.append(f":- {', '.join(body)}.")
            continue
        if arity:
            pool = sorted(bound) + consts
            if not pool:
                continue
            head = f"{name}({rng.choice(pool)})"
        else:
            head = name
        lines.append(f"{head} :- {', '.join(body)}.")
    return "\n".join(lines)


@pytest.mark.parametrize("seed", range(150))
def test_pipeline_matches_naive_route(seed):
    rng = random.Random(seed * 7919 + 13)
    text = tiny_program(rng)
    defs = parse_program(text)
    try:
        for stmt in defs[0].statements:
            check_safety(stmt)
    except Exception:
        pytest.skip("generator produced an unsafe rule")

    engine = Engine(text)
    engine.ground("base", [])
    engine.flush()
    program = engine.store.snapshot()
    got = {
        frozenset(str(program.atoms.symbol(a)) for a in m.true_ids)
        for m in solve(program, mode=Mode.ALL).models
    }

    instances = naive_ground(defs[0].statements, set())
    table = AtomTable()
    rules = []
    for head, pos, neg in instances:
        head_id = table.intern(head) if head is not None else None
        rule = make_rule(
            head_id,
            [table.intern(a) for a in sorted(pos, key=str)],
            [table.intern(a) for a in sorted(neg, key=str)],
        )
        if rule is not None:
            rules.append(rule)
    if len(table) > 20:
        pytest.skip("reference route over the brute-force cap")
    reference = SolverProgram(
        tuple(rules), (), frozenset(), frozenset(), (), None, len(table), table
    )
    expected = {
        frozenset(str(table.symbol(a)) for a in m)
        for m in brute_force_models(reference)
    }
    assert got == expected, text

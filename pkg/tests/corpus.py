"""Shared test helpers: random program generators and the ToH simulator."""

import random

from mshot.grounder import AtomTable, GroundChoice, make_rule
from mshot.store import SolverProgram
from mshot.syntax import Atom, Integer


def random_ground_program(rng: random.Random, max_atoms=10, max_rules=15,
                          with_choice=True, with_objective=False,
                          assumption=False):
    """A random ground program at brute-force scale.

    Optionally adds a random <=2-level objective with weights in [-5, 5] and
    a random single-atom assumption.
    """
    n = rng.randint(2, max_atoms)
    table = AtomTable()
    ids = [table.intern(Atom(f"a{i}")) for i in range(1, n + 1)]
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        body = rng.sample(ids, rng.randint(0, min(3, n)))
        pos, neg = [], []
        for b in body:
            (neg if rng.random() < 0.4 else pos).append(b)
        roll = rng.random()
        if roll < 0.12:
            if not pos and not neg:
                continue
            head = None
        elif with_choice and roll < 0.35:
            m = rng.randint(1, min(3, n))
            atoms = tuple(rng.sample(ids, m))
            lower = rng.choice([None, None, 0, rng.randint(0, m)])
            upper = rng.choice([None, None, m, rng.randint(0, m)])
            head = GroundChoice(atoms, lower, upper)
        else:
            head = rng.choice(ids)
        rule = make_rule(head, pos, neg)
        if rule is not None:
            rules.append(rule)

    objective = ()
    if with_objective:
        levels = []
        for priority in range(rng.randint(1, 2)):
            terms = []
            for _ in range(rng.randint(1, 4)):
                weight = rng.randint(-5, 5)
                cond = tuple(
                    (a, rng.random() < 0.8)
                    for a in rng.sample(ids, rng.randint(1, 2))
                )
                terms.append((weight, (cond,)))
            levels.append((priority, tuple(terms)))
        objective = tuple(sorted(levels, reverse=True))

    assumptions = ()
    if assumption:
        assumptions = ((rng.choice(ids), rng.random() < 0.7),)

    return SolverProgram(
        rules=tuple(rules),
        assumptions=assumptions,
        externals=frozenset(),
        released=frozenset(),
        objective=objective,
        shown=None,
        atom_count=len(table),
        atoms=table,
    )


def simulate_toh(n_disks, moves, start="a", goal="c"):
    """Independent Towers of Hanoi referee.

    ``moves`` are (disk, peg, step) triples.  Checks steps are 1..k with one
    move each, every move is legal (moving disk uncovered, target top larger,
    actual movement), and the final state puts every disk on the goal peg.
    """
    position = {d: start for d in range(1, n_disks + 1)}
    by_step = {}
    for disk, peg, step in moves:
        if step in by_step:
            return False
        by_step[step] = (disk, peg)
    if sorted(by_step) != list(range(1, len(moves) + 1)):
        return False
    for step in range(1, len(moves) + 1):
        disk, peg = by_step[step]
        if disk not in position:
            return False
        if any(e < disk and position[e] == position[disk] for e in position):
            return False  # disk is covered
        if position[disk] == peg:
            return False  # not a move
        if any(e < disk and position[e] == peg for e in position):
            return False  # smaller disk on target
        position[disk] = peg
    return all(position[d] == goal for d in position)


def moves_from_model(model):
    """Extract (disk, peg, step) triples from shown move/3 atoms."""
    out = []
    for atom in model.shown_atoms:
        if atom.name == "move" and atom.arity == 3:
            disk, peg, step = atom.args
            out.append((disk.value, peg.name, step.value))
    return out


def pigeonhole_program(pigeons, holes):
    """Classic UNSAT pigeonhole text: each pigeon in one hole, no sharing."""
    lines = [f"hole(1..{holes})."]
    for p in range(1, pigeons + 1):
        lines.append(f"1 {{ in({p},H) : hole(H) }} 1.")
    lines.append(":- in(P1,H), in(P2,H), P1 < P2, hole(H), pigeon(P1), pigeon(P2).")
    lines.append(f"pigeon(1..{pigeons}).")
    return "\n".join(lines)

"""Iterative-deepening planning: the classic iclingo-style control loop.

Ground the static part once, then per step add one copy of the transition
relation, switch the step's query atom on, and solve.  A failed step releases
its query atom (permanently false) before the horizon grows, so the goal
constraint of old steps can never fire again.
"""

import pathlib

from mshot import Engine, SolveStatus

HERE = pathlib.Path(__file__).parent

engine = Engine()
engine.load(HERE / "toh" / "tohI.lp")
engine.load(HERE / "toh" / "tohE.lp")

engine.ground("base", [])
step = 0
while True:
    step += 1
    engine.ground("cumulative", [step])
    engine.assign_external(f"query({step})", True)
    result = engine.solve()
    print(f"step {step}: {result.status.value}")
    if result.status is SolveStatus.SAT:
        break
    engine.release_external(f"query({step})")

moves = sorted(result.models[0].shown_atoms, key=lambda a: a.args[2].value)
print("plan:")
for move in moves:
    disk, peg, when = move.args
    print(f"  t={when}: disk {disk} -> peg {peg}")

"""Switching objective terms on and off between solves.

Minimize elements may carry input atoms in their condition.  While the
condition's external atom is true the weights count; assigning it false
dismisses those tuples from the objective without touching the program.
"""

from mshot import Engine

engine = Engine("""
1 { move(a,b,5,1,1) ; move(a,c,3,1,1) } 1.

#program volatileObjective(t).
#external activateObjective(t).
#minimize{ W@P,X,Y,t : move(X,Y,W,P,t), activateObjective(t) }.
""")

engine.ground("base", [])
engine.ground("volatileObjective", [1])

engine.assign_external("activateObjective(1)", True)
result = engine.solve()
print("active objective:   optimum", result.optimum.as_dict(),
      "model", result.models[-1].shown_text())

engine.assign_external("activateObjective(1)", False)
result = engine.solve()
print("inactive objective: optimum", result.optimum.as_dict(),
      "model", result.models[-1].shown_text())

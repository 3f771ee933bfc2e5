"""Grounding named subprograms on demand.

The same source file yields different programs depending on which
subprograms the control side chooses to instantiate: grounding only `base`
gives the standard single-shot behavior, while grounding `acid(k)` with an
argument instantiates the schematic fact instead.
"""

from mshot import Engine

SOURCE = """
a(1).
#program acid(k).
b(k).
#program base.
a(2).
"""

# Default behavior: only the base part.
engine = Engine(SOURCE)
engine.ground("base", [])
result = engine.solve()
print("base only:      ", result.models[0].shown_text())

# Ignore base entirely and instantiate acid(k) with k=42.
engine = Engine(SOURCE)
engine.ground("acid", [42])
result = engine.solve()
print("acid(42) only:  ", result.models[0].shown_text())

# Multi-shot: keep extending the same engine between solves.
engine = Engine(SOURCE)
engine.ground("base", [])
print("first solve:    ", engine.solve().models[0].shown_text())
engine.ground("acid", [7])
print("after acid(7):  ", engine.solve().models[0].shown_text())

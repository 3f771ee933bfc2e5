"""Exploring the model space: first, all, intersection, union.

Intersection and union digest the whole enumeration into one synthetic
answer: atoms true in every model, or atoms true in some model.
"""

from mshot import Engine, Mode

TEXT = "a :- not b. b :- not a. c. #show a/0. #show b/0. #show c/0."


def fresh():
    engine = Engine(TEXT)
    engine.ground("base", [])
    return engine


for mode in (Mode.FIRST, Mode.ALL, Mode.INTERSECTION, Mode.UNION):
    result = fresh().solve(mode=mode)
    listing = ["{" + m.shown_text() + "}" for m in result.models]
    print(f"{mode.value:<13} ->", " ".join(listing))

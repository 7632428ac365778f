"""
Grounding a free-text action
============================

A candidate is looked up exactly first, then matched by cosine similarity
over hashed token bags. Below the threshold the caller must refine.
"""

from clin.errors import NeedsRefinement
from clin.grounding import ActionSpace, best_match, ground

space = ActionSpace(("open OBJ", "go to OBJ", "pick up OBJ"), ("fridge", "kitchen", "banana"))
print(space.size(), "admissible actions")

for candidate in ("Open the fridge", "fridge open", "juggle torches"):
    action, score = best_match(candidate, space)
    try:
        print(f"{candidate!r:22} -> {ground(candidate, space)!r}  ({score:.3f})")
    except NeedsRefinement:
        print(f"{candidate!r:22} -> needs refinement, nearest {action!r} ({score:.3f})")

"""Independent reference implementations used by the grounding tests.

Pure Python, no numpy, no code shared with ``clin.grounding``.
"""

import hashlib
import math
import re
from collections import Counter
from itertools import product


def enumerate_actions(templates, objects):
    objects = list(dict.fromkeys(objects))
    out = []
    for t in templates:
        pieces = t.split("OBJ")
        for combo in product(objects, repeat=len(pieces) - 1):
            if len(set(combo)) != len(combo):
                continue
            action = pieces[0]
            for obj, rest in zip(combo, pieces[1:]):
                action += obj + rest
            if action not in out:
                out.append(action)
    return out


def bag(text, dim=512, seed=0):
    key = seed.to_bytes(8, "little")
    counts = Counter()
    for tok in re.findall(r"[a-z0-9]+", text.lower()):
        h = hashlib.blake2b(tok.encode(), digest_size=8, key=key).digest()
        counts[int.from_bytes(h, "little") % dim] += 1
    return counts


def cosine(a, b):
    va, vb = bag(a), bag(b)
    na = math.sqrt(sum(v * v for v in va.values()))
    nb = math.sqrt(sum(v * v for v in vb.values()))
    if na == 0 or nb == 0:
        return 0.0
    return sum(v * vb[k] for k, v in va.items()) / (na * nb)


def oracle_ground(candidate, templates, objects, threshold=0.9, eps=1e-9):
    """Returns (action or None, best action, best score)."""
    actions = enumerate_actions(templates, objects)
    squash = " ".join(candidate.lower().split())
    for a in actions:
        if " ".join(a.lower().split()) == squash:
            return a, a, 1.0
    scored = [(cosine(candidate, a), a) for a in actions]
    top = max(s for s, _ in scored)
    best = min(a for s, a in scored if s >= top - eps)
    return (best if top >= threshold else None), best, top

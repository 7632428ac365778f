"""Map free-form candidate actions onto admissible ones by embedding similarity."""

from __future__ import annotations

import hashlib
import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Protocol

import numpy as np

from clin.errors import EmptyActionSpace, GroundingFailure, NeedsRefinement

DEFAULT_THRESHOLD = 0.9
DEFAULT_MAX_TRIES = 5
SLOT = "OBJ"
# scores this close are treated as a tie and broken lexicographically
TIE_EPS = 1e-9
_BATCH = 1024
_TOKEN_RE = re.compile(r"[a-z0-9]+")
_WS_RE = re.compile(r"\s+")


def normalize(text: str) -> str:
    return " ".join(text.lower().split())


@dataclass(frozen=True)
class ActionSpace:
    """Action templates with ``OBJ`` slots plus the object names that fill them.

    Instantiations are produced lazily; two-slot templates never repeat an
    object. Enumeration order is template order, then object order.
    """

    templates: tuple[str, ...]
    objects: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "templates", tuple(self.templates))
        # drop duplicate names but keep first-seen order
        object.__setattr__(self, "objects", tuple(dict.fromkeys(self.objects)))

    def enumerate(self) -> Iterator[str]:
        seen: set[str] = set()
        for template in self.templates:
            parts = template.split(SLOT)
            n_slots = len(parts) - 1
            if n_slots == 0:
                combos: Iterator[tuple[str, ...]] = iter([()])
            elif n_slots == 1:
                combos = ((o,) for o in self.objects)
            else:
                combos = itertools.permutations(self.objects, n_slots)
            for combo in combos:
                action = parts[0] + "".join(o + p for o, p in zip(combo, parts[1:]))
                if action not in seen:
                    seen.add(action)
                    yield action

    def __iter__(self) -> Iterator[str]:
        return self.enumerate()

    def size(self) -> int:
        return sum(1 for _ in self.enumerate())

    def is_empty(self) -> bool:
        return next(self.enumerate(), None) is None

    def parse(self, text: str) -> tuple[str, tuple[str, ...]] | None:
        """Return ``(template, slot values)`` for an exactly admissible action."""
        norm = normalize(text)
        by_norm: dict[str, str] = {}
        for o in self.objects:
            by_norm.setdefault(normalize(o), o)
        for template in self.templates:
            literals = [_WS_RE.sub(" ", p.lower()) for p in template.split(SLOT)]
            found = _match_slots(norm, literals, by_norm)
            if found is not None:
                return template, found
        return None

    def lookup(self, text: str) -> str | None:
        """Canonical admissible spelling of ``text`` (case/whitespace-insensitive)."""
        parsed = self.parse(text)
        if parsed is None:
            return None
        template, values = parsed
        parts = template.split(SLOT)
        return parts[0] + "".join(v + p for v, p in zip(values, parts[1:]))


def _match_slots(norm: str, literals: list[str], by_norm: dict[str, str]) -> tuple[str, ...] | None:
    n_slots = len(literals) - 1

    def rec(pos: int, i: int, used: tuple[str, ...]) -> tuple[str, ...] | None:
        if not norm.startswith(literals[i], pos):
            return None
        pos += len(literals[i])
        if i == n_slots:
            return used if pos == len(norm) else None
        for key, name in by_norm.items():
            if name in used or not norm.startswith(key, pos):
                continue
            got = rec(pos + len(key), i + 1, used + (name,))
            if got is not None:
                return got
        return None

    return rec(0, 0, ())


class Embedder(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class HashingEmbedder:
    """Hashed bag-of-tokens embedding, L2-normalized.

    Tokens are lowercase alphanumeric runs; each is hashed with keyed
    BLAKE2b into one of ``dim`` buckets. Text without tokens maps to the
    zero vector.
    """

    def __init__(self, dim: int = 512, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._key = seed.to_bytes(8, "little")
        self._cache: dict[str, np.ndarray] = {}

    def tokens(self, text: str) -> list[str]:
        return _TOKEN_RE.findall(text.lower())

    def bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=self._key).digest()
        return int.from_bytes(digest, "little") % self.dim

    def embed(self, text: str) -> np.ndarray:
        vec = self._cache.get(text)
        if vec is None:
            vec = np.zeros(self.dim, dtype=np.float64)
            for tok in self.tokens(text):
                vec[self.bucket(tok)] += 1.0
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec /= norm
            vec.setflags(write=False)
            self._cache[text] = vec
        return vec


_DEFAULT_EMBEDDER = HashingEmbedder()


def default_embedder() -> HashingEmbedder:
    return _DEFAULT_EMBEDDER


def best_match(candidate: str, space: ActionSpace, embedder: Embedder | None = None) -> tuple[str, float]:
    """Most similar admissible action and its cosine score.

    Streams the space in batches so it is never materialized; ties within
    ``TIE_EPS`` go to the lexicographically smallest action.
    """
    embedder = embedder or default_embedder()
    query = embedder.embed(candidate)
    best_action: str | None = None
    best_score = -np.inf
    actions = space.enumerate()
    while True:
        batch = list(itertools.islice(actions, _BATCH))
        if not batch:
            break
        scores = np.stack([embedder.embed(a) for a in batch]) @ query
        top = float(scores.max())
        tied = min(a for a, s in zip(batch, scores) if s >= top - TIE_EPS)
        if best_action is None or top > best_score + TIE_EPS:
            best_action, best_score = tied, top
        elif abs(top - best_score) <= TIE_EPS:
            best_action = min(best_action, tied)
            best_score = max(best_score, top)
    if best_action is None:
        raise EmptyActionSpace("no admissible actions")
    return best_action, best_score


def ground(
    candidate: str,
    space: ActionSpace,
    threshold: float = DEFAULT_THRESHOLD,
    embedder: Embedder | None = None,
) -> str:
    """Return the admissible action for ``candidate`` or raise :class:`NeedsRefinement`."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    exact = space.lookup(candidate)
    if exact is not None:
        return exact
    action, score = best_match(candidate, space, embedder)
    if score >= threshold:
        return action
    raise NeedsRefinement(candidate, action, score)


def refinement_feedback(candidate: str) -> str:
    return (
        f"FEEDBACK: The generated candidate action '{candidate}' is not executable. "
        "Generate an action that follows one of the possible action formats, using only the possible objects."
    )


def refine_loop(
    decide_fn: Callable[[str], str],
    candidate0: str,
    space: ActionSpace,
    max_tries: int = DEFAULT_MAX_TRIES,
    threshold: float = DEFAULT_THRESHOLD,
    embedder: Embedder | None = None,
) -> tuple[str, int]:
    """Ground ``candidate0``, re-asking the agent until an action grounds.

    ``decide_fn`` receives the not-executable feedback and returns a new
    candidate. Returns ``(action, tries)``; raises :class:`GroundingFailure`
    after ``max_tries`` candidates fail.
    """
    if max_tries < 1:
        raise ValueError("max_tries must be >= 1")
    candidate = candidate0
    for tries in range(1, max_tries + 1):
        try:
            return ground(candidate, space, threshold, embedder), tries
        except NeedsRefinement:
            if tries == max_tries:
                break
            candidate = decide_fn(refinement_feedback(candidate))
    raise GroundingFailure(candidate, max_tries)

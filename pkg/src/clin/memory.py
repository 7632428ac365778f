"""Causal-abstraction memory language.

A memory is an ordered list of sentences of the form ``X <relation> to Y``
where the relation encodes whether X helps Y and how sure the agent is.
Parsing is tolerant of the spelling variants LLMs actually emit; formatting
always produces one of four canonical templates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from clin.errors import EmptyMemory, MalformedAbstraction, NoEpisodes

DEFAULT_ARCHIVE_CAP = 10


class Polarity(str, Enum):
    CONTRIBUTES = "CONTRIBUTES"
    DOES_NOT_CONTRIBUTE = "DOES_NOT_CONTRIBUTE"


class Certainty(str, Enum):
    UNCERTAIN = "UNCERTAIN"
    CONFIDENT = "CONFIDENT"


class SnapshotKind(str, Enum):
    TRIAL = "TRIAL"
    META = "META"


_TEMPLATES = {
    (Polarity.CONTRIBUTES, Certainty.UNCERTAIN): "MAY BE NECESSARY",
    (Polarity.CONTRIBUTES, Certainty.CONFIDENT): "SHOULD BE NECESSARY",
    (Polarity.DOES_NOT_CONTRIBUTE, Certainty.UNCERTAIN): "MAY NOT CONTRIBUTE",
    (Polarity.DOES_NOT_CONTRIBUTE, Certainty.CONFIDENT): "DOES NOT CONTRIBUTE",
}

# NEC+ES+ARY accepts NECESSARY, NECCESSARY and NECESARY.
_NECESSARY = r"NEC+ES+ARY"
_RELATIONS: list[tuple[str, Polarity, Certainty]] = [
    (rf"MAY\s+BE\s+{_NECESSARY}", Polarity.CONTRIBUTES, Certainty.UNCERTAIN),
    (rf"SHOULD\s+BE\s+{_NECESSARY}", Polarity.CONTRIBUTES, Certainty.CONFIDENT),
    (r"MAY\s+NOT\s+CONTRIBUTE", Polarity.DOES_NOT_CONTRIBUTE, Certainty.UNCERTAIN),
    (r"MAY\s+(?:BE\s+)?CONTRIBUTE", Polarity.CONTRIBUTES, Certainty.UNCERTAIN),
    (r"DOES\s+NOT\s+CONTRIBUTE", Polarity.DOES_NOT_CONTRIBUTE, Certainty.CONFIDENT),
    (rf"IS\s+{_NECESSARY}", Polarity.CONTRIBUTES, Certainty.CONFIDENT),
]
_RELATION_RE = re.compile(
    r"\b(?:" + "|".join(f"(?P<r{i}>{pat})" for i, (pat, _, _) in enumerate(_RELATIONS)) + r")\b",
    re.IGNORECASE,
)
_NUMBERING_RE = re.compile(r"^\s*(?:\d+\s*[.):]|[-*•])\s*")
_CONNECTOR_RE = re.compile(r"^to\b\s*", re.IGNORECASE)


@dataclass(frozen=True)
class CausalAbstraction:
    """One memory insight: doing ``x`` does (or does not) help ``y``."""

    x: str
    y: str
    polarity: Polarity
    certainty: Certainty
    raw_text: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", self.x.strip())
        object.__setattr__(self, "y", self.y.strip())
        if not self.x or not self.y:
            raise MalformedAbstraction(f"empty side in abstraction {self.raw_text!r}")
        object.__setattr__(self, "polarity", Polarity(self.polarity))
        object.__setattr__(self, "certainty", Certainty(self.certainty))

    @property
    def canonical(self) -> str:
        return format_abstraction(self)


def parse_abstraction(line: str) -> CausalAbstraction:
    """Parse one memory sentence, optionally prefixed by a list number.

    The leftmost relation phrase splits the sentence. The right-hand side
    loses a leading ``to`` connector and a trailing period; any other
    connector (``for the task ...``) stays part of ``y``.
    """
    raw = line.strip()
    text = _NUMBERING_RE.sub("", raw, count=1).strip()
    match = _RELATION_RE.search(text)
    if match is None:
        raise MalformedAbstraction(f"no relation phrase in {line!r}")
    idx = next(i for i in range(len(_RELATIONS)) if match.group(f"r{i}") is not None)
    _, polarity, certainty = _RELATIONS[idx]

    x = text[: match.start()].strip()
    y = _CONNECTOR_RE.sub("", text[match.end():].strip(), count=1)
    y = y.rstrip().rstrip(".").strip()
    if not x or not y:
        raise MalformedAbstraction(f"empty side in {line!r}")
    return CausalAbstraction(x, y, polarity, certainty, raw_text=raw)


def format_abstraction(a: CausalAbstraction) -> str:
    return f"{a.x} {_TEMPLATES[(a.polarity, a.certainty)]} to {a.y}."


@dataclass(frozen=True)
class MemorySnapshot:
    """The memory produced after one trial (or a meta-memory).

    Item ids are 1-based positions in ``items``. ``free_text`` holds opaque
    lines when the structured memory is ablated; such snapshots never carry
    abstractions.
    """

    items: tuple[CausalAbstraction, ...] = ()
    source_trial: int = 0
    source_reward: int = 0
    kind: SnapshotKind = SnapshotKind.TRIAL
    task: str = ""
    free_text: tuple[str, ...] = ()
    archive: tuple[tuple["MemorySnapshot", int], ...] = ()
    dropped: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "free_text", tuple(self.free_text))
        object.__setattr__(self, "archive", tuple((s, int(r)) for s, r in self.archive))
        object.__setattr__(self, "kind", SnapshotKind(self.kind))
        if not 0 <= self.source_reward <= 100:
            raise ValueError(f"source_reward out of range: {self.source_reward}")
        if self.kind is SnapshotKind.META and self.source_trial != -1:
            raise ValueError("META snapshots use source_trial == -1")
        if self.items and self.free_text:
            raise ValueError("a snapshot is either structured or free-text, not both")

    def __len__(self) -> int:
        return len(self.items) + len(self.free_text)

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def lines(self) -> list[str]:
        """Memory lines in canonical form, position i-1 holds id i."""
        if self.free_text:
            return list(self.free_text)
        return [format_abstraction(a) for a in self.items]

    def numbered(self) -> str:
        return "\n".join(f"{i}. {line}" for i, line in enumerate(self.lines(), start=1))

    def valid_ids(self) -> range:
        return range(1, len(self) + 1)

    def to_record(self) -> dict:
        rec = {
            "kind": self.kind.value,
            "source_trial": self.source_trial,
            "source_reward": self.source_reward,
            "task": self.task,
            "items": [format_abstraction(a) for a in self.items],
        }
        if self.free_text:
            rec["free_text"] = list(self.free_text)
        if self.archive:
            rec["archive"] = [{"reward": r, "snapshot": s.to_record()} for s, r in self.archive]
        if self.dropped:
            rec["dropped"] = self.dropped
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "MemorySnapshot":
        return cls(
            items=tuple(parse_abstraction(t) for t in rec.get("items", [])),
            source_trial=int(rec["source_trial"]),
            source_reward=int(rec["source_reward"]),
            kind=SnapshotKind(rec["kind"]),
            task=rec.get("task", ""),
            free_text=tuple(rec.get("free_text", [])),
            archive=tuple(
                (cls.from_record(a["snapshot"]), int(a["reward"])) for a in rec.get("archive", [])
            ),
            dropped=int(rec.get("dropped", 0)),
        )


def parse_memory(
    body: str,
    *,
    strict: bool = False,
    source_trial: int = 0,
    source_reward: int = 0,
    kind: SnapshotKind = SnapshotKind.TRIAL,
    task: str = "",
    archive: Sequence[tuple[MemorySnapshot, int]] = (),
) -> MemorySnapshot:
    """Parse a generator completion into a snapshot.

    Blank lines are skipped. In lenient mode malformed lines are dropped and
    counted in ``dropped``; in strict mode they raise, and a body with no
    parseable line raises :class:`EmptyMemory`.
    """
    items: list[CausalAbstraction] = []
    bad: list[str] = []
    for line in body.splitlines():
        if not line.strip():
            continue
        try:
            items.append(parse_abstraction(line))
        except MalformedAbstraction:
            bad.append(line)
    if strict:
        if not items:
            raise EmptyMemory(f"no abstractions in memory body ({len(bad)} malformed lines)")
        if bad:
            raise MalformedAbstraction(f"malformed memory line {bad[0]!r}")
    return MemorySnapshot(
        items=tuple(items),
        source_trial=source_trial,
        source_reward=source_reward,
        kind=kind,
        task=task,
        archive=tuple(archive),
        dropped=len(bad),
    )


def free_text_memory(
    body: str, *, source_trial: int = 0, source_reward: int = 0, task: str = ""
) -> MemorySnapshot:
    """Store generator output as opaque lines, bypassing the parser."""
    lines = tuple(_NUMBERING_RE.sub("", ln, count=1).strip() for ln in body.splitlines() if ln.strip())
    return MemorySnapshot(
        free_text=lines, source_trial=source_trial, source_reward=source_reward, task=task
    )


def select_crucial_memories(
    episodes: Iterable, archive_cap: int = DEFAULT_ARCHIVE_CAP
) -> list[tuple[MemorySnapshot, int]]:
    """Pick the snapshot of each episode's best trial.

    Episodes need ``trials`` (each with ``final_reward``) and aligned
    ``snapshots``. Ties go to the earliest trial. Only the ``archive_cap``
    most recent episodes are kept, oldest first.
    """
    episodes = list(episodes)
    if not episodes:
        raise NoEpisodes("crucial-memory selection needs at least one episode")
    if archive_cap < 1:
        raise ValueError("archive_cap must be positive")
    selected = []
    for ep in episodes[-archive_cap:]:
        if not ep.trials or len(ep.snapshots) < len(ep.trials):
            raise ValueError("every episode needs a snapshot for each completed trial")
        rewards = [t.final_reward for t in ep.trials]
        best = max(rewards)
        k = rewards.index(best)
        selected.append((ep.snapshots[k], best))
    return selected

"""Declarative world and task configuration.

Configs round-trip through plain dicts (and so through YAML/JSON). Things
are described by a set of capability tags plus a small mutable state dict;
the simulator interprets both.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any

from clin.errors import InvalidConfig

INVENTORY = "inventory"

# Capability tags understood by the simulator.
TAGS = frozenset(
    {
        "portable",
        "container",   # things can be moved into it
        "openable",    # has an is_open state
        "device",      # can be (de)activated
        "heat_source", # when on, heats the contents of containers on it
        "igniter",     # "use X on container" heats the container for a while
        "substance",
        "thermometer",
        "stopwatch",
        "incline",     # inclined plane; state slide_time
        "seed",        # grows when planted in a watered pot
        "pot",         # flower pot; state watered
        "waterer",     # "use X on pot" waters it
        "animal",
        "readable",
    }
)


@dataclass
class ThingSpec:
    id: str
    name: str
    location: str
    tags: frozenset[str] = frozenset()
    state: dict[str, Any] = field(default_factory=dict)
    text: str = ""

    def __post_init__(self) -> None:
        self.tags = frozenset(self.tags)
        unknown = self.tags - TAGS
        if unknown:
            raise InvalidConfig(f"thing {self.id!r}: unknown tags {sorted(unknown)}")

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"id": self.id, "name": self.name, "location": self.location}
        if self.tags:
            d["tags"] = sorted(self.tags)
        if self.state:
            d["state"] = dict(sorted(self.state.items()))
        if self.text:
            d["text"] = self.text
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ThingSpec":
        return cls(
            id=str(d["id"]),
            name=str(d["name"]),
            location=str(d["location"]),
            tags=frozenset(d.get("tags", ())),
            state=dict(d.get("state", {})),
            text=d.get("text", ""),
        )


@dataclass
class DoorSpec:
    rooms: tuple[str, str]
    is_open: bool = False

    def to_dict(self) -> dict:
        return {"rooms": list(self.rooms), "open": self.is_open}

    @classmethod
    def from_dict(cls, d: dict) -> "DoorSpec":
        a, b = d["rooms"]
        return cls((str(a), str(b)), bool(d.get("open", False)))


@dataclass
class Variation:
    """What a variant generator may change; see ``make_variants``."""

    start_rooms: list[str] = field(default_factory=list)
    placements: dict[str, list[str]] = field(default_factory=dict)
    distractors: list[ThingSpec] = field(default_factory=list)
    distractor_rooms: list[str] = field(default_factory=list)
    max_distractors: int = 0
    alternatives: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "start_rooms": list(self.start_rooms),
            "placements": {k: list(v) for k, v in sorted(self.placements.items())},
            "distractors": [t.to_dict() for t in self.distractors],
            "distractor_rooms": list(self.distractor_rooms),
            "max_distractors": self.max_distractors,
            "alternatives": [list(p) for p in self.alternatives],
        }

    @classmethod
    def from_dict(cls, d: dict | None) -> "Variation":
        d = d or {}
        return cls(
            start_rooms=list(d.get("start_rooms", [])),
            placements={k: list(v) for k, v in d.get("placements", {}).items()},
            distractors=[ThingSpec.from_dict(t) for t in d.get("distractors", [])],
            distractor_rooms=list(d.get("distractor_rooms", [])),
            max_distractors=int(d.get("max_distractors", 0)),
            alternatives=[(str(a), str(b)) for a, b in d.get("alternatives", [])],
        )


@dataclass
class WorldConfig:
    name: str
    rooms: list[str]
    doors: list[DoorSpec]
    things: list[ThingSpec]
    start_room: str
    variant_id: int = 0
    seed: int | None = None
    variation: Variation = field(default_factory=Variation)

    def thing(self, thing_id: str) -> ThingSpec:
        for t in self.things:
            if t.id == thing_id:
                return t
        raise KeyError(thing_id)

    def copy(self) -> "WorldConfig":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "variant_id": self.variant_id,
            "seed": self.seed,
            "start_room": self.start_room,
            "rooms": list(self.rooms),
            "doors": [d.to_dict() for d in self.doors],
            "things": [t.to_dict() for t in self.things],
            "variation": self.variation.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        try:
            return cls(
                name=str(d["name"]),
                rooms=[str(r) for r in d["rooms"]],
                doors=[DoorSpec.from_dict(x) for x in d.get("doors", [])],
                things=[ThingSpec.from_dict(x) for x in d.get("things", [])],
                start_room=str(d["start_room"]),
                variant_id=int(d.get("variant_id", 0)),
                seed=d.get("seed"),
                variation=Variation.from_dict(d.get("variation")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidConfig):
                raise
            raise InvalidConfig(f"malformed world config: {exc}") from exc

    def validate(self) -> None:
        rooms = set(self.rooms)
        if len(rooms) != len(self.rooms):
            raise InvalidConfig("duplicate room names")
        if self.start_room not in rooms:
            raise InvalidConfig(f"start room {self.start_room!r} does not exist")
        for door in self.doors:
            for r in door.rooms:
                if r not in rooms:
                    raise InvalidConfig(f"door connects unknown room {r!r}")
            if door.rooms[0] == door.rooms[1]:
                raise InvalidConfig("door connects a room to itself")
        ids = [t.id for t in self.things]
        if len(set(ids)) != len(ids):
            raise InvalidConfig("duplicate thing ids")
        by_id = {t.id: t for t in self.things}
        for t in self.things:
            if t.location in by_id:
                if "container" not in by_id[t.location].tags:
                    raise InvalidConfig(f"{t.id!r} is inside non-container {t.location!r}")
            elif t.location not in rooms and t.location != INVENTORY:
                raise InvalidConfig(f"{t.id!r} is in nonexistent location {t.location!r}")
        for t in self.things:
            seen = {t.id}
            loc = t.location
            while loc in by_id:
                if loc in seen:
                    raise InvalidConfig(f"containment cycle through {t.id!r}")
                seen.add(loc)
                loc = by_id[loc].location
        # connectivity with every door open
        adj: dict[str, set[str]] = {r: set() for r in rooms}
        for door in self.doors:
            a, b = door.rooms
            adj[a].add(b)
            adj[b].add(a)
        reach, frontier = {self.start_room}, [self.start_room]
        while frontier:
            for nxt in adj[frontier.pop()]:
                if nxt not in reach:
                    reach.add(nxt)
                    frontier.append(nxt)
        if reach != rooms:
            raise InvalidConfig(f"rooms unreachable from {self.start_room!r}: {sorted(rooms - reach)}")


PREDICATES = {
    "agent_in": 1,       # room
    "holding": 1,        # thing in inventory (directly or in a carried container)
    "inside": 2,         # thing, container (direct)
    "state_is": 3,       # thing, key, value
    "state_at_least": 3, # thing, key, number
    "focused": 1,        # thing
    "flag": 1,           # event flag raised by the simulator
}


@dataclass(frozen=True)
class Predicate:
    kind: str
    args: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))
        if self.kind not in PREDICATES:
            raise InvalidConfig(f"unknown predicate {self.kind!r}")
        if len(self.args) != PREDICATES[self.kind]:
            raise InvalidConfig(f"predicate {self.kind} takes {PREDICATES[self.kind]} args")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "args": list(self.args)}

    @classmethod
    def from_dict(cls, d: dict) -> "Predicate":
        return cls(d["kind"], tuple(d["args"]))


@dataclass(frozen=True)
class Subgoal:
    label: str
    predicate: Predicate
    weight: int
    terminal: bool = False

    def to_dict(self) -> dict:
        d = {"label": self.label, "predicate": self.predicate.to_dict(), "weight": self.weight}
        if self.terminal:
            d["terminal"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Subgoal":
        return cls(d["label"], Predicate.from_dict(d["predicate"]), int(d["weight"]), bool(d.get("terminal", False)))


@dataclass(frozen=True)
class TaskSpec:
    """A task: its description, weighted subgoals, FOCUS targets and step cap.

    When a terminal subgoal latches the trial ends. ``focus_budget`` is the
    number of FOCUS actions allowed; focusing anything outside
    ``focus_targets`` fails the trial.
    """

    task_id: str
    family: str
    description: str
    subgoals: tuple[Subgoal, ...]
    focus_targets: tuple[str, ...] = ()
    focus_budget: int | None = None
    max_steps: int = 30
    length: str = "S"

    def __post_init__(self) -> None:
        object.__setattr__(self, "subgoals", tuple(self.subgoals))
        object.__setattr__(self, "focus_targets", tuple(self.focus_targets))
        if self.focus_budget is None:
            object.__setattr__(self, "focus_budget", len(self.focus_targets))

    def validate(self, world: WorldConfig | None = None) -> None:
        if sum(s.weight for s in self.subgoals) != 100:
            raise InvalidConfig(f"task {self.task_id!r}: subgoal weights must sum to 100")
        if any(s.weight < 0 for s in self.subgoals):
            raise InvalidConfig("negative subgoal weight")
        if not any(s.terminal for s in self.subgoals):
            raise InvalidConfig(f"task {self.task_id!r} has no terminal subgoal")
        if self.focus_budget < 0:
            raise InvalidConfig("focus budget must be >= 0")
        if self.max_steps < 1:
            raise InvalidConfig("max_steps must be positive")
        if self.length not in ("S", "L"):
            raise InvalidConfig("length must be 'S' or 'L'")
        if world is not None:
            ids = {t.id for t in world.things}
            for f in self.focus_targets:
                if f not in ids:
                    raise InvalidConfig(f"focus target {f!r} not in world")
            for s in self.subgoals:
                p = s.predicate
                if p.kind == "agent_in" and p.args[0] not in world.rooms:
                    raise InvalidConfig(f"subgoal {s.label!r} names unknown room")
                if p.kind in ("holding", "inside", "state_is", "state_at_least", "focused"):
                    refs = p.args[:2] if p.kind == "inside" else p.args[:1]
                    for r in refs:
                        if r not in ids:
                            raise InvalidConfig(f"subgoal {s.label!r} names unknown thing {r!r}")

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "family": self.family,
            "description": self.description,
            "length": self.length,
            "max_steps": self.max_steps,
            "focus_targets": list(self.focus_targets),
            "focus_budget": self.focus_budget,
            "subgoals": [s.to_dict() for s in self.subgoals],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        try:
            return cls(
                task_id=str(d["task_id"]),
                family=str(d.get("family", d["task_id"])),
                description=str(d["description"]),
                subgoals=tuple(Subgoal.from_dict(s) for s in d["subgoals"]),
                focus_targets=tuple(d.get("focus_targets", ())),
                focus_budget=d.get("focus_budget"),
                max_steps=int(d.get("max_steps", 30)),
                length=str(d.get("length", "S")),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidConfig(f"malformed task config: {exc}") from exc

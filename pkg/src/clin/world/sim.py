"""Deterministic text micro-world simulator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator

from clin.errors import InvalidConfig
from clin.grounding import ActionSpace
from clin.records import TerminalReason
from clin.world.model import INVENTORY, TaskSpec, WorldConfig

TEMPLATES: tuple[str, ...] = (
    "look around",
    "inventory",
    "wait",
    "go to OBJ",
    "open OBJ",
    "close OBJ",
    "pick up OBJ",
    "move OBJ to OBJ",
    "activate OBJ",
    "deactivate OBJ",
    "use OBJ on OBJ",
    "focus on OBJ",
    "read OBJ",
    "look at OBJ",
)
UNKNOWN_ACTION = "No known action matches that input."
AMBIGUOUS = "Ambiguous request, please enter the number for the action you intended (or blank to cancel):"
WAIT_TICKS = 5
HEAT_RATE = 15
MAX_TEMPERATURE = 300
IGNITE_TICKS = 8
STAGES = ((9, "reproducing"), (6, "adult"), (3, "seedling"), (0, "seed"))

Entity = tuple[str, str]  # ("thing", id) | ("door", other room) | ("room", name)


@dataclass(frozen=True)
class StepResult:
    observation: str
    score: int
    done: bool
    terminal_reason: TerminalReason


class Thing:
    __slots__ = ("id", "name", "tags", "location", "state", "text")

    def __init__(self, id, name, tags, location, state, text=""):
        self.id = id
        self.name = name
        self.tags = tags
        self.location = location
        self.state = state
        self.text = text

    def copy(self) -> "Thing":
        return Thing(self.id, self.name, self.tags, self.location, dict(self.state), self.text)

    def is_open(self) -> bool:
        return self.state.get("is_open", True)


def phase(temperature: int, melting: int, boiling: int) -> str:
    if temperature >= boiling:
        return "gas"
    if temperature >= melting:
        return "liquid"
    return "solid"


def growth_stage(growth: int) -> str:
    return next(name for lo, name in STAGES if growth >= lo)


class Simulator:
    """One trial of one task in one world configuration.

    ``reset`` must be called before ``step``. Scores are cumulative integers
    0..100; subgoals latch once satisfied.
    """

    def __init__(self, world: WorldConfig, task: TaskSpec):
        world.validate()
        task.validate(world)
        self.world = world
        self.task = task
        self._active = False

    # -- lifecycle -----------------------------------------------------
    def reset(self) -> tuple[str, ActionSpace]:
        w = self.world
        self.things: dict[str, Thing] = {}
        for spec in w.things:
            state = dict(spec.state)
            if "openable" in spec.tags:
                state.setdefault("is_open", False)
            if "device" in spec.tags:
                state.setdefault("is_on", False)
            if "substance" in spec.tags:
                state.setdefault("temperature", 20)
                state["phase"] = phase(state["temperature"], state.get("melting", 0), state.get("boiling", 100))
            if "seed" in spec.tags:
                state.setdefault("growth", 0)
                state["stage"] = growth_stage(state["growth"])
            if "pot" in spec.tags:
                state.setdefault("watered", False)
            if "stopwatch" in spec.tags:
                state.setdefault("elapsed", 0)
            self.things[spec.id] = Thing(spec.id, spec.name, spec.tags, spec.location, state, spec.text)
        self.doors: dict[frozenset, bool] = {frozenset(d.rooms): d.is_open for d in w.doors}
        self._door_order = [frozenset(d.rooms) for d in w.doors]
        self.agent_room = w.start_room
        self.visited = {w.start_room}
        self.focused: set[str] = set()
        self.focus_used = 0
        self.flags: set[str] = set()
        self.latched = [False] * len(self.task.subgoals)
        self.score = 0
        self.steps = 0
        self.tick = 0
        self.done = False
        self.terminal_reason = TerminalReason.RUNNING
        self.pending: list[tuple[str, tuple[Entity, ...]]] | None = None
        self._active = True
        return self._look_around(), self.admissible()

    def clone(self) -> "Simulator":
        other = object.__new__(Simulator)
        other.__dict__.update(self.__dict__)
        other.things = {k: t.copy() for k, t in self.things.items()}
        other.doors = dict(self.doors)
        other.visited = set(self.visited)
        other.focused = set(self.focused)
        other.flags = set(self.flags)
        other.latched = list(self.latched)
        other.pending = list(self.pending) if self.pending is not None else None
        return other

    def state_key(self) -> tuple:
        """Hashable dynamic state, excluding the clock and step counter."""
        return (
            self.agent_room,
            tuple(self.doors[d] for d in self._door_order),
            tuple((t.id, t.location, tuple(sorted(t.state.items()))) for t in self.things.values()),
            self.focus_used,
            tuple(sorted(self.focused)),
            tuple(sorted(self.flags)),
            tuple(self.latched),
            self.done,
            tuple(self.pending) if self.pending else None,
        )

    # -- visibility ----------------------------------------------------
    def _root(self, thing: Thing) -> str:
        loc = thing.location
        while loc in self.things:
            loc = self.things[loc].location
        return loc

    def _contents(self, loc: str) -> list[Thing]:
        return [t for t in self.things.values() if t.location == loc]

    def accessible(self) -> list[Thing]:
        """Things in the current room or inventory, not hidden in closed containers."""
        out: list[Thing] = []

        def walk(loc: str) -> None:
            for t in self._contents(loc):
                out.append(t)
                if "container" in t.tags and t.is_open():
                    walk(t.id)

        walk(self.agent_room)
        walk(INVENTORY)
        return out

    def adjacent(self) -> list[str]:
        rooms = []
        for d in self._door_order:
            if self.agent_room in d:
                (other,) = d - {self.agent_room}
                rooms.append(other)
        return rooms

    def _door_open(self, other: str) -> bool:
        return self.doors[frozenset((self.agent_room, other))]

    def entities(self) -> dict[str, list[Entity]]:
        names: dict[str, list[Entity]] = {}
        for t in self.accessible():
            names.setdefault(t.name, []).append(("thing", t.id))
        for r in self.adjacent():
            names.setdefault(f"door to {r}", []).append(("door", r))
        for r in self.adjacent():
            names.setdefault(r, []).append(("room", r))
        return names

    def admissible(self) -> ActionSpace:
        return ActionSpace(TEMPLATES, tuple(self.entities()))

    # -- rendering -----------------------------------------------------
    def describe(self, t: Thing, depth: int = 0) -> str:
        bits = []
        s = t.state
        if "openable" in t.tags:
            bits.append("open" if t.is_open() else "closed")
        if "device" in t.tags:
            bits.append("on" if s["is_on"] else "off")
        if "substance" in t.tags:
            bits.append(s["phase"])
        if "seed" in t.tags and s["stage"] != "seed":
            bits.append(f"in the {s['stage']} stage")
        if "pot" in t.tags and s.get("watered"):
            bits.append("watered")
        text = f"a {t.name}" + (f" ({', '.join(bits)})" if bits else "")
        if "container" in t.tags and t.is_open() and depth < 3:
            inner = self._contents(t.id)
            if inner:
                text += " (containing " + ", ".join(self.describe(c, depth + 1) for c in inner) + ")"
        return text

    def _look_around(self) -> str:
        lines = [f"This room is called the {self.agent_room}. In it, you see:"]
        things = self._contents(self.agent_room)
        lines += [f"\t{self.describe(t)}" for t in things] or ["\tnothing of interest"]
        doors = self.adjacent()
        if doors:
            lines.append("You also see:")
            lines += [
                f"\tA door to the {r} (that is {'open' if self._door_open(r) else 'closed'})" for r in doors
            ]
        return "\n".join(lines)

    def _inventory(self) -> str:
        held = self._contents(INVENTORY)
        if not held:
            return "Your inventory is empty."
        return "In your inventory, you see:\n" + "\n".join(f"\t{self.describe(t)}" for t in held)

    def _where(self, ent: Entity) -> str:
        if ent[0] != "thing":
            return ""
        loc = self.things[ent[1]].location
        if loc in self.things:
            return f" (in the {self.things[loc].name})"
        if loc == INVENTORY:
            return " (in your inventory)"
        return f" (in the {loc})"

    # -- stepping ------------------------------------------------------
    def step(self, action: str) -> StepResult:
        if not getattr(self, "_active", False):
            raise RuntimeError("call reset() before step()")
        if self.done:
            raise RuntimeError("trial is over; call reset()")
        self.steps += 1
        text = action.strip()
        pending, self.pending = self.pending, None
        failed_focus = False
        if pending is not None and text.isdigit():
            idx = int(text)
            if idx < len(pending):
                template, ents = pending[idx]
                obs, failed_focus = self._execute(template, ents)
            else:
                obs = UNKNOWN_ACTION
        else:
            obs, failed_focus = self._dispatch(text)
        if failed_focus:
            self.done = True
            self.terminal_reason = TerminalReason.FAILED_FOCUS
        else:
            self._evaluate()
            if not self.done and self.steps >= self.task.max_steps:
                self.done = True
                self.terminal_reason = TerminalReason.TIMEOUT
        return StepResult(obs, self.score, self.done, self.terminal_reason)

    def _dispatch(self, text: str) -> tuple[str, bool]:
        names = self.entities()
        space = ActionSpace(TEMPLATES, tuple(names))
        parsed = space.parse(text)
        if parsed is None:
            return UNKNOWN_ACTION, False
        template, values = parsed
        options: list[tuple[Entity, ...]] = [()]
        for v in values:
            options = [o + (e,) for o in options for e in names[v]]
        if len(options) > 1:
            self.pending = [(template, o) for o in options]
            lines = [AMBIGUOUS]
            for i, ents in enumerate(options):
                parts = template.split("OBJ")
                filled = parts[0] + "".join(
                    self._name(e) + self._where(e) + p for e, p in zip(ents, parts[1:])
                )
                lines.append(f"{i}: {filled}")
            return "\n".join(lines), False
        return self._execute(template, options[0])

    def _name(self, ent: Entity) -> str:
        kind, ref = ent
        if kind == "thing":
            return self.things[ref].name
        if kind == "door":
            return f"door to {ref}"
        return ref

    def _execute(self, template: str, ents: tuple[Entity, ...]) -> tuple[str, bool]:
        verb = template.split(" OBJ")[0] if "OBJ" in template else template
        handler = _HANDLERS[verb]
        obs, ticks, failed_focus = handler(self, *ents)
        if not failed_focus:
            self._advance(ticks)
        return obs, failed_focus

    # -- action handlers: return (observation, ticks, failed_focus) -----
    def _a_look(self):
        return self._look_around(), 1, False

    def _a_inventory(self):
        return self._inventory(), 1, False

    def _a_wait(self):
        return f"You wait for {WAIT_TICKS} time steps.", WAIT_TICKS, False

    def _a_go(self, ent):
        kind, ref = ent
        if kind != "room":
            return f"You can't go to the {self._name(ent)}.", 1, False
        if not self._door_open(ref):
            return f"The door to the {ref} is closed.", 1, False
        self.agent_room = ref
        self.visited.add(ref)
        return f"You move to the {ref}.", 1, False

    def _a_open(self, ent, value=True):
        verb = "open" if value else "closed"
        kind, ref = ent
        if kind == "door":
            key = frozenset((self.agent_room, ref))
            if self.doors[key] == value:
                return f"The door to the {ref} is already {verb}.", 1, False
            self.doors[key] = value
            return f"The door to the {ref} is now {verb}.", 1, False
        if kind == "thing" and "openable" in self.things[ref].tags:
            t = self.things[ref]
            if t.state["is_open"] == value:
                return f"The {t.name} is already {verb}.", 1, False
            t.state["is_open"] = value
            return f"The {t.name} is now {verb}.", 1, False
        return f"The {self._name(ent)} can't be {'opened' if value else 'closed'}.", 1, False

    def _a_close(self, ent):
        return self._a_open(ent, value=False)

    def _a_pick(self, ent):
        if ent[0] != "thing":
            return f"You can't pick up the {self._name(ent)}.", 1, False
        t = self.things[ent[1]]
        if t.location == INVENTORY:
            return f"You already have the {t.name}.", 1, False
        if "portable" not in t.tags:
            return f"You can't pick up the {t.name}.", 1, False
        t.location = INVENTORY
        return f"You move the {t.name} to the inventory.", 1, False

    def _a_move(self, src, dst):
        if src[0] != "thing" or "portable" not in self.things[src[1]].tags:
            return f"You can't move the {self._name(src)}.", 1, False
        if dst[0] != "thing" or "container" not in self.things[dst[1]].tags:
            return f"You can't put things in the {self._name(dst)}.", 1, False
        t, c = self.things[src[1]], self.things[dst[1]]
        if not c.is_open():
            return f"The {c.name} is closed.", 1, False
        loc = c.id
        while loc in self.things:
            if loc == t.id:
                return f"You can't put the {t.name} inside itself.", 1, False
            loc = self.things[loc].location
        t.location = c.id
        if "seed" in t.tags and "pot" in c.tags:
            self.flags.add(f"planted:{t.id}")
        return f"You move the {t.name} to the {c.name}.", 1, False

    def _a_activate(self, ent, value=True):
        if ent[0] != "thing" or "device" not in self.things[ent[1]].tags:
            return f"The {self._name(ent)} can't be {'activated' if value else 'deactivated'}.", 1, False
        t = self.things[ent[1]]
        word = "activated" if value else "deactivated"
        if value and t.state.get("broken"):
            return f"The {t.name} appears to be broken and does not turn on.", 1, False
        if t.state["is_on"] == value:
            return f"The {t.name} is already {word}.", 1, False
        t.state["is_on"] = value
        if "stopwatch" in t.tags:
            return self._stopwatch(t, value), 1, False
        return f"The {t.name} is now {word}.", 1, False

    def _a_deactivate(self, ent):
        return self._a_activate(ent, value=False)

    def _stopwatch(self, watch: Thing, started: bool) -> str:
        if started:
            watch.state["elapsed"] = 0
            watch.state["plane"] = ""
            watch.state["rider"] = ""
            for plane in self.accessible():
                if "incline" in plane.tags:
                    riders = [r for r in self._contents(plane.id) if "stopwatch" not in r.tags]
                    if riders:
                        watch.state["plane"] = plane.id
                        watch.state["rider"] = riders[0].id
                        break
            return f"The {watch.name} is now activated."
        elapsed = watch.state["elapsed"]
        plane_id, rider_id = watch.state.get("plane"), watch.state.get("rider")
        msg = f"The {watch.name} stops at {elapsed} time steps."
        in_view = {t.id for t in self.accessible()}
        if plane_id in in_view and self.things[rider_id].location == plane_id:
            plane, rider = self.things[plane_id], self.things[rider_id]
            slide = plane.state["slide_time"]
            if elapsed >= slide:
                self.flags.add(f"measured:{plane_id}")
                msg += f" The {rider.name} took {slide} time steps to slide down the {plane.name}."
            else:
                msg += f" The {rider.name} is still sliding down the {plane.name}."
        watch.state["plane"] = ""
        watch.state["rider"] = ""
        return msg

    def _a_use(self, tool, target):
        if tool[0] != "thing" or target[0] != "thing":
            return "Nothing happens.", 1, False
        x, y = self.things[tool[1]], self.things[target[1]]
        if "thermometer" in x.tags and "substance" in y.tags:
            self.flags.add(f"measured:{y.id}")
            return (
                f"The {x.name} measures a temperature of {y.state['temperature']} degrees celsius.",
                1,
                False,
            )
        if "igniter" in x.tags and "container" in y.tags:
            if x.state.get("broken"):
                return f"The {x.name} does not produce a flame.", 1, False
            y.state["lit"] = IGNITE_TICKS
            return f"You light a flame under the {y.name} with the {x.name}.", 1, False
        if "waterer" in x.tags and "pot" in y.tags:
            if x.state.get("broken"):
                return f"The {x.name} is empty.", 1, False
            y.state["watered"] = True
            return f"You water the {y.name} with the {x.name}.", 1, False
        return "Nothing happens.", 1, False

    def _a_focus(self, ent):
        name = self._name(ent)
        ok = (
            ent[0] == "thing"
            and ent[1] in self.task.focus_targets
            and ent[1] not in self.focused
            and self.focus_used < self.task.focus_budget
        )
        if not ok:
            return (
                f"You focus on the {name}. That was not the right thing to focus on; "
                "the task is incomplete.",
                0,
                True,
            )
        self.focus_used += 1
        self.focused.add(ent[1])
        return f"You focus on the {name}.", 1, False

    def _a_read(self, ent):
        if ent[0] == "thing" and "readable" in self.things[ent[1]].tags:
            t = self.things[ent[1]]
            return f"The {t.name} reads: {t.text}", 1, False
        return f"There is nothing written on the {self._name(ent)}.", 1, False

    def _a_look_at(self, ent):
        kind, ref = ent
        if kind == "thing":
            return self.describe(self.things[ref]).capitalize() + ".", 1, False
        if kind == "door":
            return f"A door to the {ref} (that is {'open' if self._door_open(ref) else 'closed'}).", 1, False
        return f"You can't see into the {ref} from here.", 1, False

    # -- world dynamics ------------------------------------------------
    def _advance(self, ticks: int) -> None:
        for _ in range(ticks):
            self.tick += 1
            self._tick()

    def _heat(self, container: Thing) -> None:
        for sub in self._contents(container.id):
            if "substance" in sub.tags:
                s = sub.state
                s["temperature"] = min(MAX_TEMPERATURE, s["temperature"] + HEAT_RATE)
                s["phase"] = phase(s["temperature"], s.get("melting", 0), s.get("boiling", 100))

    def _tick(self) -> None:
        for t in list(self.things.values()):
            s = t.state
            if "heat_source" in t.tags and s.get("is_on") and not s.get("broken"):
                self._heat(t)
                for c in self._contents(t.id):
                    if "container" in c.tags:
                        self._heat(c)
            if s.get("lit", 0) > 0:
                self._heat(t)
                s["lit"] -= 1
            if "stopwatch" in t.tags and s.get("is_on"):
                s["elapsed"] += 1
            if "seed" in t.tags and t.location in self.things:
                pot = self.things[t.location]
                if "pot" in pot.tags and pot.state.get("watered"):
                    s["growth"] += 1
                    s["stage"] = growth_stage(s["growth"])

    def holds(self, kind: str, args: tuple) -> bool:
        if kind == "agent_in":
            return self.agent_room == args[0]
        if kind == "holding":
            return self._root(self.things[args[0]]) == INVENTORY
        if kind == "inside":
            return self.things[args[0]].location == args[1]
        if kind == "state_is":
            return self.things[args[0]].state.get(args[1]) == args[2]
        if kind == "state_at_least":
            val = self.things[args[0]].state.get(args[1])
            return val is not None and val >= args[2]
        if kind == "focused":
            return args[0] in self.focused
        if kind == "flag":
            return args[0] in self.flags
        raise InvalidConfig(f"unknown predicate {kind!r}")

    def _evaluate(self) -> None:
        terminal = False
        for i, sg in enumerate(self.task.subgoals):
            if not self.latched[i] and self.holds(sg.predicate.kind, sg.predicate.args):
                self.latched[i] = True
            if self.latched[i] and sg.terminal:
                terminal = True
        self.score = sum(sg.weight for sg, on in zip(self.task.subgoals, self.latched) if on)
        if self.score == 100 or terminal:
            self.done = True
            self.terminal_reason = TerminalReason.COMPLETE

    def unmet(self) -> Iterator[int]:
        return (i for i, on in enumerate(self.latched) if not on)

    def snapshot_info(self) -> dict[str, Any]:
        return {"room": self.agent_room, "score": self.score, "steps": self.steps, "tick": self.tick}


_HANDLERS = {
    "look around": Simulator._a_look,
    "inventory": Simulator._a_inventory,
    "wait": Simulator._a_wait,
    "go to": Simulator._a_go,
    "open": Simulator._a_open,
    "close": Simulator._a_close,
    "pick up": Simulator._a_pick,
    "move": Simulator._a_move,
    "activate": Simulator._a_activate,
    "deactivate": Simulator._a_deactivate,
    "use": Simulator._a_use,
    "focus on": Simulator._a_focus,
    "read": Simulator._a_read,
    "look at": Simulator._a_look_at,
}

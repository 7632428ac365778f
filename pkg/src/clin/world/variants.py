"""Environment variants and declarative scenario files."""

from __future__ import annotations

import copy
import random
from pathlib import Path

import yaml

from clin.errors import ConfigError, InvalidConfig, Unsolvable
from clin.world.families import BUILTINS
from clin.world.model import TaskSpec, WorldConfig
from clin.world.solver import solve

MAX_ATTEMPTS = 25


def _vary(base: WorldConfig, rng: random.Random) -> WorldConfig:
    w = base.copy()
    v = w.variation
    if v.start_rooms:
        w.start_room = rng.choice(v.start_rooms)
    for thing_id in sorted(v.placements):
        w.thing(thing_id).location = rng.choice(v.placements[thing_id])
    for a, b in v.alternatives:
        broken = rng.choice((a, b))
        w.thing(a).state["broken"] = broken == a
        w.thing(b).state["broken"] = broken == b
    k = rng.randint(0, min(v.max_distractors, len(v.distractors)))
    rooms = v.distractor_rooms or w.rooms
    for spec in rng.sample(v.distractors, k):
        extra = copy.deepcopy(spec)
        extra.location = rng.choice(rooms)
        w.things.append(extra)
    return w


def make_variants(base: WorldConfig, n: int, seed: int, task: TaskSpec) -> list[WorldConfig]:
    """``n`` solvable variants of ``base``; variant 0 is the base itself.

    Each variant draws from its own RNG stream keyed on (seed, variant id,
    attempt), so regeneration is byte-identical and independent of ``n``.
    Candidates the solver cannot finish within the step cap are redrawn.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    for vid in range(n):
        for attempt in range(MAX_ATTEMPTS):
            if vid == 0:
                cand = base.copy()
            else:
                cand = _vary(base, random.Random(f"{seed}:{vid}:{attempt}"))
            cand.variant_id = vid
            cand.seed = seed
            try:
                cand.validate()
                solve(cand, task)
            except (InvalidConfig, Unsolvable):
                if vid == 0:
                    raise
                continue
            out.append(cand)
            break
        else:
            raise Unsolvable(f"could not draw a solvable variant {vid} in {MAX_ATTEMPTS} attempts")
    return out


# -- scenario files ----------------------------------------------------

def scenario_to_dict(world: WorldConfig, task: TaskSpec) -> dict:
    return {"world": world.to_dict(), "task": task.to_dict()}


def scenario_from_dict(d: dict) -> tuple[WorldConfig, TaskSpec]:
    if not isinstance(d, dict) or "world" not in d or "task" not in d:
        raise InvalidConfig("scenario needs top-level 'world' and 'task' keys")
    return WorldConfig.from_dict(d["world"]), TaskSpec.from_dict(d["task"])


def dump_scenario(world: WorldConfig, task: TaskSpec) -> str:
    return yaml.safe_dump(scenario_to_dict(world, task), sort_keys=True, allow_unicode=True)


def save_scenario(path: str | Path, world: WorldConfig, task: TaskSpec) -> None:
    Path(path).write_text(dump_scenario(world, task), encoding="utf-8")


def load_scenario(ref: str | Path) -> tuple[WorldConfig, TaskSpec]:
    """Load ``builtin:<family>`` or a YAML/JSON scenario file, validated."""
    ref = str(ref)
    if ref.startswith("builtin:"):
        try:
            world, task = BUILTINS[ref[len("builtin:"):]]()
        except KeyError:
            raise ConfigError("world", f"unknown builtin {ref!r}; choose from {sorted(BUILTINS)}") from None
    else:
        path = Path(ref)
        if path.is_dir():
            path = path / "scenario.yaml"
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError("world", f"cannot read {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError("world", f"{path} is not valid YAML: {exc}") from exc
        try:
            world, task = scenario_from_dict(data)
        except InvalidConfig as exc:
            raise ConfigError("world", f"{path}: {exc}") from exc
    try:
        world.validate()
        task.validate(world)
    except InvalidConfig as exc:
        raise ConfigError("world", str(exc)) from exc
    return world, task

"""Built-in task families: three short and three long."""

from __future__ import annotations

from typing import Callable

from clin.world.model import DoorSpec, Predicate, Subgoal, TaskSpec, ThingSpec, Variation, WorldConfig

SHORT_STEPS = 30
LONG_STEPS = 60


def _t(id, name, location, tags=(), text="", **state) -> ThingSpec:
    return ThingSpec(id, name, location, frozenset(tags), dict(state), text)


def _door(a, b, is_open=False) -> DoorSpec:
    return DoorSpec((a, b), is_open)


def _sg(label, kind, *args, weight, terminal=False) -> Subgoal:
    return Subgoal(label, Predicate(kind, args), weight, terminal)


# small, unrelated clutter; names share no words with task objects
def _clutter() -> list[ThingSpec]:
    return [
        _t("d_chair", "chair", "hallway"),
        _t("d_lamp", "lamp", "hallway", ("device",)),
        _t("d_painting", "painting", "hallway"),
        _t("d_mug", "mug", "hallway", ("portable", "container")),
        _t("d_pillow", "pillow", "hallway", ("portable",)),
        _t("d_notebook", "notebook", "hallway", ("portable", "readable"), text="Shopping list: bread, eggs, rice."),
        _t("d_umbrella", "umbrella", "hallway", ("portable",)),
        _t("d_clock", "clock", "hallway"),
    ]


def pickplace() -> tuple[WorldConfig, TaskSpec]:
    rooms = ["hallway", "kitchen", "bedroom", "bathroom", "workshop"]
    world = WorldConfig(
        name="pickplace",
        rooms=rooms,
        doors=[
            _door("hallway", "kitchen"),
            _door("hallway", "bedroom", True),
            _door("hallway", "workshop"),
            _door("kitchen", "bathroom"),
        ],
        things=[
            _t("fridge", "fridge", "kitchen", ("container", "openable")),
            _t("banana", "banana", "fridge", ("portable",)),
            _t("drawer", "drawer", "bedroom", ("container", "openable")),
            _t("bed", "bed", "bedroom"),
            _t("table", "table", "workshop", ("container",)),
            _t("purple_box", "purple box", "bathroom", ("container",)),
            _t("sink", "sink", "bathroom"),
        ],
        start_room="hallway",
        variation=Variation(
            start_rooms=["hallway", "bedroom", "kitchen"],
            placements={"banana": ["fridge", "drawer", "table", "kitchen"]},
            distractors=_clutter(),
            distractor_rooms=rooms,
            max_distractors=4,
        ),
    )
    task = TaskSpec(
        task_id="pickplace",
        family="pickplace",
        description=(
            "Your task is to find a banana. First, focus on the banana. "
            "Then, move it to the purple box in the bathroom."
        ),
        subgoals=(
            _sg("focus on the banana", "focused", "banana", weight=25),
            _sg("hold the banana", "holding", "banana", weight=25),
            _sg("be in the bathroom", "agent_in", "bathroom", weight=20),
            _sg("banana in the purple box", "inside", "banana", "purple_box", weight=30, terminal=True),
        ),
        focus_targets=("banana",),
        max_steps=SHORT_STEPS,
        length="S",
    )
    return world, task


def measure_temperature() -> tuple[WorldConfig, TaskSpec]:
    rooms = ["kitchen", "hallway", "living room", "workshop"]
    world = WorldConfig(
        name="measure_temperature",
        rooms=rooms,
        doors=[
            _door("hallway", "kitchen"),
            _door("hallway", "living room", True),
            _door("hallway", "workshop"),
        ],
        things=[
            _t("counter", "counter", "kitchen", ("container",)),
            _t("beaker", "beaker", "counter", ("container", "portable")),
            _t("substance_b", "substance B", "beaker", ("substance",), temperature=70, melting=-10, boiling=150),
            _t("orange_box", "orange box", "kitchen", ("container",)),
            _t("blue_box", "blue box", "kitchen", ("container",)),
            _t("thermometer", "thermometer", "workshop", ("portable", "thermometer")),
            _t("shelf", "shelf", "living room", ("container",)),
            _t("workbench", "workbench", "workshop", ("container",)),
        ],
        start_room="hallway",
        variation=Variation(
            start_rooms=["hallway", "living room", "kitchen"],
            placements={"thermometer": ["workshop", "workbench", "shelf", "counter"]},
            distractors=_clutter(),
            distractor_rooms=rooms,
            max_distractors=4,
        ),
    )
    task = TaskSpec(
        task_id="measure_temperature",
        family="measure_temperature",
        description=(
            "Your task is to measure the temperature of substance B, which is located around the kitchen. "
            "First, focus on the thermometer. Next, measure the temperature of substance B. "
            "If the temperature is above 50 degrees celsius, focus on the orange box. "
            "If the temperature is below 50 degrees celsius, focus on the blue box."
        ),
        subgoals=(
            _sg("focus on the thermometer", "focused", "thermometer", weight=20),
            _sg("hold the thermometer", "holding", "thermometer", weight=20),
            _sg("be in the kitchen", "agent_in", "kitchen", weight=10),
            _sg("measure substance B", "flag", "measured:substance_b", weight=25),
            _sg("focus on the orange box", "focused", "orange_box", weight=25, terminal=True),
        ),
        focus_targets=("thermometer", "orange_box"),
        max_steps=SHORT_STEPS,
        length="S",
    )
    return world, task


def lifespan() -> tuple[WorldConfig, TaskSpec]:
    rooms = ["living room", "hallway", "kitchen", "outside"]
    animals = [
        _t("d_rabbit", "rabbit", "outside", ("animal",), lifespan=9),
        _t("d_frog", "frog", "outside", ("animal",), lifespan=10),
        _t("d_crow", "crow", "outside", ("animal",), lifespan=13),
    ]
    world = WorldConfig(
        name="lifespan",
        rooms=rooms,
        doors=[
            _door("hallway", "living room", True),
            _door("hallway", "kitchen"),
            _door("kitchen", "outside"),
        ],
        things=[
            _t("sofa", "sofa", "living room"),
            _t("elephant", "elephant", "outside", ("animal",), lifespan=70),
            _t("beaver", "beaver", "outside", ("animal",), lifespan=20),
            _t("chipmunk", "chipmunk", "outside", ("animal",), lifespan=5),
            _t("oven", "oven", "kitchen", ("container", "openable")),
        ],
        start_room="living room",
        variation=Variation(
            start_rooms=["living room", "hallway", "kitchen"],
            distractors=animals + [c for c in _clutter() if c.id != "d_notebook"],
            distractor_rooms=["outside"],
            max_distractors=4,
        ),
    )
    task = TaskSpec(
        task_id="lifespan",
        family="lifespan",
        description=(
            "Your task is to find the animal with the longest life span. "
            "The animals are in the 'outside' location. Focus on the animal with the longest life span."
        ),
        subgoals=(
            _sg("be in the kitchen", "agent_in", "kitchen", weight=20),
            _sg("be outside", "agent_in", "outside", weight=30),
            _sg("focus on the elephant", "focused", "elephant", weight=50, terminal=True),
        ),
        focus_targets=("elephant",),
        max_steps=SHORT_STEPS,
        length="S",
    )
    return world, task


def boil() -> tuple[WorldConfig, TaskSpec]:
    rooms = ["kitchen", "hallway", "living room", "workshop", "outside"]
    world = WorldConfig(
        name="boil",
        rooms=rooms,
        doors=[
            _door("hallway", "kitchen"),
            _door("hallway", "living room", True),
            _door("hallway", "workshop"),
            _door("kitchen", "outside"),
        ],
        things=[
            _t("stove", "stove", "kitchen", ("device", "heat_source", "container")),
            _t("cupboard", "cupboard", "kitchen", ("container", "openable")),
            _t("pot", "metal pot", "cupboard", ("container", "portable")),
            _t("water", "water", "pot", ("substance",), temperature=20, melting=0, boiling=100),
            _t("counter", "counter", "kitchen", ("container",)),
            _t("glass_cup", "glass cup", "counter", ("container", "portable")),
            _t("cup_water", "water", "glass_cup", ("substance",), temperature=20, melting=0, boiling=100),
            _t("lighter", "lighter", "workshop", ("portable", "igniter")),
            _t("workbench", "workbench", "workshop", ("container",)),
            _t("recipe", "recipe card", "living room", ("portable", "readable"),
               text="Heat water until it bubbles and turns to steam."),
        ],
        start_room="hallway",
        variation=Variation(
            start_rooms=["hallway", "living room", "kitchen"],
            placements={"lighter": ["workshop", "workbench", "counter", "living room"]},
            distractors=_clutter(),
            distractor_rooms=rooms,
            max_distractors=4,
            alternatives=[("stove", "lighter")],
        ),
    )
    task = TaskSpec(
        task_id="boil",
        family="boil",
        description=(
            "Your task is to boil water. First, focus on the water in the metal pot. "
            "Then, take actions that will cause it to change its state of matter."
        ),
        subgoals=(
            _sg("be in the kitchen", "agent_in", "kitchen", weight=10),
            _sg("focus on the water", "focused", "water", weight=15),
            _sg("water starts heating", "state_at_least", "water", "temperature", 50, weight=25),
            _sg("water turns to gas", "state_is", "water", "phase", "gas", weight=50, terminal=True),
        ),
        focus_targets=("water",),
        max_steps=LONG_STEPS,
        length="L",
    )
    return world, task


def grow_plant() -> tuple[WorldConfig, TaskSpec]:
    rooms = ["greenhouse", "hallway", "kitchen", "outside", "workshop"]
    world = WorldConfig(
        name="grow_plant",
        rooms=rooms,
        doors=[
            _door("hallway", "greenhouse"),
            _door("hallway", "kitchen", True),
            _door("greenhouse", "outside"),
            _door("hallway", "workshop"),
        ],
        things=[
            _t("seed_jar", "seed jar", "kitchen", ("container", "portable", "openable")),
            _t("pea_seed", "pea seed", "seed_jar", ("portable", "seed")),
            _t("pot_1", "flower pot 1", "greenhouse", ("container", "pot")),
            _t("pot_2", "flower pot 2", "greenhouse", ("container", "pot")),
            _t("jug", "jug", "kitchen", ("portable", "waterer")),
            _t("watering_can", "watering can", "greenhouse", ("portable", "waterer")),
            _t("shovel", "shovel", "workshop", ("portable",)),
        ],
        start_room="hallway",
        variation=Variation(
            start_rooms=["hallway", "kitchen", "workshop"],
            placements={
                "seed_jar": ["kitchen", "workshop", "greenhouse"],
                "jug": ["kitchen", "workshop"],
            },
            distractors=_clutter(),
            distractor_rooms=rooms,
            max_distractors=4,
            alternatives=[("jug", "watering_can")],
        ),
    )
    task = TaskSpec(
        task_id="grow_plant",
        family="grow_plant",
        description=(
            "Your task is to grow a pea plant from seed. First, focus on the pea seed. "
            "Then, plant it in a flower pot and make changes to the environment "
            "that help it grow until it reaches the reproducing stage."
        ),
        subgoals=(
            _sg("focus on the pea seed", "focused", "pea_seed", weight=10),
            _sg("plant the seed", "flag", "planted:pea_seed", weight=20),
            _sg("seedling stage", "state_at_least", "pea_seed", "growth", 3, weight=20),
            _sg("adult stage", "state_at_least", "pea_seed", "growth", 6, weight=20),
            _sg("reproducing stage", "state_at_least", "pea_seed", "growth", 9, weight=30, terminal=True),
        ),
        focus_targets=("pea_seed",),
        max_steps=LONG_STEPS,
        length="L",
    )
    return world, task


def friction() -> tuple[WorldConfig, TaskSpec]:
    rooms = ["workshop", "hallway", "kitchen", "living room"]
    world = WorldConfig(
        name="friction",
        rooms=rooms,
        doors=[
            _door("hallway", "workshop"),
            _door("hallway", "kitchen"),
            _door("hallway", "living room", True),
        ],
        things=[
            _t("aluminum_plane", "aluminum inclined plane", "workshop", ("container", "incline"), slide_time=3),
            _t("platinum_plane", "platinum inclined plane", "workshop", ("container", "incline"), slide_time=7),
            _t("block", "block", "workshop", ("portable",)),
            _t("stopwatch", "stopwatch", "workshop", ("portable", "device", "stopwatch")),
            _t("timer", "timer", "kitchen", ("portable", "device", "stopwatch")),
            _t("cabinet", "cabinet", "kitchen", ("container", "openable")),
        ],
        start_room="hallway",
        variation=Variation(
            start_rooms=["hallway", "living room", "kitchen"],
            placements={
                "block": ["workshop", "kitchen", "living room", "cabinet"],
                "stopwatch": ["workshop", "living room"],
            },
            distractors=_clutter(),
            distractor_rooms=rooms,
            max_distractors=4,
            alternatives=[("stopwatch", "timer")],
        ),
    )
    task = TaskSpec(
        task_id="friction",
        family="friction",
        description=(
            "Your task is to determine which of the two inclined planes (aluminum, platinum) "
            "has the most friction. After completing your experiment, focus on the inclined plane "
            "with the most friction."
        ),
        subgoals=(
            _sg("be in the workshop", "agent_in", "workshop", weight=10),
            _sg("hold the block", "holding", "block", weight=10),
            _sg("time the aluminum plane", "flag", "measured:aluminum_plane", weight=25),
            _sg("time the platinum plane", "flag", "measured:platinum_plane", weight=25),
            _sg("focus on the platinum plane", "focused", "platinum_plane", weight=30, terminal=True),
        ),
        focus_targets=("platinum_plane",),
        max_steps=LONG_STEPS,
        length="L",
    )
    return world, task


BUILTINS: dict[str, Callable[[], tuple[WorldConfig, TaskSpec]]] = {
    "pickplace": pickplace,
    "measure_temperature": measure_temperature,
    "lifespan": lifespan,
    "boil": boil,
    "grow_plant": grow_plant,
    "friction": friction,
}
SHORT_FAMILIES = ("pickplace", "measure_temperature", "lifespan")
LONG_FAMILIES = ("boil", "grow_plant", "friction")


def builtin(name: str) -> tuple[WorldConfig, TaskSpec]:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin world {name!r}; choose from {sorted(BUILTINS)}") from None

"""Deterministic text micro-world: configs, simulator, task families, solver."""

from clin.world.families import BUILTINS, LONG_FAMILIES, SHORT_FAMILIES, builtin
from clin.world.model import (
    INVENTORY,
    DoorSpec,
    Predicate,
    Subgoal,
    TaskSpec,
    ThingSpec,
    Variation,
    WorldConfig,
)
from clin.world.sim import TEMPLATES, UNKNOWN_ACTION, Simulator, StepResult
from clin.world.solver import check_solution, solve
from clin.world.variants import dump_scenario, load_scenario, make_variants, save_scenario

__all__ = [
    "BUILTINS", "LONG_FAMILIES", "SHORT_FAMILIES", "builtin", "INVENTORY", "DoorSpec",
    "Predicate", "Subgoal", "TaskSpec", "ThingSpec", "Variation", "WorldConfig",
    "TEMPLATES", "UNKNOWN_ACTION", "Simulator", "StepResult", "check_solution", "solve",
    "dump_scenario", "load_scenario", "make_variants", "save_scenario",
]

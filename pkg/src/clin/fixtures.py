"""Scripted scenarios built from solver output, shared by tests and demos."""

from __future__ import annotations

from clin.gateway.backends import BackendScript
from clin.gateway.request import Tag
from clin.world.families import pickplace
from clin.world.solver import check_solution, solve

DOOR_LEARNING = "Opening the door SHOULD BE NECESSARY to reach the kitchen."


def controller_reply(action: str, ids=(), rationale: str = "") -> str:
    id_list = ", ".join(str(i) for i in ids)
    return f"I used learning id(s): {id_list} $$$ {rationale or 'Next step.'} ### {action}"


def learning_script(world=None, task=None) -> tuple[BackendScript, list[str], int]:
    """Two-trial pick-and-place scenario.

    Trial 1 follows the solver's winning sequence only until half the reward
    is collected and then declares the task complete. The memory written
    after it holds one learning; trial 2 cites that learning and plays the
    full winning sequence. Returns the script, the winning sequence and
    the trial-1 score.
    """
    if world is None:
        world, task = pickplace()
    winning = solve(world, task, weight=1)
    prefix: list[str] = []
    for action in winning:
        prefix.append(action)
        score = check_solution(world, task, prefix)
        if score >= 50:
            break
    script = BackendScript()
    calls = 0
    for action in prefix:
        script.add(Tag.CONTROLLER_EXECUTOR, controller_reply(action), f"step:{calls}")
        calls += 1
    script.add(Tag.CONTROLLER_EXECUTOR, controller_reply("TASK_COMPLETE", rationale="I think I am done."), f"step:{calls}")
    calls += 1
    script.add(Tag.MEM_ADAPT, f"1. {DOOR_LEARNING}", "step:0")
    for action in winning:
        script.add(Tag.CONTROLLER_EXECUTOR, controller_reply(action, ids=(1,), rationale="Using learning 1."), f"step:{calls}")
        calls += 1
    script.add(Tag.MEM_ADAPT, f"1. {DOOR_LEARNING}\n2. Moving the banana to the purple box SHOULD BE NECESSARY to complete the task.", "step:1")
    return script, winning, check_solution(world, task, prefix)

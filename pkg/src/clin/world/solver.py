"""Best-first search over the micro-world state graph.

Used to certify that generated variants are solvable and to supply winning
action sequences for scripted fixtures.
"""

from __future__ import annotations

import heapq
import itertools

from clin.errors import Unsolvable
from clin.world.model import TaskSpec, WorldConfig
from clin.world.sim import Simulator

MAX_EXPANSIONS = 200_000


def relevant_ids(world: WorldConfig) -> set[str]:
    """Everything except the variant generator's distractor pool."""
    pool = {d.id for d in world.variation.distractors}
    return {t.id for t in world.things if t.id not in pool}


def candidate_actions(sim: Simulator, relevant: set[str]) -> list[str]:
    """Actions worth trying in the current state, pruned by capability tags."""
    if sim.pending:
        return [str(i) for i in range(len(sim.pending))]
    acts: list[str] = []
    for room in sim.adjacent():
        if sim._door_open(room):
            acts.append(f"go to {room}")
        else:
            acts.append(f"open door to {room}")
    things = [t for t in sim.accessible() if t.id in relevant]
    names = list(dict.fromkeys(t.name for t in things))
    by_name = {n: [t for t in things if t.name == n] for n in names}

    def any_tag(name, tag):
        return any(tag in t.tags for t in by_name[name])

    for n in names:
        ts = by_name[n]
        if any("openable" in t.tags and not t.is_open() for t in ts):
            acts.append(f"open {n}")
        if any("portable" in t.tags and t.location != "inventory" for t in ts):
            acts.append(f"pick up {n}")
        if any("device" in t.tags and not t.state.get("is_on") for t in ts):
            acts.append(f"activate {n}")
        if any("device" in t.tags and t.state.get("is_on") for t in ts):
            acts.append(f"deactivate {n}")
        if any(t.id in sim.task.focus_targets and t.id not in sim.focused for t in ts):
            acts.append(f"focus on {n}")
    for a in names:
        if any_tag(a, "portable"):
            for b in names:
                if b == a or not any_tag(b, "container"):
                    continue
                if all(t.location in {c.id for c in by_name[b]} for t in by_name[a]):
                    continue
                acts.append(f"move {a} to {b}")
        for tool in ("thermometer", "igniter", "waterer"):
            if any_tag(a, tool):
                for b in names:
                    if b != a:
                        acts.append(f"use {a} on {b}")
    acts.append("wait")
    return acts


def _heuristic(sim: Simulator) -> int:
    return sum(1 for _ in sim.unmet())


def solve(
    world: WorldConfig,
    task: TaskSpec,
    max_expansions: int = MAX_EXPANSIONS,
    weight: int = 5,
) -> list[str]:
    """Shortest-ish action sequence reaching score 100 within ``task.max_steps``.

    Weighted best-first search (f = depth + weight * unmet subgoals) with
    duplicate detection on the simulator's dynamic state.
    """
    root = Simulator(world, task)
    root.reset()
    relevant = relevant_ids(world)
    counter = itertools.count()
    frontier = [(weight * _heuristic(root), next(counter), root, ())]
    seen = {root.state_key()}
    expansions = 0
    while frontier:
        _, _, sim, path = heapq.heappop(frontier)
        expansions += 1
        if expansions > max_expansions:
            break
        if len(path) >= task.max_steps:
            continue
        for action in candidate_actions(sim, relevant):
            child = sim.clone()
            result = child.step(action)
            if result.done:
                if result.score == 100:
                    return list(path) + [action]
                continue
            key = child.state_key()
            if key in seen:
                continue
            seen.add(key)
            g = len(path) + 1
            heapq.heappush(frontier, (g + weight * _heuristic(child), next(counter), child, path + (action,)))
    raise Unsolvable(f"no winning sequence for {task.task_id!r} in {world.name!r} variant {world.variant_id}")


def check_solution(world: WorldConfig, task: TaskSpec, actions: list[str]) -> int:
    sim = Simulator(world, task)
    sim.reset()
    result = None
    for a in actions:
        result = sim.step(a)
        if result.done:
            break
    return result.score if result else 0

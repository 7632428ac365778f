"""
Playing a micro-world by hand
=============================

Each builtin family comes with a solver; run its plan and watch the score
climb as subgoals latch.
"""

from clin.world.families import BUILTINS, builtin
from clin.world.sim import Simulator
from clin.world.solver import solve

world, task = builtin("pickplace")
sim = Simulator(world, task)
obs, _ = sim.reset()
print(task.description)
print(obs, "\n")
for action in solve(world, task):
    result = sim.step(action)
    print(f"{result.score:3d}  {action}")
print("\nterminal:", result.terminal_reason.value)
print("families:", ", ".join(BUILTINS))

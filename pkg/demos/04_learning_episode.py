"""
A scripted two-trial episode
============================

A deterministic backend plays half the task, writes one learning, then
uses it to finish. The trace replays cleanly against the simulator.
"""

import tempfile
from pathlib import Path

from clin.fixtures import learning_script
from clin.gateway.backends import ScriptedBackend
from clin.orchestrator import Runner
from clin.tracing import TraceWriter, replay
from clin.world.families import pickplace

world, task = pickplace()
script, _, _ = learning_script(world, task)
path = Path(tempfile.mkdtemp()) / "episode.jsonl"

with TraceWriter(path) as writer:
    record = Runner(ScriptedBackend(script), sink=writer).run_adaptation(world, task)

print("scores per trial:", record.scores)
for line in record.snapshots[0].lines():
    print("  memory:", line)
print(replay(path))

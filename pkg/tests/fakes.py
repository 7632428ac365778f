"""A programmable stand-in for the model, for orchestrator law checks."""

from clin.fixtures import controller_reply
from clin.gateway.request import Tag

# pickplace solution prefixes and the score each reaches
PICKPLACE_WIN = [
    "open door to kitchen", "go to kitchen", "open fridge", "pick up banana", "focus on banana",
    "open door to bathroom", "go to bathroom", "move banana to purple box",
]
PREFIX_FOR_SCORE = {0: 0, 25: 4, 50: 5, 70: 7, 100: 8}


def lesson(k: int) -> str:
    return f"Trial {k} SHOULD BE NECESSARY to learn lesson {k}."


class PlanBackend:
    """Trial k plays the first ``PREFIX_FOR_SCORE[scores[k]]`` winning actions
    and then declares completion; memory after trial k is ``lesson(k)``."""

    name = "plan"

    def __init__(self, scores, memory_reply=None, meta_reply="1. Meta SHOULD BE NECESSARY to generalize."):
        self.scores = list(scores)
        self.memory_reply = memory_reply or (lambda k: f"1. {lesson(k)}")
        self.meta_reply = meta_reply
        self.requests = []
        self.trial = 0
        self.step = 0

    def complete(self, req):
        self.requests.append(req)
        if req.tag is Tag.CONTROLLER_EXECUTOR:
            n = PREFIX_FOR_SCORE[self.scores[self.trial]]
            i, self.step = self.step, self.step + 1
            return controller_reply(PICKPLACE_WIN[i] if i < n else "TASK_COMPLETE")
        if req.tag is Tag.MEM_ADAPT:
            k, self.trial, self.step = self.trial, self.trial + 1, 0
            return self.memory_reply(k)
        return self.meta_reply

    def by_tag(self, tag):
        return [r for r in self.requests if r.tag is tag]


def make_episode(scores, task_id="t", task_type="S", steps=None, max_steps=30, initial_memory=None, mode="adapt", variant_id=0):
    """Synthetic record; trial k has ``steps[k]`` steps ending at ``scores[k]``."""
    from clin.memory import MemorySnapshot
    from clin.records import EpisodeRecord, Step, TrialTrace

    steps = steps or [1] * len(scores)
    rec = EpisodeRecord(
        task_id=task_id, task=f"do {task_id}", task_type=task_type, variant_id=variant_id, world=task_id,
        initial_memory=initial_memory, max_trials=5, mode=mode,
    )
    for k, (score, n) in enumerate(zip(scores, steps)):
        trace = TrialTrace(rec.task, "start", max_steps=max_steps, trial_index=k)
        for i in range(n):
            trace.append(Step("", "wait", "ok", score if i == n - 1 else 0))
        rec.trials.append(trace)
        rec.snapshots.append(MemorySnapshot(source_trial=k, source_reward=score))
    return rec


def write_fixture_trace(path, clock=None):
    """Run the two-trial learning fixture and write its trace to ``path``."""
    from clin.fixtures import learning_script
    from clin.gateway.backends import ScriptedBackend
    from clin.orchestrator import Runner, RunSettings
    from clin.tracing import TraceWriter
    from clin.world.families import pickplace

    world, task = pickplace()
    script, _, _ = learning_script(world, task)
    kwargs = {"clock": clock} if clock else {}
    with TraceWriter(path, **kwargs) as writer:
        return Runner(ScriptedBackend(script), RunSettings(strict_memory=True), sink=writer).run_adaptation(world, task)

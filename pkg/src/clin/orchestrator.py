"""Adaptation and generalization loops."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Protocol, Sequence

from clin.agent import AgentDecision, Special, decide
from clin.errors import GroundingFailure, UnparseableResponse
from clin.gateway.backends import Backend
from clin.gateway.prompts import DEFAULT_TOKEN_BUDGET, render_memory_prompt
from clin.gateway.request import Tag
from clin.grounding import Embedder, refine_loop
from clin.memory import (
    MemorySnapshot,
    SnapshotKind,
    free_text_memory,
    parse_memory,
    select_crucial_memories,
)
from clin.records import EpisodeRecord, Step, TerminalReason, TrialTrace
from clin.world.model import TaskSpec, WorldConfig
from clin.world.sim import Simulator

GEN_KINDS = {"gen-env": Tag.MEM_GEN_ENV, "gen-task": Tag.MEM_GEN_TASK}


@dataclass(frozen=True)
class RunSettings:
    max_trials: int = 5
    window: int = 3
    archive_cap: int = 10
    threshold: float = 0.9
    max_tries: int = 5
    strict_memory: bool = False
    abl_causal_memory: bool = False
    abl_controller: bool = False
    token_budget: int | None = DEFAULT_TOKEN_BUDGET

    def __post_init__(self) -> None:
        for name in ("max_trials", "window", "archive_cap", "max_tries"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.threshold <= 1:
            raise ValueError("threshold must be in (0, 1]")

    def flags(self) -> dict:
        return asdict(self)


class TraceSink(Protocol):
    def emit(self, record: dict) -> None: ...


class NullSink:
    def emit(self, record: dict) -> None:
        pass


class _Declared(Exception):
    """The agent wrote TASK_COMPLETE while refining an action."""


class Runner:
    """Runs trials and episodes against one backend.

    A runner is sequential; use one runner per concurrently running episode.
    ``counters`` accumulates dropped learning ids, dropped memory lines and
    grounding failures across everything the runner has done.
    """

    def __init__(
        self,
        backend: Backend,
        settings: RunSettings | None = None,
        *,
        embedder: Embedder | None = None,
        sink: TraceSink | None = None,
    ):
        self.backend = backend
        self.settings = settings or RunSettings()
        self.embedder = embedder
        self.sink = sink or NullSink()
        self.counters = {"dropped_ids": 0, "dropped_lines": 0, "grounding_failures": 0}
        # (trial, step or phase) of the call in flight, for error reports
        self.position: tuple[int, int | str] = (0, "start")

    # -- one trial -------------------------------------------------------
    def run_trial(
        self, world: WorldConfig, task: TaskSpec, memory: MemorySnapshot | None, trial_index: int
    ) -> TrialTrace:
        s = self.settings
        sim = Simulator(world, task)
        obs, space = sim.reset()
        trace = TrialTrace(task.description, obs, max_steps=task.max_steps, trial_index=trial_index)
        self.sink.emit({"type": "trial_start", "trial": trial_index, "observation": obs})

        def ask(feedback: str | None = None) -> AgentDecision:
            d = decide(
                self.backend,
                task.description,
                memory,
                trace,
                space,
                ambiguity_pending=sim.pending is not None,
                action_only=s.abl_controller,
                feedback=feedback,
                token_budget=s.token_budget,
            )
            self.counters["dropped_ids"] += d.dropped_ids
            return d

        while not sim.done:
            self.position = (trial_index, len(trace.steps) + 1)
            try:
                decision = ask()
                if decision.special is Special.TASK_COMPLETE:
                    raise _Declared
                if decision.special is Special.AMBIGUITY_CHOICE:
                    action, tries = decision.command(), 1
                else:
                    latest = [decision]

                    def refine(feedback: str) -> str:
                        d = ask(feedback)
                        if d.special is Special.TASK_COMPLETE:
                            raise _Declared
                        latest.append(d)
                        return d.command()

                    try:
                        action, tries = refine_loop(
                            refine, decision.command(), space, s.max_tries, s.threshold, self.embedder
                        )
                    except GroundingFailure as exc:
                        # executed anyway so the simulator reports it as unknown
                        action, tries = exc.candidate, exc.tries
                        self.counters["grounding_failures"] += 1
                    decision = latest[-1]
            except _Declared:
                trace.terminal_reason = TerminalReason.DECLARED
                break
            except UnparseableResponse:
                trace.terminal_reason = TerminalReason.FAILED
                break
            result = sim.step(action)
            step = Step(
                decision.rationale, action, result.observation, result.score,
                decision.used_learning_ids, tries,
            )
            trace.append(step)
            self.sink.emit(
                {"type": "step", "trial": trial_index, "t": len(trace.steps), **step.to_record(),
                 "done": result.done, "terminal_reason": result.terminal_reason.value}
            )
            if result.done:
                trace.terminal_reason = result.terminal_reason
            space = sim.admissible()
        self.sink.emit(
            {"type": "trial_end", "trial": trial_index, "final_reward": trace.final_reward,
             "terminal_reason": trace.terminal_reason.value}
        )
        return trace

    # -- memory generator -----------------------------------------------
    def generate_memory(
        self, trace: TrialTrace, history: Sequence[MemorySnapshot], task: TaskSpec
    ) -> MemorySnapshot:
        s = self.settings
        self.position = (trace.trial_index, "memory")
        req = render_memory_prompt(
            Tag.MEM_ADAPT, trace, list(history), window=s.window, free_form=s.abl_causal_memory
        )
        body = self.backend.complete(req)
        if s.abl_causal_memory:
            snap = free_text_memory(
                body, source_trial=trace.trial_index, source_reward=trace.final_reward, task=task.description
            )
        else:
            snap = parse_memory(
                body,
                strict=s.strict_memory,
                source_trial=trace.trial_index,
                source_reward=trace.final_reward,
                task=task.description,
            )
            self.counters["dropped_lines"] += snap.dropped
        self.sink.emit({"type": "snapshot", "trial": trace.trial_index, "snapshot": snap.to_record()})
        return snap

    def generate_meta_memory(
        self, kind: Tag, archive: list[tuple[MemorySnapshot, int]], task: TaskSpec
    ) -> MemorySnapshot:
        self.position = (-1, "meta-memory")
        req = render_memory_prompt(kind, None, archive, new_task=task.description)
        body = self.backend.complete(req)
        best = max(r for _, r in archive)
        if self.settings.abl_causal_memory:
            lines = free_text_memory(body).free_text
            meta = MemorySnapshot(
                free_text=lines, source_trial=-1, source_reward=best, kind=SnapshotKind.META,
                task=task.description, archive=tuple(archive),
            )
        else:
            meta = parse_memory(
                body,
                strict=self.settings.strict_memory,
                source_trial=-1,
                source_reward=best,
                kind=SnapshotKind.META,
                task=task.description,
                archive=archive,
            )
            self.counters["dropped_lines"] += meta.dropped
        self.sink.emit({"type": "meta_snapshot", "snapshot": meta.to_record()})
        return meta

    # -- episodes ---------------------------------------------------------
    def run_adaptation(
        self,
        world: WorldConfig,
        task: TaskSpec,
        initial_memory: MemorySnapshot | None = None,
        *,
        mode: str = "adapt",
    ) -> EpisodeRecord:
        s = self.settings
        record = EpisodeRecord(
            task_id=task.task_id,
            task=task.description,
            task_type=task.length,
            variant_id=world.variant_id,
            world=world.name,
            initial_memory=initial_memory,
            max_trials=s.max_trials,
            mode=mode,
            metadata={"backend": self.backend.name, "seed": world.seed, "settings": s.flags()},
        )
        self.sink.emit(
            {
                "type": "episode_start",
                "episode_id": record.episode_id,
                "mode": mode,
                "world": world.to_dict(),
                "task": task.to_dict(),
                "settings": s.flags(),
                "initial_memory": initial_memory.to_record() if initial_memory else None,
            }
        )
        history: list[MemorySnapshot] = [initial_memory] if initial_memory is not None else []
        memory = initial_memory
        for k in range(s.max_trials):
            trace = self.run_trial(world, task, memory, k)
            snap = self.generate_memory(trace, history, task)
            record.trials.append(trace)
            record.snapshots.append(snap)
            history.append(snap)
            memory = snap
            if trace.final_reward == 100:
                break
        record.metadata["counters"] = dict(self.counters)
        self.sink.emit(
            {"type": "episode_end", "episode_id": record.episode_id, "scores": record.scores,
             "content_hash": record.content_hash()}
        )
        return record

    def run_generalization(
        self, kind: str | Tag, world: WorldConfig, task: TaskSpec, past: Sequence[EpisodeRecord]
    ) -> EpisodeRecord:
        """Meta-memory from the best trial of each past episode, then adaptation.

        Trial 0 of the returned record is the zero-shot generalization score;
        the best trial is generalization followed by adaptation.
        """
        tag = GEN_KINDS[kind] if isinstance(kind, str) else Tag(kind)
        if tag not in (Tag.MEM_GEN_ENV, Tag.MEM_GEN_TASK):
            raise ValueError(f"not a generalization kind: {kind!r}")
        archive = select_crucial_memories(past, self.settings.archive_cap)
        meta = self.generate_meta_memory(tag, archive, task)
        mode = "gen-env" if tag is Tag.MEM_GEN_ENV else "gen-task"
        return self.run_adaptation(world, task, meta, mode=mode)


def run_adaptation(
    backend: Backend,
    world: WorldConfig,
    task: TaskSpec,
    initial_memory: MemorySnapshot | None = None,
    settings: RunSettings | None = None,
    **kwargs,
) -> EpisodeRecord:
    return Runner(backend, settings, **kwargs).run_adaptation(world, task, initial_memory)


def run_generalization(
    backend: Backend,
    kind: str | Tag,
    world: WorldConfig,
    task: TaskSpec,
    past: Sequence[EpisodeRecord],
    settings: RunSettings | None = None,
    **kwargs,
) -> EpisodeRecord:
    return Runner(backend, settings, **kwargs).run_generalization(kind, world, task, past)

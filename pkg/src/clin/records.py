"""Trial and episode records shared by the agent, orchestrator and harness."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from clin.memory import MemorySnapshot


class TerminalReason(str, Enum):
    RUNNING = "RUNNING"
    COMPLETE = "COMPLETE"
    FAILED_FOCUS = "FAILED_FOCUS"
    TIMEOUT = "TIMEOUT"
    # agent wrote TASK_COMPLETE before the simulator ended the trial
    DECLARED = "DECLARED"
    # trial aborted by an unparseable model response
    FAILED = "FAILED"


@dataclass(frozen=True)
class Step:
    """One (goal, action, observation, score) tuple; ``score`` is cumulative."""

    goal: str
    action: str
    observation: str
    score: int
    used_ids: tuple[int, ...] = ()
    tries: int = 1

    def to_record(self) -> dict:
        return {
            "goal": self.goal,
            "action": self.action,
            "observation": self.observation,
            "score": self.score,
            "used_ids": list(self.used_ids),
            "tries": self.tries,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Step":
        return cls(
            goal=rec["goal"],
            action=rec["action"],
            observation=rec["observation"],
            score=int(rec["score"]),
            used_ids=tuple(rec.get("used_ids", ())),
            tries=int(rec.get("tries", 1)),
        )


@dataclass
class TrialTrace:
    task: str
    initial_observation: str = ""
    steps: list[Step] = field(default_factory=list)
    max_steps: int = 30
    terminal_reason: TerminalReason = TerminalReason.RUNNING
    trial_index: int = 0

    def append(self, step: Step) -> None:
        if len(self.steps) >= self.max_steps:
            raise ValueError("trial already at max_steps")
        self.steps.append(step)

    @property
    def final_reward(self) -> int:
        return self.steps[-1].score if self.steps else 0

    def __len__(self) -> int:
        return len(self.steps)

    def to_record(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "task": self.task,
            "initial_observation": self.initial_observation,
            "max_steps": self.max_steps,
            "terminal_reason": self.terminal_reason.value,
            "final_reward": self.final_reward,
            "steps": [s.to_record() for s in self.steps],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TrialTrace":
        return cls(
            task=rec["task"],
            initial_observation=rec.get("initial_observation", ""),
            steps=[Step.from_record(s) for s in rec["steps"]],
            max_steps=int(rec["max_steps"]),
            terminal_reason=TerminalReason(rec["terminal_reason"]),
            trial_index=int(rec.get("trial_index", 0)),
        )


@dataclass
class EpisodeRecord:
    """Up to K trials of one (task, environment) pair and their memories."""

    task_id: str
    task: str
    task_type: str  # "S" or "L"
    variant_id: int
    world: str
    trials: list[TrialTrace] = field(default_factory=list)
    snapshots: list[MemorySnapshot] = field(default_factory=list)
    initial_memory: MemorySnapshot | None = None
    max_trials: int = 5
    mode: str = "adapt"
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def scores(self) -> list[int]:
        return [t.final_reward for t in self.trials]

    @property
    def episode_id(self) -> str:
        return f"{self.mode}-{self.task_id}-v{self.variant_id}"

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "task": self.task,
            "task_type": self.task_type,
            "variant_id": self.variant_id,
            "world": self.world,
            "mode": self.mode,
            "max_trials": self.max_trials,
            "metadata": self.metadata,
            "initial_memory": self.initial_memory.to_record() if self.initial_memory else None,
            "trials": [t.to_record() for t in self.trials],
            "snapshots": [s.to_record() for s in self.snapshots],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "EpisodeRecord":
        init = rec.get("initial_memory")
        return cls(
            task_id=rec["task_id"],
            task=rec["task"],
            task_type=rec["task_type"],
            variant_id=int(rec["variant_id"]),
            world=rec["world"],
            trials=[TrialTrace.from_record(t) for t in rec["trials"]],
            snapshots=[MemorySnapshot.from_record(s) for s in rec["snapshots"]],
            initial_memory=MemorySnapshot.from_record(init) if init else None,
            max_trials=int(rec.get("max_trials", 5)),
            mode=rec.get("mode", "adapt"),
            metadata=rec.get("metadata", {}),
        )

    def content_hash(self) -> str:
        """SHA-256 over trials and snapshots; metadata and timestamps excluded."""
        payload = {
            "task_id": self.task_id,
            "variant_id": self.variant_id,
            "initial_memory": self.initial_memory.to_record() if self.initial_memory else None,
            "trials": [t.to_record() for t in self.trials],
            "snapshots": [s.to_record() for s in self.snapshots],
        }
        return stable_hash(payload)


def stable_hash(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()

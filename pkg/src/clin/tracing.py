"""Line-oriented trace files and replay against the simulator.

Each line is one JSON object with a ``type`` (episode_start, trial_start,
step, trial_end, snapshot, meta_snapshot, episode_end), a ``hash`` over the
record's content and a ``ts`` wall-clock timestamp. ``ts`` is the only
field that differs between identical runs and is left out of every hash.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from clin.errors import DivergenceAt, TraceFormatError
from clin.records import stable_hash
from clin.world.model import TaskSpec, WorldConfig
from clin.world.sim import Simulator

VOLATILE = ("ts", "hash")


def record_hash(record: dict) -> str:
    return stable_hash({k: v for k, v in record.items() if k not in VOLATILE})


class TraceWriter:
    """Appends records to a file, flushing after each so partial runs stay readable."""

    def __init__(self, path: str | Path, clock=time.time):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", encoding="utf-8")
        self._clock = clock

    def emit(self, record: dict) -> None:
        rec = dict(record)
        rec["hash"] = record_hash(rec)
        rec["ts"] = self._clock()
        self._fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class ListSink:
    def __init__(self):
        self.records: list[dict] = []

    def emit(self, record: dict) -> None:
        self.records.append(dict(record))


def read_trace(path: str | Path) -> list[dict]:
    text = Path(path).read_text(encoding="utf-8")
    records = []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(lineno, f"not a JSON record ({exc.msg})") from None
        if not isinstance(rec, dict) or "type" not in rec:
            raise TraceFormatError(lineno, "record has no 'type'")
        records.append(rec)
    if not records:
        raise TraceFormatError(1, "empty trace")
    if records[-1]["type"] != "episode_end":
        raise TraceFormatError(len(lines), "trace ends before episode_end (truncated?)")
    return records


def trace_content_hash(path: str | Path) -> str:
    """Hash of a whole trace with timestamps removed."""
    return stable_hash([{k: v for k, v in r.items() if k != "ts"} for r in read_trace(path)])


@dataclass(frozen=True)
class ReplayReport:
    episodes: int
    trials: int
    steps: int


def replay(path: str | Path) -> ReplayReport:
    """Re-run every recorded action and compare observations and scores.

    Raises :class:`DivergenceAt` at the first mismatch; ``step`` counts step
    records from 1 across the whole file, trial start observations are
    step 0 of their trial.
    """
    records = read_trace(path)
    world = task = sim = None
    episodes = trials = steps = 0
    trial = -1
    for lineno, rec in enumerate(records, start=1):
        kind = rec["type"]
        if kind == "episode_start":
            try:
                world = WorldConfig.from_dict(rec["world"])
                task = TaskSpec.from_dict(rec["task"])
            except (KeyError, ValueError) as exc:
                raise TraceFormatError(lineno, f"bad episode header: {exc}") from None
            episodes += 1
        elif kind == "trial_start":
            if world is None:
                raise TraceFormatError(lineno, "trial before episode header")
            trial = rec.get("trial", trial + 1)
            sim = Simulator(world, task)
            obs, _ = sim.reset()
            if obs != rec.get("observation"):
                raise DivergenceAt(steps, trial, 0, "observation", rec.get("observation"), obs)
            trials += 1
        elif kind == "step":
            if sim is None:
                raise TraceFormatError(lineno, "step before trial start")
            steps += 1
            try:
                action, t = rec["action"], rec["t"]
            except KeyError as exc:
                raise TraceFormatError(lineno, f"step record missing {exc}") from None
            if sim.done:
                raise DivergenceAt(steps, trial, t, "done", False, True)
            result = sim.step(action)
            for field, actual in (
                ("observation", result.observation),
                ("score", result.score),
                ("done", result.done),
                ("terminal_reason", result.terminal_reason.value),
            ):
                if field in rec and rec[field] != actual:
                    raise DivergenceAt(steps, trial, t, field, rec[field], actual)
    return ReplayReport(episodes, trials, steps)

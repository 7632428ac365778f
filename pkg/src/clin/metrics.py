"""Episode metrics and the summary table."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from statistics import mean
from typing import Sequence

from clin.errors import EmptyInput
from clin.records import EpisodeRecord

COLUMNS = (
    "task", "type", "episodes", "base", "adapt", "gen", "ga",
    "trials_to_success", "pct_improved", "norm_steps",
)


def trials_to_success(scores: Sequence[int], max_trials: int) -> int:
    for i, s in enumerate(scores):
        if s == 100:
            return i + 1
    return max_trials


def improved(scores: Sequence[int]) -> bool:
    return len(scores) > 1 and max(scores[1:]) > scores[0]


def normalized_steps(record: EpisodeRecord) -> float:
    return mean(len(t.steps) / t.max_steps for t in record.trials)


def _is_gen(record: EpisodeRecord) -> bool:
    return record.initial_memory is not None


def _avg(values) -> float | None:
    values = list(values)
    return mean(values) if values else None


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return f"{float(v):.2f}"


@dataclass
class Row:
    task: str
    type: str
    episodes: int
    base: float | None
    adapt: float | None
    gen: float | None
    ga: float | None
    trials_to_success: float
    pct_improved: float
    norm_steps: float
    delta_avg: float | None = None

    def values(self, with_delta: bool) -> list:
        vals = [getattr(self, c) for c in COLUMNS]
        vals[2] = str(self.episodes)
        if with_delta:
            vals.append(self.delta_avg)
        return vals


@dataclass
class MetricsReport:
    rows: list[Row]
    aggregates: dict[str, Row]
    curves: dict[str, list[int]] = field(default_factory=dict)
    delta_avg: float | None = None

    def row(self, task: str) -> Row:
        return next(r for r in self.rows if r.task == task)

    def to_csv(self) -> str:
        with_delta = self.delta_avg is not None
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(COLUMNS) + (["delta_avg"] if with_delta else []))
        for r in self.rows + [self.aggregates[k] for k in ("S", "L", "All") if k in self.aggregates]:
            w.writerow([_cell(v) for v in r.values(with_delta)])
        return buf.getvalue()

    def curves_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["episode", "trial", "score"])
        for ep, scores in sorted(self.curves.items()):
            for i, s in enumerate(scores):
                w.writerow([ep, i, s])
        return buf.getvalue()


def _task_row(task: str, records: list[EpisodeRecord]) -> Row:
    adapt = [r for r in records if not _is_gen(r)]
    gen = [r for r in records if _is_gen(r)]
    return Row(
        task=task,
        type=records[0].task_type,
        episodes=len(records),
        base=_avg(r.scores[0] for r in adapt),
        adapt=_avg(max(r.scores) for r in adapt),
        gen=_avg(r.scores[0] for r in gen),
        ga=_avg(max(r.scores) for r in gen),
        trials_to_success=mean(trials_to_success(r.scores, r.max_trials) for r in records),
        pct_improved=100.0 * mean(improved(r.scores) for r in records),
        norm_steps=mean(normalized_steps(r) for r in records),
    )


def _aggregate(name: str, rows: list[Row]) -> Row:
    # macro average over tasks
    return Row(
        task=name,
        type=name,
        episodes=sum(r.episodes for r in rows),
        base=_avg(r.base for r in rows if r.base is not None),
        adapt=_avg(r.adapt for r in rows if r.adapt is not None),
        gen=_avg(r.gen for r in rows if r.gen is not None),
        ga=_avg(r.ga for r in rows if r.ga is not None),
        trials_to_success=mean(r.trials_to_success for r in rows),
        pct_improved=mean(r.pct_improved for r in rows),
        norm_steps=mean(r.norm_steps for r in rows),
        delta_avg=_avg(r.delta_avg for r in rows if r.delta_avg is not None),
    )


def final_score(record: EpisodeRecord) -> int:
    return max(record.scores)


def delta_avg(main: Sequence[EpisodeRecord], ablation: Sequence[EpisodeRecord]) -> float:
    """Mean best-trial score of ``ablation`` minus that of ``main``."""
    if not main or not ablation:
        raise EmptyInput("delta needs two non-empty record sets")
    return mean(final_score(r) for r in ablation) - mean(final_score(r) for r in main)


def compute_metrics(
    records: Sequence[EpisodeRecord], compare: Sequence[EpisodeRecord] | None = None
) -> MetricsReport:
    """Per-task rows plus S / L / All aggregates.

    With ``compare`` (e.g. an ablation run) each task row and the report
    carry ``delta_avg`` = compare - records on the best-trial score.
    """
    records = [r for r in records if r.trials]
    if not records:
        raise EmptyInput("no episode records with trials")
    by_task: dict[str, list[EpisodeRecord]] = {}
    for r in records:
        by_task.setdefault(r.task_id, []).append(r)
    other: dict[str, list[EpisodeRecord]] = {}
    for r in compare or ():
        if r.trials:
            other.setdefault(r.task_id, []).append(r)
    rows = []
    for task in sorted(by_task):
        row = _task_row(task, by_task[task])
        if compare is not None and task in other:
            row.delta_avg = delta_avg(by_task[task], other[task])
        rows.append(row)
    aggregates = {}
    # a lone task row is its own summary
    if len(rows) > 1:
        for kind in ("S", "L"):
            sub = [r for r in rows if r.type == kind]
            if sub:
                aggregates[kind] = _aggregate(kind, sub)
        aggregates["All"] = _aggregate("All", rows)
    report = MetricsReport(rows, aggregates, {r.episode_id: r.scores for r in records})
    if compare is not None:
        report.delta_avg = delta_avg(records, [r for r in compare if r.trials])
    return report

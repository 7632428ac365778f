"""Run configuration, backend construction, episode persistence."""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from clin.errors import ConfigError, EmptyInput
from clin.gateway.backends import BackendScript, HTTPChatBackend, LiveConfig, ScriptedBackend
from clin.metrics import compute_metrics
from clin.orchestrator import Runner, RunSettings
from clin.records import EpisodeRecord
from clin.tracing import TraceWriter
from clin.world.model import TaskSpec, WorldConfig
from clin.world.variants import load_scenario, make_variants, save_scenario

MODES = ("adapt", "gen-env", "gen-task", "g+a", "ablation")
ABLATIONS = ("causal-memory", "controller")


@dataclass
class RunConfig:
    """Everything a ``run`` needs. Loadable from YAML; keys match field names."""

    mode: str = "adapt"
    backend: str = ""
    world: str = ""
    out: str = ""
    seed: int | None = None
    past: list[str] = field(default_factory=list)
    trials: int = 5
    window: int = 3
    archive: int = 10
    threshold: float = 0.9
    retries: int = 5
    max_steps: int | None = None
    variants: int = 1
    jobs: int = 1
    strict: bool = False
    ablate: list[str] = field(default_factory=list)
    gen_kind: str = "env"
    endpoint: str = LiveConfig.endpoint
    model: str = LiveConfig.model
    api_key_env: str = LiveConfig.api_key_env

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
        if self.backend != "live" and not self.backend.startswith("script:"):
            raise ConfigError("backend", "use 'live' or 'script:PATH'")
        if self.backend.startswith("script:") and not Path(self.backend[7:]).is_file():
            raise ConfigError("backend", f"script file {self.backend[7:]!r} not found")
        if not self.world:
            raise ConfigError("world", "a world file or builtin:NAME is required")
        if not self.out:
            raise ConfigError("out", "an output directory is required")
        for name in ("trials", "window", "archive", "retries", "variants", "jobs"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(name, "must be a positive integer")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps", "must be a positive integer")
        if not 0 < self.threshold <= 1:
            raise ConfigError("threshold", "must be in (0, 1]")
        if self.variants > 1 and self.seed is None:
            raise ConfigError("seed", "required when generating variants")
        if self.mode in ("gen-env", "gen-task", "g+a") and not self.past:
            raise ConfigError("past", f"mode {self.mode} needs past episode directories")
        if self.mode == "ablation" and not self.ablate:
            raise ConfigError("ablate", f"name at least one of {', '.join(ABLATIONS)}")
        for a in self.ablate:
            if a not in ABLATIONS:
                raise ConfigError("ablate", f"unknown ablation {a!r}")
        if self.gen_kind not in ("env", "task"):
            raise ConfigError("gen_kind", "must be 'env' or 'task'")

    def settings(self) -> RunSettings:
        trials = 1 if self.mode in ("gen-env", "gen-task") else self.trials
        return RunSettings(
            max_trials=trials,
            window=self.window,
            archive_cap=self.archive,
            threshold=self.threshold,
            max_tries=self.retries,
            strict_memory=self.strict,
            abl_causal_memory="causal-memory" in self.ablate,
            abl_controller="controller" in self.ablate,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        for key in d:
            if key not in names:
                raise ConfigError(key, "unknown run config key")
        cfg = cls(**d)
        if isinstance(cfg.past, str):
            cfg.past = [cfg.past]
        return cfg


def load_run_config(path: str | Path) -> RunConfig:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError("config", f"cannot load {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "run config must be a mapping")
    return RunConfig.from_dict(data)


def make_backend(cfg: RunConfig):
    """A fresh backend; scripted backends are per episode so runs stay independent."""
    if cfg.backend == "live":
        return HTTPChatBackend(
            LiveConfig(endpoint=cfg.endpoint, model=cfg.model, api_key_env=cfg.api_key_env)
        )
    path = cfg.backend[len("script:"):]
    try:
        script = BackendScript.load(path)
    except ValueError as exc:
        raise ConfigError("backend", f"{path}: {exc}") from exc
    return ScriptedBackend(script, name=f"script:{Path(path).name}")


# -- episode files -----------------------------------------------------

def save_episode(out: Path, record: EpisodeRecord) -> Path:
    ep_dir = out / "episodes"
    ep_dir.mkdir(parents=True, exist_ok=True)
    path = ep_dir / f"{record.episode_id}.json"
    path.write_text(json.dumps(record.to_record(), sort_keys=True, indent=1, ensure_ascii=False) + "\n")
    mem_dir = out / "memories"
    mem_dir.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(s.to_record(), sort_keys=True, ensure_ascii=False) for s in record.snapshots]
    (mem_dir / f"{record.episode_id}.jsonl").write_text("".join(ln + "\n" for ln in lines))
    return path


def load_episodes(directory: str | Path) -> list[EpisodeRecord]:
    d = Path(directory)
    if not d.is_dir():
        raise EmptyInput(f"{d} is not a directory")
    files = sorted((d / "episodes").glob("*.json")) if (d / "episodes").is_dir() else sorted(d.glob("*.json"))
    records = []
    for f in files:
        try:
            records.append(EpisodeRecord.from_record(json.loads(f.read_text(encoding="utf-8"))))
        except (ValueError, KeyError) as exc:
            raise EmptyInput(f"{f}: not an episode record ({exc})") from exc
    return records


# -- running -----------------------------------------------------------

def _episode(cfg: RunConfig, world: WorldConfig, task: TaskSpec, past: list[EpisodeRecord], out: Path):
    backend = make_backend(cfg)
    mode = cfg.mode
    trace_name = f"{mode}-{task.task_id}-v{world.variant_id}.jsonl"
    with TraceWriter(out / "traces" / trace_name) as writer:
        runner = Runner(backend, cfg.settings(), sink=writer)
        try:
            if cfg.mode in ("adapt", "ablation"):
                record = runner.run_adaptation(world, task, mode=mode)
            elif cfg.mode == "g+a":
                record = runner.run_generalization(f"gen-{cfg.gen_kind}", world, task, past)
                record.mode = "g+a"
            else:
                record = runner.run_generalization(cfg.mode, world, task, past)
        except Exception as exc:
            trial, where = runner.position
            exc.run_position = f"episode {trace_name[:-6]}, trial {trial}, step {where}"
            raise
    record.metadata["trace"] = f"traces/{trace_name}"
    return record


def execute_run(cfg: RunConfig) -> list[EpisodeRecord]:
    cfg.validate()
    world, task = load_scenario(cfg.world)
    if cfg.max_steps is not None:
        task = dataclasses.replace(task, max_steps=cfg.max_steps)
    past: list[EpisodeRecord] = []
    for d in cfg.past:
        past.extend(load_episodes(d))
    if cfg.mode in ("gen-env", "gen-task", "g+a") and not past:
        raise ConfigError("past", "no episode records found in the past directories")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.variants > 1:
        worlds = make_variants(world, cfg.variants, cfg.seed, task)
    else:
        world.seed = cfg.seed
        worlds = [world]
    (out / "worlds").mkdir(exist_ok=True)
    for w in worlds:
        save_scenario(out / "worlds" / f"variant_{w.variant_id:02d}.yaml", w, task)
    (out / "run.yaml").write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = [pool.submit(_episode, cfg, w, task, past, out) for w in worlds]
        records = [f.result() for f in futures]
    for r in records:
        save_episode(out, r)
    report = compute_metrics(records)
    (out / "metrics.csv").write_text(report.to_csv())
    (out / "curves.csv").write_text(report.curves_csv())
    return records

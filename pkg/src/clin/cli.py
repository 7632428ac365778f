"""Command-line entry points: run, replay, metrics, validate-config, gen-variants."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from clin.errors import (
    BackendError,
    ClinError,
    ConfigError,
    DivergenceAt,
    EmptyInput,
    TraceFormatError,
)
from clin.harness import RunConfig, execute_run, load_episodes, load_run_config
from clin.metrics import compute_metrics
from clin.tracing import replay
from clin.world.variants import load_scenario, make_variants, save_scenario

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_DIVERGENCE = 4
EXIT_TRACE_FORMAT = 5

# flag name -> RunConfig field
_RUN_FLAGS = {
    "mode": "mode", "backend": "backend", "world": "world", "out": "out", "seed": "seed",
    "past": "past", "trials": "trials", "window": "window", "archive": "archive",
    "threshold": "threshold", "retries": "retries", "max_steps": "max_steps",
    "variants": "variants", "jobs": "jobs", "ablate": "ablate", "gen_kind": "gen_kind",
    "endpoint": "endpoint", "model": "model",
}


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    for flag, name in _RUN_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            setattr(cfg, name, value)
    if args.strict:
        cfg.strict = True
    records = execute_run(cfg)
    for r in records:
        print(f"{r.episode_id}\tscores={r.scores}\thash={r.content_hash()[:16]}")
    print(f"wrote {len(records)} episode(s) to {cfg.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    for path in args.traces:
        report = replay(path)
        print(f"{path}: ok ({report.episodes} episode(s), {report.trials} trial(s), {report.steps} step(s))")
    return EXIT_OK


def cmd_metrics(args) -> int:
    main = load_episodes(args.dirs[0])
    if not main:
        raise EmptyInput(f"no episode records in {args.dirs[0]}")
    compare = None
    if len(args.dirs) > 1:
        compare = [r for d in args.dirs[1:] for r in load_episodes(d)]
        if not compare:
            raise EmptyInput(f"no episode records in {' '.join(args.dirs[1:])}")
    report = compute_metrics(main, compare)
    table = report.to_csv()
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(table)
        out.with_name(out.stem + "_curves.csv").write_text(report.curves_csv())
    else:
        sys.stdout.write(table)
    return EXIT_OK


def cmd_validate(args) -> int:
    for path in args.files:
        if Path(path).suffix in (".yaml", ".yml") and _looks_like_run_config(path):
            cfg = load_run_config(path)
            cfg.validate()
            print(f"{path}: ok (run config)")
        else:
            world, task = load_scenario(path)
            print(f"{path}: ok ({world.name}, task {task.task_id}, {len(world.rooms)} rooms)")
    return EXIT_OK


def _looks_like_run_config(path: str) -> bool:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError):
        return False
    return isinstance(data, dict) and "world" in data and not isinstance(data["world"], dict)


def cmd_gen_variants(args) -> int:
    world, task = load_scenario(args.world)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for v in make_variants(world, args.n, args.seed, task):
        path = out / f"variant_{v.variant_id:02d}.yaml"
        save_scenario(path, v, task)
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clin", description="Continual-learning agent harness.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run adaptation / generalization episodes")
    run.add_argument("--config", help="YAML run config; flags override its keys")
    run.add_argument("--mode", choices=["adapt", "gen-env", "gen-task", "g+a", "ablation"])
    run.add_argument("--backend", help="'live' or 'script:PATH'")
    run.add_argument("--world", help="scenario file/dir or builtin:NAME")
    run.add_argument("--out", help="output directory")
    run.add_argument("--seed", type=int)
    run.add_argument("--past", action="append", help="directory of past episodes (repeatable)")
    run.add_argument("--trials", type=int)
    run.add_argument("--window", type=int)
    run.add_argument("--archive", type=int)
    run.add_argument("--threshold", type=float)
    run.add_argument("--retries", type=int, help="grounding refinement tries")
    run.add_argument("--max-steps", dest="max_steps", type=int)
    run.add_argument("--variants", type=int)
    run.add_argument("--jobs", type=int)
    run.add_argument("--ablate", action="append", choices=["causal-memory", "controller"])
    run.add_argument("--gen-kind", dest="gen_kind", choices=["env", "task"])
    run.add_argument("--endpoint")
    run.add_argument("--model")
    run.add_argument("--strict", action="store_true", help="fail on malformed memory lines")
    run.set_defaults(func=cmd_run)

    rp = sub.add_parser("replay", help="re-simulate traces and check every step")
    rp.add_argument("traces", nargs="+")
    rp.set_defaults(func=cmd_replay)

    mt = sub.add_parser("metrics", help="summary table over episode directories")
    mt.add_argument("dirs", nargs="+", help="main run dir, then optional comparison dirs")
    mt.add_argument("--out")
    mt.set_defaults(func=cmd_metrics)

    vc = sub.add_parser("validate-config", help="check scenario or run config files")
    vc.add_argument("files", nargs="+")
    vc.set_defaults(func=cmd_validate)

    gv = sub.add_parser("gen-variants", help="write solvable environment variants")
    gv.add_argument("--world", required=True)
    gv.add_argument("--n", type=int, required=True)
    gv.add_argument("--seed", type=int, required=True)
    gv.add_argument("--out", required=True)
    gv.set_defaults(func=cmd_gen_variants)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except DivergenceAt as exc:
        _err(str(exc))
        return EXIT_DIVERGENCE
    except TraceFormatError as exc:
        _err(str(exc))
        return EXIT_TRACE_FORMAT
    except (ConfigError, EmptyInput) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except BackendError as exc:
        where = getattr(exc, "run_position", "")
        _err(f"{type(exc).__name__}: {exc}" + (f" ({where})" if where else ""))
        return EXIT_BACKEND
    except ClinError as exc:
        where = getattr(exc, "run_position", "")
        _err(f"{type(exc).__name__}: {exc}" + (f" ({where})" if where else ""))
        return EXIT_ERROR
    except OSError as exc:
        _err(str(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

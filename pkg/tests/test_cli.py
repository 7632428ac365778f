import json

import pytest
import yaml

from clin.cli import main
from clin.errors import ConfigError
from clin.fixtures import learning_script
from clin.gateway.request import Tag
from clin.harness import RunConfig, load_episodes
from clin.tracing import trace_content_hash


@pytest.fixture
def script_path(tmp_path):
    script, _, _ = learning_script()
    # fallbacks keep variant runs going when the base sequence misfires
    for _ in range(40):
        script.add(Tag.CONTROLLER_EXECUTOR, "I used learning id(s): $$$ stop ### TASK_COMPLETE")
    for _ in range(5):
        script.add(Tag.MEM_ADAPT, "1. Looking around MAY BE NECESSARY to find things.")
    script.add(Tag.MEM_GEN_ENV, "1. Opening doors SHOULD BE NECESSARY to explore.")
    path = tmp_path / "learn2.script"
    script.save(path)
    return str(path)


def _run(tmp_path, script_path, name="out", *extra):
    out = tmp_path / name
    code = main(["run", "--mode", "adapt", "--backend", f"script:{script_path}", "--world", "builtin:pickplace",
                 "--seed", "7", "--out", str(out), "--trials", "2", *extra])
    return code, out


def test_run_writes_artifacts(tmp_path, script_path, capsys):
    code, out = _run(tmp_path, script_path)
    assert code == 0
    for rel in ("run.yaml", "metrics.csv", "curves.csv", "worlds/variant_00.yaml",
                "episodes/adapt-pickplace-v0.json", "memories/adapt-pickplace-v0.jsonl",
                "traces/adapt-pickplace-v0.jsonl"):
        assert (out / rel).is_file(), rel
    [record] = load_episodes(out)
    assert record.scores == [50, 100]
    assert "scores=[50, 100]" in capsys.readouterr().out
    memories = [json.loads(ln) for ln in (out / "memories/adapt-pickplace-v0.jsonl").read_text().splitlines()]
    assert memories[0]["items"] == ["Opening the door SHOULD BE NECESSARY to reach the kitchen."]


def test_run_deterministic_modulo_timestamps(tmp_path, script_path):
    _, a = _run(tmp_path, script_path, "a")
    _, b = _run(tmp_path, script_path, "b")
    trace = "traces/adapt-pickplace-v0.jsonl"
    assert trace_content_hash(a / trace) == trace_content_hash(b / trace)
    assert (a / "episodes/adapt-pickplace-v0.json").read_text() == (b / "episodes/adapt-pickplace-v0.json").read_text()


def test_replay_exit_codes(tmp_path, script_path):
    _, out = _run(tmp_path, script_path)
    trace = out / "traces/adapt-pickplace-v0.jsonl"
    assert main(["replay", str(trace)]) == 0
    lines = trace.read_text().splitlines()
    i = next(i for i, ln in enumerate(lines) if '"type": "step"' in ln)
    lines[i] = lines[i].replace("now open", "now opem")
    trace.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(trace)]) == 4
    trace.write_text("\n".join(lines[:5]))
    assert main(["replay", str(trace)]) == 5


def test_metrics_tables(tmp_path, script_path, capsys):
    _, a = _run(tmp_path, script_path, "a")
    capsys.readouterr()
    assert main(["metrics", str(a)]) == 0
    table = capsys.readouterr().out.splitlines()
    assert len(table) == 2 and "delta_avg" not in table[0]
    _, b = _run(tmp_path, script_path, "b")
    out = tmp_path / "cmp.csv"
    assert main(["metrics", str(a), str(b), "--out", str(out)]) == 0
    header, row = out.read_text().splitlines()
    assert header.endswith(",delta_avg") and row.endswith(",0.00")
    assert (tmp_path / "cmp_curves.csv").is_file()


def test_metrics_empty_dir(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["metrics", str(tmp_path / "empty")]) == 2


def test_generalization_modes(tmp_path, script_path):
    _, past = _run(tmp_path, script_path, "past")
    out = tmp_path / "ga"
    code = main(["run", "--mode", "g+a", "--backend", f"script:{script_path}", "--world", "builtin:pickplace",
                 "--out", str(out), "--past", str(past), "--trials", "2"])
    assert code == 0
    [record] = load_episodes(out)
    assert record.mode == "g+a" and record.initial_memory is not None
    assert len(record.initial_memory.archive) == 1


def test_ga_without_past(tmp_path, script_path, capsys):
    code = main(["run", "--mode", "g+a", "--backend", f"script:{script_path}", "--world", "builtin:pickplace",
                 "--out", str(tmp_path / "x")])
    assert code == 2
    assert "past" in capsys.readouterr().err


def test_live_without_key(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("CLIN_API_KEY", raising=False)
    code = main(["run", "--backend", "live", "--world", "builtin:pickplace", "--out", str(tmp_path / "x")])
    assert code == 3
    assert "AuthError" in capsys.readouterr().err


def test_backend_error_reports_position(tmp_path, capsys):
    empty = tmp_path / "empty.script"
    empty.write_text("")
    code = main(["run", "--backend", f"script:{empty}", "--world", "builtin:pickplace", "--out", str(tmp_path / "x")])
    assert code == 3
    assert "trial 0, step 1" in capsys.readouterr().err


def test_parallel_variants(tmp_path, script_path):
    code, out = _run(tmp_path, script_path, "par", "--variants", "3", "--jobs", "3")
    assert code == 0
    assert sorted(p.name for p in (out / "episodes").iterdir()) == [
        f"adapt-pickplace-v{i}.json" for i in range(3)
    ]
    for i in range(3):
        assert main(["replay", str(out / f"traces/adapt-pickplace-v{i}.jsonl")]) == 0


def test_run_from_config_file(tmp_path, script_path):
    cfg = {"mode": "adapt", "backend": f"script:{script_path}", "world": "builtin:pickplace",
           "out": str(tmp_path / "cfgrun"), "trials": 2, "seed": 1}
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(cfg))
    assert main(["validate-config", str(path)]) == 0
    assert main(["run", "--config", str(path)]) == 0
    assert main(["validate-config", str(tmp_path / "cfgrun/run.yaml")]) == 0


def test_validate_config_errors(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"mode": "adapt", "backend": "script:/nope", "world": "builtin:boil", "out": "o"}))
    assert main(["validate-config", str(path)]) == 2
    assert "backend" in capsys.readouterr().err
    path.write_text(yaml.safe_dump({"world": "builtin:boil", "trails": 3}))
    assert main(["validate-config", str(path)]) == 2


@pytest.mark.parametrize(
    "field, value",
    [("trials", 0), ("window", -1), ("threshold", 1.5), ("mode", "train"), ("ablate", ["everything"])],
)
def test_run_config_field_paths(field, value, script_path):
    cfg = RunConfig(mode="ablation", backend=f"script:{script_path}", world="builtin:boil", out="o", ablate=["controller"])
    setattr(cfg, field, value)
    with pytest.raises(ConfigError) as info:
        cfg.validate()
    assert info.value.path == field


def test_seed_required_for_variants(script_path):
    cfg = RunConfig(backend=f"script:{script_path}", world="builtin:boil", out="o", variants=3)
    with pytest.raises(ConfigError) as info:
        cfg.validate()
    assert info.value.path == "seed"


def test_gen_variants_round_trip(tmp_path, capsys):
    out = tmp_path / "variants"
    assert main(["gen-variants", "--world", "builtin:pickplace", "--n", "4", "--seed", "3", "--out", str(out)]) == 0
    files = sorted(out.iterdir())
    assert [f.name for f in files] == [f"variant_{i:02d}.yaml" for i in range(4)]
    assert main(["validate-config", *map(str, files)]) == 0
    first = [f.read_text() for f in files]
    main(["gen-variants", "--world", "builtin:pickplace", "--n", "4", "--seed", "3", "--out", str(out)])
    assert [f.read_text() for f in files] == first


def test_ablation_run(tmp_path, script_path):
    code, out = _run(tmp_path, script_path, "abl", "--mode", "ablation", "--ablate", "causal-memory")
    assert code == 0
    [record] = load_episodes(out)
    assert record.mode == "ablation"
    assert all(s.items == () for s in record.snapshots)

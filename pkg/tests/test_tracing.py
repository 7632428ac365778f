import json

import pytest

from clin.errors import DivergenceAt, TraceFormatError
from clin.tracing import read_trace, record_hash, replay, trace_content_hash

from fakes import write_fixture_trace


@pytest.fixture
def trace(tmp_path):
    path = tmp_path / "trace.jsonl"
    record = write_fixture_trace(path)
    return path, record


def _step_lines(path):
    lines = path.read_text().splitlines()
    return lines, [i for i, ln in enumerate(lines) if json.loads(ln)["type"] == "step"]


def test_replay_clean(trace):
    path, record = trace
    report = replay(path)
    assert report.episodes == 1
    assert report.trials == len(record.trials)
    assert report.steps == sum(len(t.steps) for t in record.trials)


def test_every_record_hashed(trace):
    path, _ = trace
    for rec in read_trace(path):
        assert rec["hash"] == record_hash(rec)
        assert isinstance(rec["ts"], float)


def test_single_byte_mutation_found_at_exact_step(trace):
    path, _ = trace
    lines, step_idx = _step_lines(path)
    for n, i in enumerate(step_idx, start=1):
        rec = json.loads(lines[i])
        obs = rec["observation"]
        pos = next(j for j, ch in enumerate(obs) if ch.isalpha())
        flipped = "x" if obs[pos] != "x" else "y"
        # flip one character inside the serialized observation
        encoded = json.dumps(obs, ensure_ascii=False)
        assert lines[i].count(encoded) == 1
        mutated = encoded.replace(obs[pos], flipped, 1)
        assert len(mutated.encode()) == len(encoded.encode())
        bad = list(lines)
        bad[i] = lines[i].replace(encoded, mutated)
        path.write_text("\n".join(bad) + "\n")
        with pytest.raises(DivergenceAt) as info:
            replay(path)
        assert (info.value.step, info.value.field) == (n, "observation")
        assert info.value.t == rec["t"] and info.value.trial == rec["trial"]
    path.write_text("\n".join(lines) + "\n")
    replay(path)


def test_score_mutation(trace):
    path, _ = trace
    lines, step_idx = _step_lines(path)
    rec = json.loads(lines[step_idx[3]])
    rec["score"] = 99
    lines[step_idx[3]] = json.dumps(rec)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DivergenceAt) as info:
        replay(path)
    assert (info.value.step, info.value.field) == (4, "score")


@pytest.mark.parametrize("cut", ["mid_line", "line_boundary"])
def test_truncation_reports_line(trace, cut):
    path, _ = trace
    text = path.read_text()
    lines = text.splitlines(keepends=True)
    keep = len(lines) // 2
    if cut == "mid_line":
        path.write_text("".join(lines[:keep]) + lines[keep][: len(lines[keep]) // 2])
        expected = keep + 1
    else:
        path.write_text("".join(lines[:keep]))
        expected = keep
    with pytest.raises(TraceFormatError) as info:
        replay(path)
    assert info.value.line == expected


def test_empty_and_untyped(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text("")
    with pytest.raises(TraceFormatError):
        read_trace(p)
    p.write_text('{"no_type": 1}\n')
    with pytest.raises(TraceFormatError) as info:
        read_trace(p)
    assert info.value.line == 1


def test_identical_runs_differ_only_in_timestamps(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_fixture_trace(a, clock=lambda: 1.0)
    write_fixture_trace(b, clock=lambda: 2.0)
    assert a.read_text() != b.read_text()
    assert a.read_text().replace('"ts": 1.0', '"ts": 2.0') == b.read_text()
    assert trace_content_hash(a) == trace_content_hash(b)

"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the summary is
also printed at the end of every pytest session that includes this file.
"""

import itertools
import json
import random
import time
from contextlib import contextmanager

import pytest

from clin.cli import main as cli_main
from clin.errors import DivergenceAt, GroundingFailure, NeedsRefinement
from clin.fixtures import learning_script
from clin.gateway.backends import ScriptedBackend
from clin.gateway.feedback import DEFAULT_BANDS, reward_to_feedback
from clin.gateway.prompts import render_action_prompt, render_memory_prompt
from clin.gateway.request import Tag
from clin.grounding import ActionSpace, ground, refine_loop
from clin.memory import (
    CausalAbstraction,
    format_abstraction,
    parse_abstraction,
    parse_memory,
    select_crucial_memories,
)
from clin.orchestrator import Runner, RunSettings
from clin.records import TrialTrace
from clin.tracing import ListSink, TraceWriter, replay, trace_content_hash
from clin.world.families import BUILTINS, builtin, pickplace
from clin.world.solver import check_solution, solve
from clin.world.variants import make_variants

from conftest import ACCEPTANCE_RESULTS, fixture_lines
from fakes import PlanBackend, lesson, make_episode
from oracles import oracle_ground
from test_grounding import random_case
from walks import check_walk

VARIANTS_PER_FAMILY = 10
WALK_STEPS = 10_000


@contextmanager
def criterion(num, label, limit=None, extra_seconds=0.0):
    start = time.perf_counter()
    ok, detail = False, ""
    try:
        yield
        elapsed = time.perf_counter() - start + extra_seconds
        detail = f"{elapsed:.2f}s" + (f" < {limit}s" if limit else "")
        assert limit is None or elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"
        ok = True
    except BaseException as exc:
        detail = detail or f"{type(exc).__name__}: {str(exc)[:120]}"
        raise
    finally:
        ACCEPTANCE_RESULTS.append((num, label, ok, detail))
        print(f"\ncriterion {num} [{'PASS' if ok else 'FAIL'}] {label} ({detail})")


# -- 1 ------------------------------------------------------------------------------

def test_c1_parser_corpus():
    with criterion(1, "parser corpus: 42 corpus lines, zero drops, round-trip", limit=1.0):
        total = 0
        for name, count in (("adapt_genetics.txt", 12), ("gen_env_friction.txt", 15), ("gen_task_freeze.txt", 15)):
            snap = parse_memory("\n".join(fixture_lines("memories", name)))
            assert snap.dropped == 0 and len(snap.items) == count
            for a in snap.items:
                again = parse_abstraction(format_abstraction(a))
                assert (again.x, again.y, again.polarity, again.certainty) == (a.x, a.y, a.polarity, a.certainty)
            total += len(snap.items)
        assert total == 42


# -- 2 ------------------------------------------------------------------------------

def test_c2_prompt_fidelity():
    with criterion(2, "prompt fidelity: four tags, fixture diff empty", limit=1.0):
        memory = parse_memory("1. Opening the door SHOULD BE NECESSARY to reach the kitchen.", source_reward=100)
        trace = TrialTrace("task", "start", max_steps=5)
        from clin.records import Step

        trace.append(Step("r", "open door to kitchen", "ok", 100))
        rendered = {
            "controller.txt": render_action_prompt("task", ["door to kitchen"], ["open OBJ"], memory, trace),
            "adapt.txt": render_memory_prompt(Tag.MEM_ADAPT, trace, [memory]),
            "gen_env.txt": render_memory_prompt(Tag.MEM_GEN_ENV, None, [(memory, 100)], new_task="boil water"),
            "gen_task.txt": render_memory_prompt(Tag.MEM_GEN_TASK, None, [(memory, 100)], new_task="freeze water"),
        }
        diff = {
            name: [ln for ln in fixture_lines("prompts", name) if ln not in req.text.splitlines()]
            for name, req in rendered.items()
        }
        assert diff == {name: [] for name in rendered}


# -- 3 ------------------------------------------------------------------------------

def test_c3_grounding_oracle():
    with criterion(3, "grounding: 1000 oracle cases agree, refine tries = min(first success, 5)", limit=10.0):
        rng = random.Random(3)
        agree = 0
        for _ in range(1000):
            cand, space, templates, objects = random_case(rng)
            assert space.size() <= 500
            expected, _, _ = oracle_ground(cand, templates, objects)
            try:
                got = ground(cand, space)
            except NeedsRefinement:
                got = None
            agree += got == expected
        assert agree == 1000

        space = ActionSpace(("open OBJ", "go to OBJ"), ("fridge", "kitchen"))
        for pattern in itertools.product([False, True], repeat=6):
            candidates = ["open fridge" if ok else "juggle torches" for ok in pattern]
            it = iter(candidates[1:])
            first = next((i + 1 for i, ok in enumerate(pattern) if ok), None)
            if first is not None and first <= 5:
                assert refine_loop(lambda fb: next(it), candidates[0], space, 5)[1] == first
            else:
                with pytest.raises(GroundingFailure) as info:
                    refine_loop(lambda fb: next(it), candidates[0], space, 5)
                assert info.value.tries == 5


# -- 4 ------------------------------------------------------------------------------

def test_c4_hyperparameter_laws():
    with criterion(4, "window min(k,3), archive cap 10, early stop, K bound", limit=5.0):
        world, task = pickplace()
        episodes = 0
        for k in range(1, 6):
            for scores in itertools.product([0, 50, 100], repeat=k):
                backend = PlanBackend(scores)
                record = Runner(backend, RunSettings(max_trials=k)).run_adaptation(world, task)
                stop = next((i + 1 for i, s in enumerate(scores) if s == 100), k)
                assert record.scores == list(scores[:stop])
                assert len(record.snapshots) == len(record.trials) <= k
                for i, req in enumerate(backend.by_tag(Tag.MEM_ADAPT)):
                    shown = [j for j in range(i) if lesson(j) in req.text]
                    assert shown == list(range(max(0, i - 3), i))
                episodes += 1
        assert episodes == 3 + 9 + 27 + 81 + 243

        for n in range(1, 16):
            past = [make_episode([10 * (i % 3), 50]) for i in range(n)]
            archive = select_crucial_memories(past)
            assert len(archive) == min(n, 10)
            assert all(r == 50 for _, r in archive)
        backend = PlanBackend([100])
        gen = Runner(backend).run_generalization("gen-env", world, task, [make_episode([0, 30])] * 14)
        assert len(gen.initial_memory.archive) == 10
        assert backend.by_tag(Tag.MEM_GEN_ENV)[0].text.count("LEARNINGS:\n") == 10


# -- 5 ------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def learning_runs(tmp_path_factory):
    start = time.perf_counter()
    out = tmp_path_factory.mktemp("c5")
    world, task = pickplace()
    script, winning, _ = learning_script(world, task)
    runs = []
    for rep in range(3):
        backend = ScriptedBackend(script)
        path = out / f"fixture_{rep}.jsonl"
        with TraceWriter(path) as writer:
            record = Runner(backend, RunSettings(strict_memory=True), sink=writer).run_adaptation(world, task)
        runs.append((record, backend, path))
    return runs, winning, time.perf_counter() - start


def test_c5_end_to_end_learning(learning_runs):
    runs, winning, setup = learning_runs
    with criterion(5, "two-trial fixture: trial 2 beats trial 1, hash-deterministic x3", limit=30.0, extra_seconds=setup):
        record, _, _ = runs[0]
        assert check_solution(*pickplace(), winning) == 100
        assert len(record.trials) == 2
        assert record.scores[1] > record.scores[0]
        snap = record.snapshots[0]
        assert not snap.is_empty and snap.dropped == 0
        assert all(isinstance(a, CausalAbstraction) for a in snap.items)
        assert parse_memory("\n".join(snap.lines()), strict=True).items == snap.items
        assert all(s.used_ids == (1,) for s in record.trials[1].steps)
        assert len({r.content_hash() for r, _, _ in runs}) == 1
        assert len({b.transcript_hash() for _, b, _ in runs}) == 1
        assert len({trace_content_hash(p) for _, _, p in runs}) == 1


# -- 6 ------------------------------------------------------------------------------

def test_c6_ablation_plumbing(monkeypatch):
    with criterion(6, "ablations: free-form memory bypasses parser, no rationale contract"):
        import clin.memory as memory_mod
        import clin.orchestrator as orch

        calls = {"parse": 0}
        real = memory_mod.parse_abstraction

        def counting(line):
            calls["parse"] += 1
            return real(line)

        monkeypatch.setattr(memory_mod, "parse_abstraction", counting)
        world, task = pickplace()
        backend = PlanBackend([25, 50], memory_reply=lambda k: "1. Doors SHOULD BE NECESSARY to move.\n2. free advice")
        sink = ListSink()
        record = Runner(backend, RunSettings(max_trials=2, abl_causal_memory=True), sink=sink).run_adaptation(world, task)
        assert calls["parse"] == 0
        assert all(s.items == () and len(s.free_text) == 2 for s in record.snapshots)
        assert all(r["snapshot"]["items"] == [] for r in sink.records if r["type"] == "snapshot")
        assert orch.parse_memory is memory_mod.parse_memory

        backend = PlanBackend([25, 50])
        Runner(backend, RunSettings(max_trials=2, abl_controller=True)).run_adaptation(world, task)
        for req in backend.by_tag(Tag.CONTROLLER_EXECUTOR):
            assert "$$$" not in req.text and "rationale" not in req.text.lower()


# -- 7 ------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def world_checks(tmp_path_factory):
    start = time.perf_counter()
    out = tmp_path_factory.mktemp("c7")
    results = {}
    for name in BUILTINS:
        base, task = builtin(name)
        variants = make_variants(base, VARIANTS_PER_FAMILY, 2023, task)
        solved = [check_solution(v, task, solve(v, task)) for v in variants]
        path = out / f"walk_{name}.jsonl"
        with TraceWriter(path) as writer:
            stats = check_walk(base, task, WALK_STEPS, seed=7, sink=writer)
        results[name] = (variants, solved, stats, path)
    return results, time.perf_counter() - start


def test_c7_microworld(world_checks):
    results, setup = world_checks
    with criterion(7, f"{VARIANTS_PER_FAMILY} solvable variants and {WALK_STEPS} walk steps per family", limit=60.0,
                   extra_seconds=setup):
        assert set(results) == set(BUILTINS)
        for name, (variants, solved, _, _) in results.items():
            assert [v.variant_id for v in variants] == list(range(VARIANTS_PER_FAMILY))
            assert solved == [100] * VARIANTS_PER_FAMILY, name


# -- 8 ------------------------------------------------------------------------------

def _mutate_observation(path, nth_step):
    lines = path.read_text().splitlines()
    idx = [i for i, ln in enumerate(lines) if json.loads(ln)["type"] == "step"][nth_step - 1]
    obs = json.loads(lines[idx])["observation"]
    encoded = json.dumps(obs, ensure_ascii=False)
    pos = next(j for j, ch in enumerate(encoded) if ch.isalpha())
    mutated = encoded[:pos] + ("q" if encoded[pos] != "q" else "z") + encoded[pos + 1:]
    lines[idx] = lines[idx].replace(encoded, mutated, 1)
    bad = path.with_name(path.stem + f"_mut{nth_step}.jsonl")
    bad.write_text("\n".join(lines) + "\n")
    return bad


def test_c8_replay(learning_runs, world_checks, capsys):
    with criterion(8, "replay exits 0 on criterion 5/7 traces; one-byte mutation caught at its step"):
        traces = [p for _, _, p in learning_runs[0]] + [r[3] for r in world_checks[0].values()]
        for path in traces:
            assert cli_main(["replay", str(path)]) == 0
        rng = random.Random(8)
        for path in traces[:1] + traces[3:]:
            total = replay(path).steps
            for nth in sorted({1, total, rng.randint(1, total)}):
                bad = _mutate_observation(path, nth)
                with pytest.raises(DivergenceAt) as info:
                    replay(bad)
                assert info.value.step == nth and info.value.field == "observation"
                assert cli_main(["replay", str(bad)]) == 4
        capsys.readouterr()


# -- 9 ------------------------------------------------------------------------------

def test_c9_feedback_banding():
    with criterion(9, "feedback banding total, monotone, exact at 10 and 100"):
        bands = [DEFAULT_BANDS.band(s) for s in range(101)]
        assert all(isinstance(reward_to_feedback(s), str) and reward_to_feedback(s) for s in range(101))
        assert bands == sorted(bands) and len(set(bands)) == 7
        assert reward_to_feedback(10) == (
            "The agent performed poorly and made some progress but not enough to solve the task."
        )
        assert reward_to_feedback(100) == "The agent has performed exceptionally well and successfully solved the task."

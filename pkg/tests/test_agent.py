import pytest

from clin.agent import Special, decide, parse_decision
from clin.errors import UnparseableResponse
from clin.gateway.backends import BackendScript, ScriptedBackend
from clin.gateway.prompts import FORMAT_REMINDER
from clin.gateway.request import Tag
from clin.grounding import ActionSpace
from clin.memory import parse_memory
from clin.records import TrialTrace

SPACE = ActionSpace(("go to OBJ", "look around", "wait"), ("greenhouse", "hallway"))


def test_full_format():
    d = parse_decision("I used learning id(s): 2 $$$ I need to reach the greenhouse. ### go to greenhouse")
    assert d.used_learning_ids == (2,)
    assert d.rationale == "I need to reach the greenhouse."
    assert d.candidate_action == "go to greenhouse"
    assert d.special is Special.NONE


def test_task_complete():
    d = parse_decision("I used learning id(s): $$$ Task done. ### TASK_COMPLETE")
    assert d.special is Special.TASK_COMPLETE and d.used_learning_ids == ()


def test_focus():
    d = parse_decision("I used learning id(s): $$$ found it ### FOCUS ON pea plant")
    assert d.special is Special.FOCUS and d.focus_object == "pea plant"
    assert d.command() == "focus on pea plant"
    assert parse_decision("x $$$ y ### FOCUS ON <pea plant>").focus_object == "pea plant"


def test_wait_with_ids():
    d = parse_decision("I used learning id(s): 1, 3 $$$ r ### wait")
    assert d.used_learning_ids == (1, 3) and d.special is Special.WAIT


def test_ambiguity_choice():
    d = parse_decision("7", ambiguity_pending=True)
    assert d.special is Special.AMBIGUITY_CHOICE and d.choice == 7 and d.command() == "7"
    d = parse_decision("I used learning id(s): $$$ pick the pot ### 0", ambiguity_pending=True)
    assert d.choice == 0


def test_bare_integer_without_ambiguity_is_unparseable():
    with pytest.raises(UnparseableResponse):
        parse_decision("7")


@pytest.mark.parametrize("text", ["no markers at all", "", "I used learning id(s): 1 $$$ r ###   "])
def test_unparseable(text):
    with pytest.raises(UnparseableResponse):
        parse_decision(text)


def test_invalid_ids_dropped_and_counted():
    d = parse_decision("I used learning id(s): 1, 4, 9 $$$ r ### look around", valid_ids=range(1, 5))
    assert d.used_learning_ids == (1, 4) and d.dropped_ids == 1


def test_candidate_passed_verbatim():
    d = parse_decision("I used learning id(s): $$$ r ###   Go   To the GREENHOUSE  ")
    assert d.candidate_action == "Go   To the GREENHOUSE"
    assert d.command() == d.candidate_action


def test_last_marker_and_first_line():
    d = parse_decision("I used learning id(s): $$$ the ### symbol is odd ### look around\nextra chatter")
    assert d.candidate_action == "look around"


def _decide(script, memory=None):
    backend = ScriptedBackend(script)
    d = decide(backend, "task", memory, TrialTrace("task", "obs", max_steps=5), SPACE)
    return d, backend


def test_decide_reasks_once():
    script = BackendScript().add(Tag.CONTROLLER_EXECUTOR, "garbage").add(
        Tag.CONTROLLER_EXECUTOR, "I used learning id(s): 1 $$$ r ### go to greenhouse"
    )
    memory = parse_memory("1. Walking SHOULD BE NECESSARY to arrive.")
    d, backend = _decide(script, memory)
    assert d.candidate_action == "go to greenhouse" and d.used_learning_ids == (1,)
    req, _ = backend.transcript[1]
    assert req.messages[-1].content == FORMAT_REMINDER


def test_decide_fails_after_second_bad_reply():
    script = BackendScript().add(Tag.CONTROLLER_EXECUTOR, "garbage").add(Tag.CONTROLLER_EXECUTOR, "still garbage")
    with pytest.raises(UnparseableResponse):
        _decide(script)


def test_decide_without_memory_drops_all_ids():
    d, _ = _decide(BackendScript().add(Tag.CONTROLLER_EXECUTOR, "I used learning id(s): 2 $$$ r ### wait"))
    assert d.used_learning_ids == () and d.dropped_ids == 1

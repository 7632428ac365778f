"""Controller and executor in one model call, plus the response parser."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from clin.errors import UnparseableResponse
from clin.gateway.backends import Backend
from clin.gateway.prompts import (
    DEFAULT_TOKEN_BUDGET,
    FORMAT_REMINDER,
    FORMAT_REMINDER_ACTION_ONLY,
    render_action_prompt,
)
from clin.grounding import ActionSpace
from clin.memory import MemorySnapshot
from clin.records import TrialTrace

IDS_MARKER = "I used learning id(s):"
RATIONALE_MARKER = "$$$"
ACTION_MARKER = "###"

_FOCUS_RE = re.compile(r"^focus\s+on\s+(.+)$", re.IGNORECASE)
_INT_RE = re.compile(r"^\d+$")


class Special(str, Enum):
    NONE = "NONE"
    TASK_COMPLETE = "TASK_COMPLETE"
    FOCUS = "FOCUS"
    WAIT = "WAIT"
    AMBIGUITY_CHOICE = "AMBIGUITY_CHOICE"


@dataclass(frozen=True)
class AgentDecision:
    used_learning_ids: tuple[int, ...]
    rationale: str
    candidate_action: str
    special: Special = Special.NONE
    focus_object: str = ""
    choice: int | None = None
    dropped_ids: int = 0
    raw: str = ""

    def command(self) -> str:
        """Text to hand to grounding (or straight to the simulator for a choice)."""
        if self.special is Special.FOCUS:
            return f"focus on {self.focus_object}"
        if self.special is Special.WAIT:
            return "wait"
        if self.special is Special.AMBIGUITY_CHOICE:
            return str(self.choice)
        return self.candidate_action


def _clean_object(text: str) -> str:
    return text.strip().strip("<>\"'").strip().rstrip(".").strip()


def parse_decision(
    completion: str,
    *,
    ambiguity_pending: bool = False,
    valid_ids: Sequence[int] | None = None,
) -> AgentDecision:
    """Parse ``I used learning id(s): ... $$$ rationale ### action``.

    With an ambiguity pending, a bare integer (with or without markers) is
    an option choice. Ids outside ``valid_ids`` are dropped and counted.
    """
    text = completion.strip()
    if ambiguity_pending and _INT_RE.match(text):
        return AgentDecision((), "", text, Special.AMBIGUITY_CHOICE, choice=int(text), raw=completion)
    if ACTION_MARKER not in text:
        raise UnparseableResponse(f"no {ACTION_MARKER} marker in response: {text[:80]!r}")
    head, _, tail = text.rpartition(ACTION_MARKER)
    action = next((ln.strip() for ln in tail.splitlines() if ln.strip()), "")
    if not action:
        raise UnparseableResponse("empty action after the ### marker")
    ids_part, sep, rationale = head.partition(RATIONALE_MARKER)
    if not sep:
        ids_part, rationale = head, ""
    ids: list[int] = []
    if IDS_MARKER in ids_part:
        ids = [int(x) for x in re.findall(r"\d+", ids_part.split(IDS_MARKER, 1)[1])]
    elif sep:
        # rationale marker present but the ids label was mangled
        ids = [int(x) for x in re.findall(r"\d+", ids_part)]
    dropped = 0
    if valid_ids is not None:
        valid = set(valid_ids)
        kept = [i for i in ids if i in valid]
        dropped = len(ids) - len(kept)
        ids = kept
    base = dict(used_learning_ids=tuple(ids), rationale=rationale.strip(), candidate_action=action,
                dropped_ids=dropped, raw=completion)

    bare = action.strip(" .'\"`")
    if bare.upper() == "TASK_COMPLETE":
        return AgentDecision(**base, special=Special.TASK_COMPLETE)
    if bare.lower() == "wait":
        return AgentDecision(**base, special=Special.WAIT)
    if ambiguity_pending and _INT_RE.match(bare):
        return AgentDecision(**base, special=Special.AMBIGUITY_CHOICE, choice=int(bare))
    m = _FOCUS_RE.match(bare)
    if m:
        return AgentDecision(**base, special=Special.FOCUS, focus_object=_clean_object(m.group(1)))
    return AgentDecision(**base)


def decide(
    backend: Backend,
    task: str,
    memory: MemorySnapshot | None,
    trace: TrialTrace,
    admissible: ActionSpace,
    *,
    ambiguity_pending: bool = False,
    action_only: bool = False,
    feedback: str | None = None,
    token_budget: int | None = DEFAULT_TOKEN_BUDGET,
) -> AgentDecision:
    """One controller/executor call; one re-ask with a format reminder on a bad reply."""
    req = render_action_prompt(
        task,
        admissible.objects,
        admissible.templates,
        memory,
        trace,
        action_only=action_only,
        feedback=feedback,
        token_budget=token_budget,
    )
    valid = memory.valid_ids() if memory is not None else ()
    completion = backend.complete(req)
    try:
        return parse_decision(completion, ambiguity_pending=ambiguity_pending, valid_ids=valid)
    except UnparseableResponse:
        reminder = FORMAT_REMINDER_ACTION_ONLY if action_only else FORMAT_REMINDER
        completion = backend.complete(req.with_user(reminder))
        return parse_decision(completion, ambiguity_pending=ambiguity_pending, valid_ids=valid)

"""Prompt templates for the controller/executor and the memory generator.

The instruction text is kept word for word, typos included, because the
model was prompted with exactly these sentences.
"""

from __future__ import annotations

import math
from typing import Sequence

from clin.errors import MissingNewTask, PromptTooLong
from clin.gateway.feedback import DEFAULT_BANDS, FeedbackBands, reward_to_feedback
from clin.gateway.request import ChatRequest, Message, Tag
from clin.memory import MemorySnapshot
from clin.records import TrialTrace

DEFAULT_WINDOW = 3
DEFAULT_TOKEN_BUDGET = 16000
NO_LEARNINGS = "No learnings available"

ACTION_SYSTEM = (
    "You are an AI agent helping execute a science experiment in a simulated environment "
    "with limited number of objects and actions available at each step."
)
MEMORY_SYSTEM = "You are an expert assistant."

ACTION_HEADER = """Possible objects ( value an OBJ can take ):
{objects_str}

Your next action should be in one of the following formats:
Possible actions:
{actions_str}

If I say "Ambiguous request", your action might mean multiple things. In that case, respond with the number corresponding to the action you want to take.

What action would you like to do next?"""

RATIONALE_CONTRACT = """First, scan the (unordered) list of learnings, if provided. Decide if any of the learnings are applicable given the last observation to make progress in this task. Then only use selected learnings, if any, to construct a rationale for picking the next action. If no Learning is selected, construct the rationale based on the last observation. Format your response as follows:

Write 'I used learning id(s):' as a comma separated list; the list can be empty if no learnings selected. Then, write $$$ followed by the rationale. Finally, write ### followed by the single next action you would like to take."""

# Abl-Controller: only the action is requested, no goal/rationale.
ACTION_ONLY_CONTRACT = "Write ### followed by the single next action you would like to take."

ACTION_FOOTER = """If you think you have completed the task, please write TASK_COMPLETE as the next action.

If the task requires you to 'focus' on something (OBJ), please write FOCUS ON <OBJ> as the next action. FOCUS is a extremely critical action that can be only used the number of times 'focus' is mentioned in the task description. Using it more than that or inappropiately (such as on a wrong object) will terminate the session and the task will be rendered as incomplete.

If you performed an action that requires waiting to see the effect, please write 'wait' as the next action."""

FORMAT_REMINDER = (
    "Your previous response did not follow the required format. Write 'I used learning id(s):' "
    "followed by a comma separated list, then $$$ followed by the rationale, then ### followed "
    "by the single next action."
)
FORMAT_REMINDER_ACTION_ONLY = (
    "Your previous response did not follow the required format. Write ### followed by the "
    "single next action."
)

ADAPT_INSTRUCTIONS = """You are given CURRENT TRACE, a sequence of actions that an agent made in a world to accomplish a task.

Task is detailed at the beginning.
For each action, there is a rationale why the agent made that action.
There is an observation that provide details about the new state of the world after each action was executed.
The CURRENT TRACE is accompanied by an EVALUATION REPORT indicating the success of the attempt to the task.

You can also be provided with PREVIOUS LEARNINGS which are learnings from the previous attempts by the agent for the same task in the same environment/world. TASK indicates the task description. EPISODE indicates the number of previous attempts of the task.

Generate a summary of learning, as a numbered list, that will help the agent to successfully accomplish the SAME task AGAIN, in the SAME world.

Each numbered item in the summary can ONLY be of the form:
X MAY BE NECCESSARY to Y.
X SHOULD BE NECCESSARY to Y.
X MAY BE CONTRIBUTE to Y.
X DOES NOT CONTRIBUTE to Y."""

# Abl-Causal-Memory: same task framing, no constraint on the learning format.
FREE_FORM_INSTRUCTIONS = """You are given CURRENT TRACE, a sequence of actions that an agent made in a world to accomplish a task.

Task is detailed at the beginning.
For each action, there is a rationale why the agent made that action.
There is an observation that provide details about the new state of the world after each action was executed.
The CURRENT TRACE is accompanied by an EVALUATION REPORT indicating the success of the attempt to the task.

You can also be provided with PREVIOUS LEARNINGS which are learnings from the previous attempts by the agent for the same task in the same environment/world. TASK indicates the task description. EPISODE indicates the number of previous attempts of the task.

Generate a summary of advice, as a numbered list, that will help the agent to successfully accomplish the SAME task AGAIN, in the SAME world. Each item is free-form advice with no constraint on its format."""

GEN_FORMS = """Each numbered item in the summary can ONLY be of the form:
X MAY BE NECCESSARY to Y.
X SHOULD BE NECCESSARY to Y.
X MAY NOT CONTRIBUTE to Y.
X DOES NOT CONTRIBUTE to Y."""

GEN_ENV_INSTRUCTIONS = """You are given a collection of learning lists, that are derived from actions made by an agent and subsequent observations from a world to accomplish a TYPE of TASKs. All of these TASKs belong to a same TYPE (such as 'boiling') but they are executed in different ENVIRONMENT configurations. A different ENVIRONMENT configuration means there are presence of a different set of objects (lighter instead of a stove) that are critical for solving the TASK, presence of a different set of distractor objects that are not useful for the TASK, a different floor plan, etc.

For each learning list, the TASK description is provided at the beginning as TASK:

Each learning list indicates a list of learnings from the agent's best attempt to solve the TASK.

Each learning list is associated with an EVALUATION REPORT indicated how sucessful the respective attempt was for solving the task.

Consider all learning lists and combine them in to a summary of learnings, as a numbered list, that will help the agent to successfully accomplish a NEW TASK related to the previous TASKs (such as 'boliing') in an ENVIRONMENT configuration that it has not seen before. The NEW TASK description will be provided.

""" + GEN_FORMS

GEN_TASK_INSTRUCTIONS = """You may be given a list of learnings, that are derived from actions made by an agent and subsequent observations from a world to accomplish a TASK in an ENVIRONMENT CONFIGURATION.

For the learning list, the TASK description is provided at the beginning as TASK:

The learnings are from the agent's best attempt to solve the TASK.

The learning list is associated with an EVALUATION REPORT indicated how sucessful the attempt was for solving the task.

Now, generate a summary of learnings from the existing ones if provided, such that they will be useful to the NEW TASK in the SAME ENVIRONMENT CONFIGURATION. The NEW TASK may require different actions which are not captured in the given learnings but given learnings can be used to infer about the ENVIRONMENT CONFIGURATION. The NEW TASK description will be given. If PREVIOUS LEARNINGS says 'No learnings available', improvise learnings for the NEW TASK.

""" + GEN_FORMS

SUMMARY_CUE = "Summary of learning as a numbered list:"


def estimate_tokens(text: str) -> int:
    """Rough token count (about four characters per token)."""
    return math.ceil(len(text) / 4)


def evaluation_report(score: int, bands: FeedbackBands = DEFAULT_BANDS) -> str:
    return f"EVALUATION REPORT:\nREWARD_FINAL: {score}. This means: {reward_to_feedback(score, bands)}"


def _action_user_message(
    task: str,
    objects: Sequence[str],
    action_templates: Sequence[str],
    memory: MemorySnapshot | None,
    trace: TrialTrace,
    n_steps: int,
    action_only: bool,
    feedback: str | None,
) -> str:
    parts = [
        ACTION_HEADER.format(objects_str="\n".join(objects), actions_str="\n".join(action_templates)),
        ACTION_ONLY_CONTRACT if action_only else RATIONALE_CONTRACT,
        ACTION_FOOTER,
        f"TASK: {task}",
    ]
    if memory is not None and not memory.is_empty:
        parts.append("LEARNINGS:\n" + memory.numbered())
    history = []
    if trace.initial_observation:
        history.append(f"Observation: {trace.initial_observation}")
    # keep only the most recent n_steps; older steps are dropped first
    start = len(trace.steps) - n_steps
    if start > 0:
        history.append(f"({start} earlier steps omitted)")
    for step in trace.steps[max(start, 0):]:
        history.append(f"Action: {step.action}\nObservation: {step.observation}")
    if history:
        parts.append("TRACE SO FAR:\n" + "\n".join(history))
    if feedback:
        parts.append(feedback)
    parts.append("Next action:")
    return "\n\n".join(parts)


def render_action_prompt(
    task: str,
    objects: Sequence[str],
    action_templates: Sequence[str],
    memory: MemorySnapshot | None,
    trace: TrialTrace,
    *,
    action_only: bool = False,
    feedback: str | None = None,
    token_budget: int | None = DEFAULT_TOKEN_BUDGET,
    temperature: float = 0.0,
    max_output_tokens: int = 256,
) -> ChatRequest:
    """Build the controller/executor request.

    If the prompt exceeds ``token_budget`` the trace is truncated oldest
    step first; the memory is never cut. :class:`PromptTooLong` is raised
    when even an empty trace does not fit.
    """
    if not objects or not action_templates:
        raise ValueError("objects and action_templates must be non-empty")
    n = len(trace.steps)
    while True:
        user = _action_user_message(
            task, objects, action_templates, memory, trace, n, action_only, feedback
        )
        if token_budget is None or estimate_tokens(ACTION_SYSTEM + user) <= token_budget:
            break
        if n == 0:
            raise PromptTooLong(
                f"prompt needs {estimate_tokens(ACTION_SYSTEM + user)} tokens, budget {token_budget}"
            )
        n -= 1
    return ChatRequest(
        (Message("system", ACTION_SYSTEM), Message("user", user)),
        Tag.CONTROLLER_EXECUTOR,
        temperature,
        max_output_tokens,
    )


def _learning_block(snapshot: MemorySnapshot, reward: int, bands: FeedbackBands, *, episode: int | None = None) -> str:
    lines = [f"TASK: {snapshot.task}"] if snapshot.task else []
    if episode is not None:
        lines.append(f"EPISODE: {episode}")
    lines.append("LEARNINGS:")
    lines.append(snapshot.numbered() if not snapshot.is_empty else NO_LEARNINGS)
    lines.append(evaluation_report(reward, bands))
    return "\n".join(lines)


def _trace_block(trace: TrialTrace, bands: FeedbackBands) -> str:
    lines = ["CURRENT TRACE", f"TASK: {trace.task}"]
    if trace.initial_observation:
        lines.append(f"Observation: {trace.initial_observation}")
    for step in trace.steps:
        if step.goal:
            lines.append(f"Rationale: {step.goal}")
        lines.append(f"Action: {step.action}")
        lines.append(f"Observation: {step.observation}")
    lines.append(evaluation_report(trace.final_reward, bands))
    return "\n".join(lines)


def render_memory_prompt(
    kind: Tag,
    trace: TrialTrace | None,
    prev_memories: Sequence[MemorySnapshot] | Sequence[tuple[MemorySnapshot, int]],
    *,
    new_task: str | None = None,
    window: int = DEFAULT_WINDOW,
    free_form: bool = False,
    bands: FeedbackBands = DEFAULT_BANDS,
    temperature: float = 0.0,
    max_output_tokens: int = 1024,
) -> ChatRequest:
    """Build a memory-generator request.

    For ``MEM_ADAPT``, ``prev_memories`` are snapshots (only the ``window``
    most recent are shown) and ``trace`` is the trial just finished. For the
    two generalization kinds ``prev_memories`` is the crucial archive of
    ``(snapshot, reward)`` pairs and ``new_task`` is required.
    """
    kind = Tag(kind)
    if kind is Tag.CONTROLLER_EXECUTOR:
        raise ValueError("not a memory-generator tag")
    if kind is Tag.MEM_ADAPT:
        if trace is None:
            raise ValueError("MEM_ADAPT needs the current trace")
        recent = list(prev_memories)[-window:] if window > 0 else []
        blocks = [ADAPT_INSTRUCTIONS if not free_form else FREE_FORM_INSTRUCTIONS]
        if recent:
            learned = [
                _learning_block(s, s.source_reward, bands, episode=s.source_trial + 1 if s.source_trial >= 0 else None)
                for s in recent
            ]
            blocks.append("PREVIOUS LEARNINGS\n" + "\n\n".join(learned))
        blocks.append(_trace_block(trace, bands))
        blocks.append(SUMMARY_CUE)
    else:
        if not new_task:
            raise MissingNewTask(f"{kind.value} needs the NEW TASK description")
        archive = [(s, int(r)) for s, r in prev_memories]
        blocks = [GEN_ENV_INSTRUCTIONS if kind is Tag.MEM_GEN_ENV else GEN_TASK_INSTRUCTIONS]
        if archive:
            blocks.append("PREVIOUS LEARNINGS\n" + "\n\n".join(_learning_block(s, r, bands) for s, r in archive))
        else:
            blocks.append(f"PREVIOUS LEARNINGS\n{NO_LEARNINGS}")
        blocks.append(f"NEW TASK: {new_task}\n{SUMMARY_CUE}")
    return ChatRequest(
        (Message("system", MEMORY_SYSTEM), Message("user", "\n\n".join(blocks))),
        kind,
        temperature,
        max_output_tokens,
    )

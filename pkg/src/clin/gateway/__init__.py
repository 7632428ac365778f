"""Model gateway: prompt rendering, reward feedback and backends."""

from clin.gateway.backends import (
    Backend,
    BackendScript,
    HTTPChatBackend,
    LiveConfig,
    ScriptedBackend,
    ScriptRule,
)
from clin.gateway.feedback import DEFAULT_BANDS, FeedbackBands, reward_to_feedback
from clin.gateway.prompts import render_action_prompt, render_memory_prompt
from clin.gateway.request import ChatRequest, Message, Tag

__all__ = [
    "Backend",
    "BackendScript",
    "ChatRequest",
    "DEFAULT_BANDS",
    "FeedbackBands",
    "HTTPChatBackend",
    "LiveConfig",
    "Message",
    "ScriptRule",
    "ScriptedBackend",
    "Tag",
    "render_action_prompt",
    "render_memory_prompt",
    "reward_to_feedback",
]

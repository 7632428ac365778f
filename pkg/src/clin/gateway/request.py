from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Tag(str, Enum):
    CONTROLLER_EXECUTOR = "CONTROLLER_EXECUTOR"
    MEM_ADAPT = "MEM_ADAPT"
    MEM_GEN_ENV = "MEM_GEN_ENV"
    MEM_GEN_TASK = "MEM_GEN_TASK"


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user"):
            raise ValueError(f"unsupported role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[Message, ...]
    tag: Tag
    temperature: float = 0.0
    max_output_tokens: int = 512

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "tag", Tag(self.tag))
        if not self.messages or self.messages[0].role != "system":
            raise ValueError("first message must be the system prompt")
        if not any(m.role == "user" for m in self.messages):
            raise ValueError("request needs at least one user message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @property
    def text(self) -> str:
        """All message contents joined; used for substring matching and hashing."""
        return "\n".join(m.content for m in self.messages)

    def with_user(self, content: str) -> "ChatRequest":
        return ChatRequest(
            self.messages + (Message("user", content),),
            self.tag,
            self.temperature,
            self.max_output_tokens,
        )

    def to_wire(self) -> list[dict]:
        return [{"role": m.role, "content": m.content} for m in self.messages]

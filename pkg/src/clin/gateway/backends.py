"""Text-generation backends: a scripted one for tests and a live HTTP client."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from clin.errors import AuthError, BackendExhausted, TransportError
from clin.gateway.request import ChatRequest, Tag
from clin.records import stable_hash

log = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "CLIN_API_KEY"


class Backend(Protocol):
    name: str

    def complete(self, req: ChatRequest) -> str: ...


@dataclass(frozen=True)
class ScriptRule:
    """``match`` is ``"*"``, ``"step:N"`` (N-th call for this tag, 0-based)
    or ``"contains:TEXT"`` (substring of the request text)."""

    tag: Tag
    match: str
    response: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", Tag(self.tag))
        if not (self.match == "*" or self.match.startswith(("step:", "contains:"))):
            raise ValueError(f"bad matcher {self.match!r}")
        if self.match.startswith("step:"):
            int(self.match[5:])

    def matches(self, req: ChatRequest, call_index: int) -> bool:
        if req.tag is not self.tag:
            return False
        if self.match == "*":
            return True
        if self.match.startswith("step:"):
            return call_index == int(self.match[5:])
        return self.match[len("contains:"):] in req.text

    def to_record(self) -> dict:
        return {"tag": self.tag.value, "match": self.match, "response": self.response}


@dataclass
class BackendScript:
    rules: list[ScriptRule] = field(default_factory=list)

    def add(self, tag: Tag, response: str, match: str = "*") -> "BackendScript":
        self.rules.append(ScriptRule(tag, match, response))
        return self

    def dumps(self) -> str:
        return "".join(json.dumps(r.to_record(), ensure_ascii=False) + "\n" for r in self.rules)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "BackendScript":
        rules = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                rec = json.loads(line)
                rules.append(ScriptRule(rec["tag"], rec.get("match", "*"), rec["response"]))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"script line {lineno}: {exc}") from exc
        return cls(rules)

    @classmethod
    def load(cls, path: str | Path) -> "BackendScript":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


class ScriptedBackend:
    """Deterministic backend: the first rule matching a request answers it and
    is consumed. A request no rule matches raises :class:`BackendExhausted`.
    """

    def __init__(self, script: BackendScript, name: str = "script"):
        self.name = name
        self._rules = list(script.rules)
        self._calls: dict[Tag, int] = {}
        self._lock = threading.Lock()
        self.transcript: list[tuple[ChatRequest, str]] = []

    @property
    def remaining(self) -> int:
        return len(self._rules)

    def complete(self, req: ChatRequest) -> str:
        with self._lock:
            idx = self._calls.get(req.tag, 0)
            self._calls[req.tag] = idx + 1
            for i, rule in enumerate(self._rules):
                if rule.matches(req, idx):
                    del self._rules[i]
                    self.transcript.append((req, rule.response))
                    return rule.response
        raise BackendExhausted(f"no script rule for {req.tag.value} call #{idx}")

    def transcript_hash(self) -> str:
        return stable_hash([[r.tag.value, r.text, resp] for r, resp in self.transcript])


@dataclass
class LiveConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4"
    api_key_env: str = DEFAULT_API_KEY_ENV
    retries: int = 3
    backoff_base: float = 1.0
    timeout: float = 60.0


class HTTPChatBackend:
    """Chat-completion client speaking the role/content message wire format.

    Transport errors, 429 and 5xx responses are retried ``retries`` times
    with exponential backoff; 401/403 raise :class:`AuthError` at once.
    """

    def __init__(
        self,
        config: LiveConfig | None = None,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep=time.sleep,
    ):
        self.config = config or LiveConfig()
        self.name = f"live:{self.config.model}"
        key = os.environ.get(self.config.api_key_env, "").strip()
        if not key:
            raise AuthError(f"environment variable {self.config.api_key_env} is not set")
        self._headers = {"Authorization": f"Bearer {key}"}
        self._client = httpx.Client(transport=transport, timeout=self.config.timeout)
        self._sleep = sleep

    def close(self) -> None:
        self._client.close()

    def complete(self, req: ChatRequest) -> str:
        body = {
            "model": self.config.model,
            "messages": req.to_wire(),
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }
        last: Exception | None = None
        for attempt in range(self.config.retries + 1):
            if attempt:
                self._sleep(self.config.backoff_base * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.config.endpoint, json=body, headers=self._headers)
            except httpx.TransportError as exc:
                last = exc
                log.warning("transport error on attempt %d: %s", attempt + 1, exc)
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"backend rejected credential ({resp.status_code})")
            if resp.status_code == 429 or resp.status_code >= 500:
                last = TransportError(f"HTTP {resp.status_code}")
                log.warning("retryable status %d on attempt %d", resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed completion payload: {exc}") from exc
        raise TransportError(f"gave up after {self.config.retries + 1} attempts: {last}")

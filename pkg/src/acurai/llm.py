"""Chat-completion clients with record/replay support.

Every request is identified by a content hash over (model, temperature,
messages). A cassette maps those hashes to responses, so pipelines replay
byte-identically offline; the recording wrapper captures live traffic into
the same format.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import requests

DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4o-mini"

#: Hard ceiling on concurrent outbound requests across all HTTP clients.
_REQUEST_SEMAPHORE = threading.BoundedSemaphore(4)


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_tokens: int | None = None

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("ChatRequest requires at least one message")
        non_system = [m for m in self.messages if m.role != "system"]
        if non_system and non_system[0].role != "user":
            raise ValueError("first non-system message must be from the user")

    @classmethod
    def build(cls, system: str, user: str, model: str = DEFAULT_MODEL, temperature: float = 0.0) -> "ChatRequest":
        return cls(
            messages=(ChatMessage("system", system), ChatMessage("user", user)),
            model=model,
            temperature=temperature,
        )


@dataclass(frozen=True)
class ChatResponse:
    content: str
    model: str
    usage: tuple[int, int] = (0, 0)  # (prompt_tokens, completion_tokens)
    latency_ms: int = 0


def record_replay_key(request: ChatRequest) -> str:
    """Stable sha256 identity of a request's replay-relevant fields."""
    payload = {
        "model": request.model,
        "temperature": request.temperature,
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class LLMError(RuntimeError):
    """A chat-completion call failed. ``kind`` is one of auth | rate-limit |
    server | network | bad-response.  ``retry_after`` carries the backend's
    Retry-After hint in seconds when it sent one."""

    def __init__(self, message: str, kind: str, retry_after: float | None = None):
        super().__init__(message)
        self.kind = kind
        self.retry_after = retry_after


class MissingFixtureError(LLMError):
    """Replay was requested for a request the cassette has never seen."""

    def __init__(self, key: str, request: ChatRequest):
        preview = request.messages[-1].content[:80] if request.messages else ""
        super().__init__(f"no cassette entry {key} for request {preview!r}", "missing-fixture")
        self.key = key


class ChatClient(Protocol):
    def chat(self, request: ChatRequest) -> ChatResponse: ...


class HTTPChatClient:
    """Client for a chat-completions endpoint.

    Base URL and key default to the ``ACURAI_LLM_BASE_URL`` and
    ``ACURAI_LLM_API_KEY`` environment variables. Retries with exponential
    backoff on 429 and 5xx.
    """

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        timeout: float = 60.0,
        retries: int = 3,
        session: requests.Session | None = None,
        max_in_flight: int | None = None,
    ):
        self.base_url = (base_url or os.environ.get("ACURAI_LLM_BASE_URL") or DEFAULT_BASE_URL).rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("ACURAI_LLM_API_KEY")
        self.timeout = timeout
        self.retries = retries
        self.session = session or requests.Session()
        self._semaphore = (
            threading.BoundedSemaphore(max_in_flight) if max_in_flight else _REQUEST_SEMAPHORE
        )

    def chat(self, request: ChatRequest) -> ChatResponse:
        url = f"{self.base_url}/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": request.model,
            "temperature": request.temperature,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        last: LLMError | None = None
        for attempt in range(self.retries + 1):
            started = time.monotonic()
            try:
                with self._semaphore:
                    resp = self.session.post(url, json=payload, headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                last = LLMError(f"network failure calling {url}: {exc}", "network")
            else:
                if resp.status_code in (401, 403):
                    raise LLMError(f"authentication rejected by {url}", "auth")
                if resp.status_code == 429:
                    try:
                        hint = float(resp.headers.get("Retry-After", ""))
                    except ValueError:
                        hint = None
                    last = LLMError("rate limited", "rate-limit", retry_after=hint)
                elif resp.status_code >= 500:
                    last = LLMError(f"server error {resp.status_code}", "server")
                else:
                    try:
                        body = resp.json()
                        content = body["choices"][0]["message"]["content"]
                        model = body.get("model", request.model)
                        usage = body.get("usage", {})
                        tokens = (usage.get("prompt_tokens", 0), usage.get("completion_tokens", 0))
                    except (ValueError, KeyError, IndexError, AttributeError) as exc:
                        raise LLMError(f"malformed completion body: {exc}", "bad-response")
                    latency = int((time.monotonic() - started) * 1000)
                    return ChatResponse(content=content, model=model, usage=tokens, latency_ms=latency)
            if attempt < self.retries:
                time.sleep(min(0.25 * 2**attempt, 4.0))
        assert last is not None
        raise last


class CallableClient:
    """Adapter for a scripted ``request -> content`` function (tests, demos)."""

    def __init__(self, fn: Callable[[ChatRequest], str], model: str = "scripted"):
        self.fn = fn
        self.model = model

    def chat(self, request: ChatRequest) -> ChatResponse:
        return ChatResponse(content=self.fn(request), model=self.model)


def load_cassette(path: str | Path) -> dict[str, dict[str, str]]:
    data = json.loads(Path(path).read_text("utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"cassette {path} must be a JSON object")
    return data


def save_cassette(entries: dict[str, dict[str, str]], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(entries, sort_keys=True, indent=2, ensure_ascii=False) + "\n", "utf-8")


class ReplayClient:
    """Serve responses from a cassette; unknown requests raise
    :class:`MissingFixtureError` rather than silently fabricating output."""

    def __init__(self, cassette: str | Path | dict[str, dict[str, str]]):
        self.entries = cassette if isinstance(cassette, dict) else load_cassette(cassette)

    def chat(self, request: ChatRequest) -> ChatResponse:
        key = record_replay_key(request)
        entry = self.entries.get(key)
        if entry is None or "content" not in entry:
            raise MissingFixtureError(key, request)
        return ChatResponse(content=entry["content"], model=entry.get("model", request.model))


class RecordingClient:
    """Pass through to ``inner`` and persist each response under its request
    hash. Existing entries are kept unless ``overwrite`` is set."""

    def __init__(self, inner: ChatClient, path: str | Path, overwrite: bool = False):
        self.inner = inner
        self.path = Path(path)
        self.overwrite = overwrite
        self.entries: dict[str, dict[str, str]] = {}
        if self.path.exists():
            self.entries = load_cassette(self.path)
        self._lock = threading.Lock()

    def chat(self, request: ChatRequest) -> ChatResponse:
        key = record_replay_key(request)
        with self._lock:
            if not self.overwrite and key in self.entries:
                entry = self.entries[key]
                return ChatResponse(content=entry["content"], model=entry.get("model", request.model))
        response = self.inner.chat(request)
        with self._lock:
            self.entries[key] = {"content": response.content, "model": response.model}
            save_cassette(self.entries, self.path)
        return response


def default_cassette_path() -> Path:
    """The cassette bundled with the package (drives the demo corpus)."""
    from importlib import resources

    with resources.as_file(resources.files("acurai.resources").joinpath("cassettes/demo.json")) as p:
        return p

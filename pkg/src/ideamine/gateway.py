"""Uniform access to chat-completion and embedding backends.

Two backend kinds exist: ``live`` speaks the OpenAI-compatible HTTP wire
format, ``scripted`` replays a fixed list of canned replies and is the
deterministic test double every protocol test is built on.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from dataclasses import dataclass, field

import httpx
import numpy as np

from .errors import (
    BackendError,
    BackendExhausted,
    DimensionMismatch,
    EmptyRequest,
    EmptyText,
    PreconditionError,
    ScriptExhausted,
    TransientBackendError,
)

ROLES = ("system", "user", "assistant")

API_KEY_ENV = "ENGINE_API_KEY"

# Exponential backoff base for live backends; scripted backends never sleep.
RETRY_BASE_DELAY = 0.5


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise PreconditionError(f"unknown role {self.role!r}")
        if self.role in ("user", "assistant") and not self.content.strip():
            raise PreconditionError(f"{self.role} message must be non-empty")


def system(content: str) -> ChatMessage:
    return ChatMessage("system", content)


def user(content: str) -> ChatMessage:
    return ChatMessage("user", content)


def assistant(content: str) -> ChatMessage:
    return ChatMessage("assistant", content)


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 0.7
    top_p: float = 1.0
    max_tokens: int = 1024
    seed: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.temperature <= 2.0):
            raise PreconditionError("temperature must be in [0, 2.0]")
        if not (0.0 < self.top_p <= 1.0):
            raise PreconditionError("top_p must be in (0, 1]")
        if self.max_tokens <= 0:
            raise PreconditionError("max_tokens must be positive")

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class BackendConfig:
    kind: str  # "live" | "scripted"
    model_id: str = "scripted-model"
    endpoint: str = ""
    request_timeout: float = 60.0
    max_retries: int = 2
    embed_dim: int = 384

    def __post_init__(self):
        if self.kind not in ("live", "scripted"):
            raise PreconditionError(f"unknown backend kind {self.kind!r}")
        if self.kind == "live" and not self.endpoint:
            raise PreconditionError("live backend needs an endpoint")
        if self.max_retries < 0:
            raise PreconditionError("max_retries must be >= 0")
        if self.embed_dim <= 0:
            raise PreconditionError("embed_dim must be positive")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "model_id": self.model_id,
            "endpoint": self.endpoint,
            "request_timeout": self.request_timeout,
            "max_retries": self.max_retries,
            "embed_dim": self.embed_dim,
        }


@dataclass
class ScriptedBehavior:
    """Ordered canned replies. Each entry is (matcher, reply).

    A matcher of None matches any prompt; otherwise it is a plain substring
    test against the concatenated message contents. Replies are consumed at
    most once, in list order; running out raises instead of repeating.
    ``failures`` holds 0-based call indices that raise a transient error,
    which is how retry behaviour is exercised.
    """

    responses: list[tuple[str | None, str]] = field(default_factory=list)
    failures: set[int] = field(default_factory=set)


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int
    completion_tokens: int

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def to_dict(self) -> dict:
        return {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "total_tokens": self.total_tokens,
        }


@dataclass(frozen=True)
class Completion:
    text: str
    usage: Usage
    attempts: int


@dataclass(frozen=True)
class HealthReport:
    reachable: bool
    model_id: str
    latency_ms: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "reachable": self.reachable,
            "model_id": self.model_id,
            "latency_ms": self.latency_ms,
            "detail": self.detail,
        }


@dataclass
class RecordedCall:
    """One completion request as seen by a scripted backend."""

    messages: list[ChatMessage]
    params: SamplingParams

    @property
    def prompt(self) -> str:
        return "\n".join(m.content for m in self.messages)


def _prompt_text(messages: list[ChatMessage]) -> str:
    return "\n".join(m.content for m in messages)


def _estimate_usage(messages: list[ChatMessage], reply: str) -> Usage:
    # Whitespace token estimate: deterministic and cheap, good enough for
    # accounting on the scripted path.
    prompt_tokens = sum(len(m.content.split()) for m in messages)
    return Usage(prompt_tokens=prompt_tokens, completion_tokens=len(reply.split()))


def hashed_embedding(text: str, dim: int) -> np.ndarray:
    """Deterministic pseudo-random unit vector seeded by the text hash."""
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "big")
    rng = np.random.Generator(np.random.PCG64(seed))
    vec = rng.standard_normal(dim)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:  # unreachable in practice; keeps the contract total
        vec[0] = 1.0
        norm = 1.0
    return vec / norm


class ScriptedBackend:
    """In-process backend that replays a ScriptedBehavior.

    Thread-safe: calls are served one at a time. When callers attach a
    sequence index, replies are handed out strictly in sequence order so
    concurrent fan-out stays schedule-independent.
    """

    def __init__(self, config: BackendConfig, behavior: ScriptedBehavior):
        if config.kind != "scripted":
            raise PreconditionError("ScriptedBackend requires kind='scripted'")
        self.config = config
        self.behavior = behavior
        self.calls: list[RecordedCall] = []
        self.embed_calls: list[list[str]] = []
        self._consumed = [False] * len(behavior.responses)
        self._call_index = 0
        self._next_seq = 0
        self._cond = threading.Condition()

    def _serve(self, messages: list[ChatMessage], params: SamplingParams) -> tuple[str, Usage]:
        self.calls.append(RecordedCall(list(messages), params))
        idx = self._call_index
        self._call_index += 1
        if idx in self.behavior.failures:
            raise TransientBackendError(f"scripted transient failure at call {idx}")
        prompt = _prompt_text(messages)
        for i, (matcher, reply) in enumerate(self.behavior.responses):
            if self._consumed[i]:
                continue
            if matcher is None or matcher in prompt:
                self._consumed[i] = True
                return reply, _estimate_usage(messages, reply)
        raise ScriptExhausted(
            f"no unconsumed scripted reply matches call {idx} "
            f"(prompt starts: {prompt[:80]!r})"
        )

    def complete_once(
        self, messages: list[ChatMessage], params: SamplingParams, seq: int | None = None
    ) -> tuple[str, Usage]:
        with self._cond:
            if seq is not None:
                while seq != self._next_seq:
                    self._cond.wait(timeout=30)
                try:
                    return self._serve(messages, params)
                finally:
                    self._next_seq += 1
                    self._cond.notify_all()
            return self._serve(messages, params)

    def embed_once(self, texts: list[str]) -> list[np.ndarray]:
        with self._cond:
            self.embed_calls.append(list(texts))
        return [hashed_embedding(t, self.config.embed_dim) for t in texts]

    def health(self) -> HealthReport:
        return HealthReport(reachable=True, model_id=self.config.model_id, latency_ms=0.0)


class LiveBackend:
    """OpenAI-compatible HTTP backend.

    POSTs to {endpoint}/v1/chat/completions and {endpoint}/v1/embeddings.
    Bearer auth comes from the ENGINE_API_KEY environment variable.
    """

    def __init__(self, config: BackendConfig, transport: httpx.BaseTransport | None = None):
        if config.kind != "live":
            raise PreconditionError("LiveBackend requires kind='live'")
        self.config = config
        self._client = httpx.Client(
            timeout=config.request_timeout,
            transport=transport,
        )

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(API_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, path: str, body: dict) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        try:
            resp = self._client.post(url, json=body, headers=self._headers())
        except httpx.HTTPError as e:
            raise TransientBackendError(f"network error calling {url}: {e}") from e
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientBackendError(f"{url} returned HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise BackendError(f"{url} returned HTTP {resp.status_code}: {resp.text[:200]}")
        return resp.json()

    def complete_once(
        self, messages: list[ChatMessage], params: SamplingParams, seq: int | None = None
    ) -> tuple[str, Usage]:
        body = {
            "model": self.config.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_tokens": params.max_tokens,
        }
        if params.seed is not None:
            body["seed"] = params.seed
        data = self._post("/v1/chat/completions", body)
        try:
            text = data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as e:
            raise BackendError(f"malformed completion response: {e}") from e
        usage = data.get("usage") or {}
        return text, Usage(
            prompt_tokens=max(0, int(usage.get("prompt_tokens", 0))),
            completion_tokens=max(0, int(usage.get("completion_tokens", 0))),
        )

    def embed_once(self, texts: list[str]) -> list[np.ndarray]:
        data = self._post("/v1/embeddings", {"model": self.config.model_id, "input": texts})
        try:
            rows = sorted(data["data"], key=lambda r: r["index"])
            vectors = [np.asarray(r["embedding"], dtype=np.float64) for r in rows]
        except (KeyError, TypeError) as e:
            raise BackendError(f"malformed embedding response: {e}") from e
        if len(vectors) != len(texts):
            raise DimensionMismatch(
                f"asked for {len(texts)} embeddings, got {len(vectors)}"
            )
        dims = {v.shape[0] for v in vectors}
        if len(dims) > 1:
            raise DimensionMismatch(f"inconsistent embedding dimensions: {sorted(dims)}")
        return vectors

    def health(self) -> HealthReport:
        url = self.config.endpoint.rstrip("/") + "/v1/models"
        start = time.monotonic()
        try:
            resp = self._client.get(url, headers=self._headers())
            latency = (time.monotonic() - start) * 1000.0
            if resp.status_code < 500:
                return HealthReport(True, self.config.model_id, latency)
            return HealthReport(False, self.config.model_id, latency, f"HTTP {resp.status_code}")
        except httpx.HTTPError as e:
            latency = (time.monotonic() - start) * 1000.0
            return HealthReport(False, self.config.model_id, latency, str(e))


Backend = ScriptedBackend | LiveBackend


def make_backend(
    config: BackendConfig,
    behavior: ScriptedBehavior | None = None,
    transport: httpx.BaseTransport | None = None,
) -> Backend:
    if config.kind == "scripted":
        return ScriptedBackend(config, behavior or ScriptedBehavior())
    return LiveBackend(config, transport=transport)


def _validate_messages(messages: list[ChatMessage]) -> None:
    if not messages:
        raise EmptyRequest("complete() needs at least one message")
    for i, m in enumerate(messages):
        if m.role == "system" and i != 0:
            raise PreconditionError("only one leading system message is allowed")


def _base_delay(backend: Backend) -> float:
    return 0.0 if backend.config.kind == "scripted" else RETRY_BASE_DELAY


def complete(
    messages: list[ChatMessage],
    params: SamplingParams,
    backend: Backend,
    *,
    seq: int | None = None,
    sleep=time.sleep,
) -> Completion:
    """One chat completion with retry on transient failures.

    attempts in the result is 1 + number of retried transient failures and
    never exceeds max_retries + 1.
    """
    _validate_messages(messages)
    delay = _base_delay(backend)
    attempts = 0
    while True:
        attempts += 1
        try:
            text, usage = backend.complete_once(messages, params, seq=seq)
            return Completion(text=text, usage=usage, attempts=attempts)
        except TransientBackendError as e:
            if attempts > backend.config.max_retries:
                raise BackendExhausted(
                    f"gave up after {attempts} attempts: {e}", attempts=attempts
                ) from e
            if delay > 0:
                sleep(delay)
            delay *= 2


def embed(texts: list[str], backend: Backend, *, sleep=time.sleep) -> list[np.ndarray]:
    """Embed texts into unit vectors; identical texts get identical vectors."""
    for t in texts:
        if not t.strip():
            raise EmptyText("cannot embed an empty text")
    if not texts:
        return []
    # Deduplicate before calling out so identical inputs share one vector
    # even on backends that are not strictly deterministic.
    unique: list[str] = []
    index: dict[str, int] = {}
    for t in texts:
        if t not in index:
            index[t] = len(unique)
            unique.append(t)

    delay = _base_delay(backend)
    attempts = 0
    while True:
        attempts += 1
        try:
            vectors = backend.embed_once(unique)
            break
        except TransientBackendError as e:
            if attempts > backend.config.max_retries:
                raise BackendExhausted(
                    f"embedding gave up after {attempts} attempts: {e}", attempts=attempts
                ) from e
            if delay > 0:
                sleep(delay)
            delay *= 2

    normalized = []
    for v in vectors:
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise BackendError("embedding backend returned a zero vector")
        normalized.append(v / norm)
    return [normalized[index[t]] for t in texts]


def health_check(backend: Backend) -> HealthReport:
    return backend.health()


class Gateway:
    """The engine's view of its model roles.

    generator: the domain-specialised model that proposes ideas, dialog
    turns, and procedures. assistant: the general instruct model that
    converses, judges, and distills. judge defaults to the assistant but
    can be a third, uninvolved backend. embedder defaults to the generator
    backend's embedding surface.
    """

    def __init__(
        self,
        generator: Backend,
        assistant: Backend,
        judge: Backend | None = None,
        embedder: Backend | None = None,
    ):
        self.generator = generator
        self.assistant = assistant
        self.judge = judge or assistant
        self.embedder = embedder or generator

    def complete(
        self,
        role: str,
        messages: list[ChatMessage],
        params: SamplingParams,
        seq: int | None = None,
    ) -> Completion:
        backend = {
            "generator": self.generator,
            "assistant": self.assistant,
            "judge": self.judge,
        }.get(role)
        if backend is None:
            raise PreconditionError(f"unknown gateway role {role!r}")
        return complete(messages, params, backend, seq=seq)

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        return embed(texts, self.embedder)

    def health(self) -> dict[str, HealthReport]:
        reports = {
            "generator": health_check(self.generator),
            "assistant": health_check(self.assistant),
        }
        if self.judge is not self.assistant:
            reports["judge"] = health_check(self.judge)
        if self.embedder is not self.generator:
            reports["embedder"] = health_check(self.embedder)
        return reports

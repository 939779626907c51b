"""Embedding and chat-completion providers.

Two families live here: HTTP clients speaking the de-facto JSON wire
protocol ({model, input} for embeddings, {model, messages} for chat), and
deterministic local stand-ins (a signed-hash embedder and a rule-table chat
stub) so the whole pipeline runs and tests offline. Credentials are only
ever read from the environment variable named in the config.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import requests

from .errors import DimensionMismatch, ProviderUnavailable, ZeroVector

DEFAULT_DIMENSION = 1536
RETRYABLE_STATUS = {429, 500, 502, 503, 504}

_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


class FinishReason(str, Enum):
    COMPLETE = "complete"
    TRUNCATED = "truncated"
    ERROR = "error"


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str = ""
    model_name: str = ""
    api_key_env: str = "REPVEC_API_KEY"
    timeout: float = 30.0
    max_retries: int = 3
    dimension: int = DEFAULT_DIMENSION

    def __post_init__(self) -> None:
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    max_output_tokens: int = 1024


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: FinishReason = FinishReason.COMPLETE


def first_sentence(text: str) -> str:
    """First sentence of text, ending-punctuation included."""
    stripped = text.strip()
    if not stripped:
        return ""
    return _SENTENCE_RE.split(stripped, maxsplit=1)[0]


def hash_embed(text: str, d: int = DEFAULT_DIMENSION) -> np.ndarray:
    """Deterministic offline embedding: signed token hashing, unit-normalized.

    Each lowercased whitespace token is hashed (blake2b, so stable across
    processes) into one of d buckets with a +/-1 contribution; the bucket
    histogram is normalized to unit Euclidean length. Texts sharing tokens
    land closer in cosine similarity than disjoint ones.
    """
    if d <= 0:
        raise ValueError("dimension must be positive")
    tokens = text.lower().split()
    if not tokens:
        raise ZeroVector("text has no tokens to embed")
    vec = np.zeros(d, dtype=np.float64)
    for tok in tokens:
        digest = hashlib.blake2b(tok.encode("utf-8"), digest_size=16).digest()
        bucket = int.from_bytes(digest[:8], "little") % d
        sign = 1.0 if digest[8] & 1 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # Signed contributions cancelled exactly; signal rather than divide.
        raise ZeroVector("token contributions cancelled to the zero vector")
    return vec / norm


class DeterministicEmbeddingProvider:
    """Offline embed provider built on hash_embed; byte-reproducible."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            raise ValueError("texts must be non-empty")
        return np.stack([hash_embed(t, self.dimension) for t in texts])


class HttpEmbeddingProvider:
    """JSON-over-HTTP embedding client with exponential-backoff retry.

    POSTs {model, input: [...]} to <base_url>/embeddings and expects
    {data: [{index, embedding}, ...]}.
    """

    def __init__(
        self,
        cfg: ProviderConfig,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
        backoff_base: float = 0.5,
    ):
        self.cfg = cfg
        self.dimension = cfg.dimension
        self._session = session or requests.Session()
        self._sleep = sleep
        self._backoff_base = backoff_base

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        if not texts or any(not t for t in texts):
            raise ValueError("texts must be non-empty strings")
        payload = {"model": self.cfg.model_name, "input": list(texts)}
        body = _post_with_retry(
            self._session,
            f"{self.cfg.base_url.rstrip('/')}/embeddings",
            payload,
            self.cfg,
            self._sleep,
            self._backoff_base,
        )
        try:
            rows = sorted(body["data"], key=lambda item: item["index"])
            vectors = [row["embedding"] for row in rows]
        except (KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise DimensionMismatch(
                f"provider returned {len(vectors)} vectors for {len(texts)} texts"
            )
        out = np.asarray(vectors, dtype=np.float64)
        if out.ndim != 2 or out.shape[1] != self.cfg.dimension:
            raise DimensionMismatch(
                f"provider returned shape {out.shape}, expected (*, {self.cfg.dimension})"
            )
        return out


class HttpChatProvider:
    """JSON-over-HTTP chat client: {model, messages:[{role, content}...]}."""

    def __init__(
        self,
        cfg: ProviderConfig,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
        backoff_base: float = 0.5,
    ):
        self.cfg = cfg
        self._session = session or requests.Session()
        self._sleep = sleep
        self._backoff_base = backoff_base

    def chat(self, req: ChatRequest) -> ChatResponse:
        if not req.system_prompt or not req.user_prompt:
            raise ValueError("prompts must be non-empty")
        payload = {
            "model": self.cfg.model_name,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": req.user_prompt},
            ],
            "max_tokens": req.max_output_tokens,
        }
        body = _post_with_retry(
            self._session,
            f"{self.cfg.base_url.rstrip('/')}/chat/completions",
            payload,
            self.cfg,
            self._sleep,
            self._backoff_base,
        )
        try:
            choice = body["choices"][0]
            text = choice["message"]["content"]
            finish = choice.get("finish_reason", "stop")
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed chat response: {exc}") from exc
        reason = FinishReason.TRUNCATED if finish == "length" else FinishReason.COMPLETE
        return ChatResponse(text=text, finish_reason=reason)


def _post_with_retry(
    session: requests.Session,
    url: str,
    payload: dict,
    cfg: ProviderConfig,
    sleep: Callable[[float], None],
    backoff_base: float,
) -> dict:
    """POST JSON with exponential backoff on transient failures.

    Retries connection errors, timeouts and 429/5xx up to max_retries times;
    other HTTP errors fail immediately. Always raises ProviderUnavailable on
    exhaustion.
    """
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(cfg.api_key_env, "")
    if key:
        headers["Authorization"] = f"Bearer {key}"

    last_error = "unknown"
    for attempt in range(cfg.max_retries + 1):
        try:
            resp = session.post(url, json=payload, headers=headers, timeout=cfg.timeout)
        except requests.RequestException as exc:
            last_error = f"network error: {exc}"
        else:
            if resp.status_code == 200:
                try:
                    return resp.json()
                except (ValueError, json.JSONDecodeError) as exc:
                    raise ProviderUnavailable(f"non-JSON response: {exc}") from exc
            if resp.status_code not in RETRYABLE_STATUS:
                raise ProviderUnavailable(f"HTTP {resp.status_code} from {url}")
            last_error = f"HTTP {resp.status_code}"
        if attempt < cfg.max_retries:
            sleep(backoff_base * (2.0**attempt))
    raise ProviderUnavailable(
        f"{url} failed after {cfg.max_retries + 1} attempts ({last_error})"
    )


@dataclass(frozen=True)
class StubRule:
    """One pattern->behavior entry of the stub chat provider.

    ``match`` is a substring tested against the user prompt. The behavior is
    either a literal ``response`` or an ``action``: "echo" returns the user
    prompt verbatim, "first_sentence" returns its first sentence.
    """

    match: str
    response: str | None = None
    action: str | None = None

    def __post_init__(self) -> None:
        if (self.response is None) == (self.action is None):
            raise ValueError("rule needs exactly one of response/action")
        if self.action is not None and self.action not in ("echo", "first_sentence"):
            raise ValueError(f"unknown stub action {self.action!r}")

    def apply(self, req: ChatRequest) -> str:
        if self.response is not None:
            return self.response
        if self.action == "echo":
            return req.user_prompt
        return first_sentence(req.user_prompt)


class RuleChatProvider:
    """Rule-table chat stub: first matching rule wins.

    With no matching rule and no default, raises ProviderUnavailable so
    downstream extractive fallbacks engage. A call transcript is kept so
    golden tests can assert exact prompts.
    """

    def __init__(self, rules: Sequence[StubRule] = (), default: StubRule | None = None):
        self.rules = list(rules)
        self.default = default
        self.transcript: list[ChatRequest] = []

    @classmethod
    def from_json(cls, path: str | Path) -> "RuleChatProvider":
        """Load a fixture file: a JSON list of {match, response|action}."""
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = [
            StubRule(
                match=e["match"],
                response=e.get("response"),
                action=e.get("action"),
            )
            for e in entries
        ]
        return cls(rules)

    def chat(self, req: ChatRequest) -> ChatResponse:
        self.transcript.append(req)
        for rule in self.rules:
            if rule.match in req.user_prompt:
                return ChatResponse(rule.apply(req))
        if self.default is not None:
            return ChatResponse(self.default.apply(req))
        raise ProviderUnavailable("no stub rule matches the prompt")


def embed_batch(texts: Sequence[str], cfg: ProviderConfig) -> np.ndarray:
    """Embed texts through a fresh HTTP provider built from cfg."""
    return HttpEmbeddingProvider(cfg).embed_batch(texts)


def chat(req: ChatRequest, cfg: ProviderConfig) -> ChatResponse:
    """Send one chat request through a fresh HTTP provider built from cfg."""
    return HttpChatProvider(cfg).chat(req)

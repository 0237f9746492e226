"""Backend wire contracts: HTTP client plus in-tree stub backends.

Three endpoints, all JSON over POST:

    /generate   {"task": "describe", "input": str}       -> {"output": str}
    /classify   {"task": "classify_none", "input": str}  -> {"label": 0|1, "score": float}
    /predict    {"source": str}  -> {name: [{"type_text": str, "confidence": float}, ...]}
"""

from __future__ import annotations

import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Protocol, runtime_checkable

import httpx

logger = logging.getLogger(__name__)

ENV_URL = "DOCFORGE_BACKEND_URL"
ENV_TOKEN = "DOCFORGE_BACKEND_TOKEN"

RETRYABLE_STATUS = frozenset({408, 429, 500, 502, 503, 504})


class BackendUnavailable(RuntimeError):
    """The backend could not produce a usable answer; callers fall back."""


class ProtocolError(BackendUnavailable):
    """The backend answered, but not in the agreed schema."""


@dataclass(frozen=True)
class ClassifyResult:
    label: int
    score: float


@dataclass(frozen=True)
class TypeCandidate:
    type_text: str
    confidence: float


@runtime_checkable
class GenerationBackend(Protocol):
    def generate(self, input_text: str) -> str: ...


@runtime_checkable
class ClassificationBackend(Protocol):
    def classify(self, input_text: str) -> ClassifyResult: ...


@runtime_checkable
class TypeServiceClient(Protocol):
    def predict_types(self, source_text: str) -> dict[str, list[TypeCandidate]]: ...


@dataclass(frozen=True)
class BackendConfig:
    base_url: str
    timeout_ms: int = 10_000
    max_retries: int = 2
    max_inflight: int = 4
    auth_token: str | None = None
    backoff_base_ms: int = 100

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], environ: Mapping[str, str] | None = None) -> "BackendConfig":
        """Build from a config table; environment variables win over the file."""
        environ = os.environ if environ is None else environ
        values = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        if environ.get(ENV_URL):
            values["base_url"] = environ[ENV_URL]
        if environ.get(ENV_TOKEN):
            values["auth_token"] = environ[ENV_TOKEN]
        if "base_url" not in values:
            raise ValueError(f"backend base_url missing (set it in the config or {ENV_URL})")
        return cls(**values)


# --- response validation -----------------------------------------------------


def _json_body(response: httpx.Response) -> Any:
    try:
        return response.json()
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProtocolError(f"non-JSON response body: {exc}") from exc


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_generate_response(body: Any) -> str:
    if not isinstance(body, dict) or not isinstance(body.get("output"), str):
        raise ProtocolError("generate response must be an object with a string 'output'")
    return body["output"]


def parse_classify_response(body: Any) -> ClassifyResult:
    if not isinstance(body, dict):
        raise ProtocolError("classify response must be an object")
    label, score = body.get("label"), body.get("score")
    if label not in (0, 1) or isinstance(label, bool):
        raise ProtocolError(f"classify label must be 0 or 1, got {label!r}")
    if not _is_number(score) or not 0.0 <= score <= 1.0:
        raise ProtocolError(f"classify score must be a number in [0, 1], got {score!r}")
    return ClassifyResult(label=int(label), score=float(score))


def parse_predict_response(body: Any) -> dict[str, list[TypeCandidate]]:
    if not isinstance(body, dict):
        raise ProtocolError("predict response must be an object mapping names to candidates")
    out: dict[str, list[TypeCandidate]] = {}
    for name, candidates in body.items():
        if not isinstance(candidates, list):
            raise ProtocolError(f"candidates for {name!r} must be a list")
        parsed = []
        for cand in candidates:
            if (
                not isinstance(cand, dict)
                or not isinstance(cand.get("type_text"), str)
                or not _is_number(cand.get("confidence"))
                or not 0.0 <= cand["confidence"] <= 1.0
            ):
                raise ProtocolError(f"malformed type candidate for {name!r}: {cand!r}")
            parsed.append(TypeCandidate(cand["type_text"], float(cand["confidence"])))
        parsed.sort(key=lambda c: -c.confidence)
        out[str(name)] = parsed
    return out


# --- HTTP client -------------------------------------------------------------


class HttpBackend:
    """Client for all three endpoints, safe to share between threads.

    Each logical request makes at most ``max_retries + 1`` attempts. Retries
    sleep with exponential backoff plus jitter, each sleep capped at the
    per-attempt timeout so a request never exceeds
    ``timeout_ms * (max_retries + 1) * 2`` of wall-clock time.
    """

    def __init__(
        self,
        config: BackendConfig,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
        predict_adapter: Callable[[Any], dict[str, list[TypeCandidate]]] = parse_predict_response,
    ):
        self.config = config
        self._client = client or httpx.Client(base_url=config.base_url)
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._rng_lock = threading.Lock()
        self._slots = threading.BoundedSemaphore(config.max_inflight)
        self._predict_adapter = predict_adapter
        self.attempts = 0

    def close(self) -> None:
        self._client.close()

    def _backoff(self, attempt: int) -> float:
        with self._rng_lock:
            jitter = self._rng.uniform(0.5, 1.5)
        delay = self.config.backoff_base_ms / 1000 * (2**attempt) * jitter
        return min(delay, self.config.timeout_ms / 1000)

    def _headers(self) -> dict[str, str]:
        if self.config.auth_token:
            return {"Authorization": f"Bearer {self.config.auth_token}"}
        return {}

    def _post(self, path: str, payload: dict[str, Any]) -> Any:
        timeout = self.config.timeout_ms / 1000
        last_error = "no attempt made"
        with self._slots:
            for attempt in range(self.config.max_retries + 1):
                if attempt:
                    self._sleep(self._backoff(attempt - 1))
                with self._rng_lock:
                    self.attempts += 1
                try:
                    response = self._client.post(
                        path, json=payload, headers=self._headers(), timeout=timeout
                    )
                except httpx.HTTPError as exc:
                    last_error = f"{type(exc).__name__}: {exc}"
                    logger.debug("attempt %d on %s failed: %s", attempt + 1, path, last_error)
                    continue
                if response.status_code in RETRYABLE_STATUS:
                    last_error = f"HTTP {response.status_code}"
                    continue
                if response.status_code >= 400:
                    raise BackendUnavailable(f"{path}: HTTP {response.status_code}")
                return _json_body(response)
        raise BackendUnavailable(
            f"{path}: gave up after {self.config.max_retries + 1} attempts ({last_error})"
        )

    def generate(self, input_text: str) -> str:
        if not input_text:
            raise ValueError("input_text must be non-empty")
        return parse_generate_response(self._post("/generate", {"task": "describe", "input": input_text}))

    def classify(self, input_text: str) -> ClassifyResult:
        if not input_text:
            raise ValueError("input_text must be non-empty")
        return parse_classify_response(
            self._post("/classify", {"task": "classify_none", "input": input_text})
        )

    def predict_types(self, source_text: str) -> dict[str, list[TypeCandidate]]:
        if not source_text:
            raise ValueError("source_text must be non-empty")
        return self._predict_adapter(self._post("/predict", {"source": source_text}))


# --- stubs -------------------------------------------------------------------


class EchoBackend:
    """Generation stub returning its input unchanged."""

    def generate(self, input_text: str) -> str:
        if not input_text:
            raise ValueError("input_text must be non-empty")
        return input_text


class ConstantBackend:
    """Returns a fixed description and/or a fixed classification label."""

    def __init__(self, output: str = "A parameter.", label: int = 0, score: float = 1.0):
        self.output = output
        self.label = label
        self.score = score

    def generate(self, input_text: str) -> str:
        if not input_text:
            raise ValueError("input_text must be non-empty")
        return self.output

    def classify(self, input_text: str) -> ClassifyResult:
        if not input_text:
            raise ValueError("input_text must be non-empty")
        return ClassifyResult(self.label, self.score)


class ScriptedBackend:
    """Answers from a fixture table; unknown inputs count as unavailable."""

    def __init__(
        self,
        outputs: Mapping[str, str] | None = None,
        labels: Mapping[str, int] | None = None,
        types: Mapping[str, Mapping[str, list[tuple[str, float]]]] | None = None,
    ):
        self.outputs = dict(outputs or {})
        self.labels = dict(labels or {})
        self.types = dict(types or {})

    def generate(self, input_text: str) -> str:
        try:
            return self.outputs[input_text]
        except KeyError:
            raise BackendUnavailable("no scripted output for input") from None

    def classify(self, input_text: str) -> ClassifyResult:
        try:
            return ClassifyResult(self.labels[input_text], 1.0)
        except KeyError:
            raise BackendUnavailable("no scripted label for input") from None

    def predict_types(self, source_text: str) -> dict[str, list[TypeCandidate]]:
        table = self.types.get(source_text, {})
        return {
            name: sorted((TypeCandidate(t, c) for t, c in cands), key=lambda c: -c.confidence)
            for name, cands in table.items()
        }


class FailingBackend:
    """Every call raises BackendUnavailable; models an outage."""

    def generate(self, input_text: str) -> str:
        raise BackendUnavailable("backend down")

    def classify(self, input_text: str) -> ClassifyResult:
        raise BackendUnavailable("backend down")

    def predict_types(self, source_text: str) -> dict[str, list[TypeCandidate]]:
        raise BackendUnavailable("backend down")

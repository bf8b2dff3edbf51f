"""Unified client over LLM HTTP providers, plus a deterministic mock.

A registry of provider profiles is loaded from a TOML document; requests
are mapped onto each provider's wire protocol and retried on transient
failures with full-jitter exponential backoff. Auth keys live exclusively
in environment variables named by the config; key values must never reach
logs, error messages, or API responses.

The mock protocol serves two purposes: scripted behaviors make every layer
above the wire deterministically testable, and an unscripted mock answers
any prompt with grammar-conforming synthetic text so the whole platform
can be driven offline.
"""

from __future__ import annotations

import hashlib
import os
import random
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Sequence, Union

import requests

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import synth
from .errors import (
    DuplicateProviderIdError,
    MalformedConfigError,
    MalformedProviderResponseError,
    ProviderError,
    ProviderTimeoutError,
    RateLimitedError,
    UnauthorizedError,
    UnknownModelError,
    UnknownProviderError,
)
from .model import Diagnostic, ReasoningMethod, warning

ANTHROPIC_VERSION = "2023-06-01"
CONFIG_ENV_VAR = "REASONGRAPH_CONFIG"


class WireProtocol(str, Enum):
    OPENAI_CHAT = "openai_chat_compatible"
    ANTHROPIC = "anthropic_messages"
    MOCK = "mock"


@dataclass(frozen=True)
class MockReply:
    text: str


@dataclass(frozen=True)
class MockFailure:
    status: int = 500


@dataclass(frozen=True)
class MockTimeout:
    pass


@dataclass(frozen=True)
class MockDelay:
    text: str
    delay_ms: int = 0


MockBehavior = Union[MockReply, MockFailure, MockTimeout, MockDelay]


class MockScript:
    """Scripted behaviors, consumed one per call; an exhausted script keeps
    repeating its last behavior. Thread-safe; counts every call."""

    def __init__(self, behaviors: Sequence[MockBehavior] = ()):
        self.behaviors = list(behaviors)
        self.calls = 0
        self._lock = threading.Lock()
        self.prompts: list[str] = []

    def next(self, prompt: str) -> MockBehavior | None:
        with self._lock:
            index = min(self.calls, len(self.behaviors) - 1) if self.behaviors else None
            self.calls += 1
            self.prompts.append(prompt)
        return self.behaviors[index] if index is not None else None


@dataclass(frozen=True)
class ProviderProfile:
    id: str
    wire_protocol: WireProtocol
    base_url: str = ""
    auth_env_var: str = ""
    models: tuple[str, ...] = ()
    timeout: float = 120.0
    max_retries: int = 2
    max_concurrency: int | None = None
    backoff_base: float = 1.0
    script: MockScript | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class GenerationRequest:
    provider: str
    model: str
    prompt: str
    temperature: float = 0.7
    max_tokens: int = 2048


@dataclass(frozen=True)
class GenerationResult:
    text: str
    latency_ms: float
    provider: str
    model: str


class _FifoGate:
    """Counting admission gate with strict FIFO admission when saturated."""

    def __init__(self, limit: int | None):
        self._limit = limit
        self._lock = threading.Lock()
        self._active = 0
        self._waiters: deque[threading.Event] = deque()

    def __enter__(self):
        if self._limit is None:
            return self
        with self._lock:
            if self._active < self._limit:
                self._active += 1
                return self
            event = threading.Event()
            self._waiters.append(event)
        event.wait()
        return self

    def __exit__(self, *exc):
        if self._limit is None:
            return False
        with self._lock:
            if self._waiters:
                # hand the slot straight to the oldest waiter
                self._waiters.popleft().set()
            else:
                self._active -= 1
        return False


def is_available(profile: ProviderProfile, env: Mapping[str, str] | None = None) -> bool:
    if profile.wire_protocol is WireProtocol.MOCK:
        return True
    env = os.environ if env is None else env
    return bool(env.get(profile.auth_env_var))


class ProviderRegistry:
    """Immutable after load; shared freely between request handlers."""

    def __init__(self, profiles: Sequence[ProviderProfile], warnings: Sequence[Diagnostic] = ()):
        self.profiles: dict[str, ProviderProfile] = {}
        for profile in profiles:
            if profile.id in self.profiles:
                raise DuplicateProviderIdError(f"provider id {profile.id!r} declared twice")
            self.profiles[profile.id] = profile
        self.warnings = list(warnings)
        self._gates = {p.id: _FifoGate(p.max_concurrency) for p in self.profiles.values()}

    def get(self, provider_id: str) -> ProviderProfile:
        try:
            return self.profiles[provider_id]
        except KeyError:
            raise UnknownProviderError(f"no provider with id {provider_id!r}") from None

    def gate_for(self, provider_id: str) -> _FifoGate:
        return self._gates[provider_id]

    def view(self, env: Mapping[str, str] | None = None) -> list[dict]:
        """Registry summary for the API: ids, models, availability. Never
        auth material."""
        return [
            {
                "id": p.id,
                "wire_protocol": p.wire_protocol.value,
                "models": list(p.models),
                "available": is_available(p, env),
            }
            for p in self.profiles.values()
        ]


_PROTOCOL_NAMES = {p.value: p for p in WireProtocol}


def _profile_from_table(index: int, table: object) -> ProviderProfile:
    where = f"provider[{index}]"
    if not isinstance(table, dict):
        raise MalformedConfigError(f"{where} must be a table")

    def need(key: str, kind: type, default=None):
        value = table.get(key, default)
        if value is None:
            raise MalformedConfigError(f"{where} is missing required field {key!r}")
        if kind is float and isinstance(value, int):
            value = float(value)
        if not isinstance(value, kind):
            raise MalformedConfigError(f"{where}.{key} must be of type {kind.__name__}")
        return value

    provider_id = need("id", str)
    protocol_name = need("wire_protocol", str)
    protocol = _PROTOCOL_NAMES.get(protocol_name)
    if protocol is None:
        raise MalformedConfigError(
            f"{where}.wire_protocol {protocol_name!r} is not one of {sorted(_PROTOCOL_NAMES)}"
        )
    if protocol is WireProtocol.MOCK:
        base_url = str(table.get("base_url", ""))
        auth_env_var = str(table.get("auth_env_var", ""))
        models = table.get("models", ["mock-model"])
    else:
        base_url = need("base_url", str)
        auth_env_var = need("auth_env_var", str)
        models = table.get("models")
    if not isinstance(models, list) or not models or not all(isinstance(m, str) for m in models):
        raise MalformedConfigError(f"{where}.models must be a non-empty list of strings")
    timeout = need("timeout", float, 120.0)
    if timeout <= 0:
        raise MalformedConfigError(f"{where}.timeout must be > 0")
    max_retries = need("max_retries", int, 2)
    if max_retries < 0:
        raise MalformedConfigError(f"{where}.max_retries must be >= 0")
    max_concurrency = table.get("max_concurrency")
    if max_concurrency is not None and (not isinstance(max_concurrency, int) or max_concurrency < 1):
        raise MalformedConfigError(f"{where}.max_concurrency must be a positive integer")
    backoff_base = need("backoff_base", float, 1.0)
    return ProviderProfile(
        id=provider_id,
        wire_protocol=protocol,
        base_url=base_url,
        auth_env_var=auth_env_var,
        models=tuple(models),
        timeout=timeout,
        max_retries=max_retries,
        max_concurrency=max_concurrency,
        backoff_base=backoff_base,
    )


def parse_registry(text: str, env: Mapping[str, str] | None = None) -> ProviderRegistry:
    """Parse the TOML provider config; providers whose auth env var is
    unset load fine but are flagged unavailable with a warning."""
    env = os.environ if env is None else env
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise MalformedConfigError(f"config is not valid TOML: {exc}") from exc
    tables = data.get("provider")
    if tables is None:
        raise MalformedConfigError("config declares no [[provider]] tables")
    if not isinstance(tables, list):
        raise MalformedConfigError("provider must be an array of tables ([[provider]])")
    profiles = [_profile_from_table(i, t) for i, t in enumerate(tables)]
    warnings: list[Diagnostic] = []
    for profile in profiles:
        if not is_available(profile, env):
            warnings.append(
                warning(
                    "missing_auth",
                    f"provider {profile.id!r}: environment variable {profile.auth_env_var!r} "
                    "is not set; provider marked unavailable",
                    subject=profile.id,
                )
            )
    return ProviderRegistry(profiles, warnings)


def load_registry(path: str | Path, env: Mapping[str, str] | None = None) -> ProviderRegistry:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise MalformedConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_registry(text, env)


def mock_provider(
    script: Sequence[MockBehavior] | None = None,
    provider_id: str = "mock",
    models: Sequence[str] = ("mock-model",),
    **kw,
) -> ProviderProfile:
    """A mock profile; with no script it synthesizes grammar-conforming
    responses for whatever prompt it receives."""
    return ProviderProfile(
        id=provider_id,
        wire_protocol=WireProtocol.MOCK,
        models=tuple(models),
        script=MockScript(script) if script is not None else MockScript(),
        **kw,
    )


def default_registry() -> ProviderRegistry:
    return ProviderRegistry([mock_provider()])


_SNIFF_ORDER = (
    ("<selected_path>", ReasoningMethod.BEAM_SEARCH),
    ("<node", ReasoningMethod.TREE_OF_THOUGHTS),
    ("<chain", ReasoningMethod.SELF_CONSISTENCY),
    ("<reflection>", ReasoningMethod.SELF_REFINE),
    ("<subquestion>", ReasoningMethod.LEAST_TO_MOST),
    ("<step>", ReasoningMethod.CHAIN_OF_THOUGHTS),
)


def _default_mock_text(prompt: str) -> str:
    """Deterministic synthetic answer matching whichever grammar the
    prompt asks for; identical prompts get identical responses."""
    digest = int.from_bytes(hashlib.sha256(prompt.encode("utf-8")).digest()[:8], "big")
    if "<selected_method>" in prompt:
        methods = list(ReasoningMethod)
        choice = methods[digest % len(methods)]
        return f"I would use <selected_method>{choice.value}</selected_method> here."
    for marker, method in _SNIFF_ORDER:
        if marker in prompt:
            return synth.make_sample(method, random.Random(digest)).text
    return synth.make_sample(ReasoningMethod.CHAIN_OF_THOUGHTS, random.Random(digest)).text


class _RetryableFailure(Exception):
    def __init__(self, final_error: Exception):
        super().__init__(str(final_error))
        self.final_error = final_error


def _attempt_mock(profile: ProviderProfile, request: GenerationRequest, sleep: Callable[[float], None]) -> str:
    script = profile.script or MockScript()
    behavior = script.next(request.prompt)
    if behavior is None:
        return _default_mock_text(request.prompt)
    if isinstance(behavior, MockReply):
        return behavior.text
    if isinstance(behavior, MockDelay):
        sleep(behavior.delay_ms / 1000.0)
        return behavior.text
    if isinstance(behavior, MockTimeout):
        raise _RetryableFailure(ProviderTimeoutError(f"provider {profile.id!r} timed out"))
    return _raise_for_status(profile, behavior.status)


def _raise_for_status(profile: ProviderProfile, status: int) -> str:
    if status in (401, 403):
        raise UnauthorizedError(f"provider {profile.id!r} rejected credentials (HTTP {status})")
    if status == 429:
        raise _RetryableFailure(RateLimitedError(f"provider {profile.id!r} rate limited (HTTP 429)"))
    if status >= 500:
        raise _RetryableFailure(ProviderError(f"provider {profile.id!r} failed (HTTP {status})"))
    raise ProviderError(f"provider {profile.id!r} returned unexpected HTTP {status}")


def _request_payload(profile: ProviderProfile, request: GenerationRequest, key: str):
    base = profile.base_url.rstrip("/")
    if profile.wire_protocol is WireProtocol.OPENAI_CHAT:
        url = f"{base}/chat/completions"
        headers = {"Authorization": f"Bearer {key}"}
    else:
        url = f"{base}/messages" if base.endswith("/v1") else f"{base}/v1/messages"
        headers = {"x-api-key": key, "anthropic-version": ANTHROPIC_VERSION}
    body = {
        "model": request.model,
        "max_tokens": request.max_tokens,
        "temperature": request.temperature,
        "messages": [{"role": "user", "content": request.prompt}],
    }
    return url, headers, body


def _extract_text(profile: ProviderProfile, data: object) -> str:
    try:
        if profile.wire_protocol is WireProtocol.OPENAI_CHAT:
            text = data["choices"][0]["message"]["content"]  # type: ignore[index]
        else:
            blocks = data["content"]  # type: ignore[index]
            text = next(b["text"] for b in blocks if b.get("type") == "text")
    except (KeyError, IndexError, TypeError, StopIteration):
        raise MalformedProviderResponseError(
            f"provider {profile.id!r} response has no text field"
        ) from None
    if not isinstance(text, str):
        raise MalformedProviderResponseError(f"provider {profile.id!r} response text is not a string")
    return text


def _attempt_http(profile: ProviderProfile, request: GenerationRequest, key: str,
                  session: requests.Session | None) -> str:
    url, headers, body = _request_payload(profile, request, key)
    post = (session or requests).post
    try:
        response = post(url, headers=headers, json=body, timeout=profile.timeout)
    except requests.Timeout:
        raise _RetryableFailure(ProviderTimeoutError(f"provider {profile.id!r} timed out")) from None
    except requests.RequestException:
        # never chain the original exception: its repr may embed headers
        raise _RetryableFailure(ProviderError(f"provider {profile.id!r} network error")) from None
    if response.status_code != 200:
        return _raise_for_status(profile, response.status_code)
    try:
        data = response.json()
    except ValueError:
        raise MalformedProviderResponseError(f"provider {profile.id!r} response is not JSON") from None
    return _extract_text(profile, data)


def generate(
    registry: ProviderRegistry,
    request: GenerationRequest,
    *,
    session: requests.Session | None = None,
    sleep: Callable[[float], None] = time.sleep,
    env: Mapping[str, str] | None = None,
) -> GenerationResult:
    """Send a prompt through a provider's wire protocol.

    Transient failures (network errors, timeouts, HTTP 429/5xx) are retried
    up to profile.max_retries times with full-jitter exponential backoff;
    auth rejections and malformed responses fail immediately. Total
    attempts never exceed 1 + max_retries.
    """
    profile = registry.get(request.provider)
    if request.model not in profile.models:
        raise UnknownModelError(
            f"provider {profile.id!r} does not list model {request.model!r}"
        )
    key = ""
    if profile.wire_protocol is not WireProtocol.MOCK:
        env = os.environ if env is None else env
        key = env.get(profile.auth_env_var, "")
        if not key:
            raise UnauthorizedError(
                f"provider {profile.id!r} is unavailable: environment variable "
                f"{profile.auth_env_var!r} is not set"
            )

    started = time.perf_counter()
    attempts = profile.max_retries + 1
    with registry.gate_for(profile.id):
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                if profile.wire_protocol is WireProtocol.MOCK:
                    text = _attempt_mock(profile, request, sleep)
                else:
                    text = _attempt_http(profile, request, key, session)
                break
            except _RetryableFailure as failure:
                last_error = failure.final_error
                if attempt + 1 < attempts:
                    sleep(random.uniform(0, profile.backoff_base * (2 ** attempt)))
        else:
            assert last_error is not None
            raise last_error
    latency_ms = (time.perf_counter() - started) * 1000.0
    return GenerationResult(text=text, latency_ms=latency_ms, provider=profile.id, model=request.model)

"""Provider registry and completion backends.

Two backends exist: a deterministic builtin mock (a first-class provider, so
the whole system runs offline) and a generic HTTP provider speaking a minimal
JSON contract. Remote calls are guarded by a per-provider concurrency limit
and a token-bucket rate limiter, and transient failures retry with jittered
exponential backoff.
"""

import hashlib
import json
import os
import random
import threading
import time
from decimal import Decimal
from pathlib import Path
from typing import Callable

import httpx

from ..core import Role
from .base import (
    AuthFailure,
    ContextOverflow,
    FixtureMissing,
    GatewayError,
    MalformedProviderResponse,
    Prompt,
    ProviderSpec,
    ProviderUnreachable,
    RateLimited,
    UnknownProvider,
)
from .cost import UsageRecord
from .tokens import estimate_tokens

DEFAULT_RETRIES = 3
DEFAULT_BACKOFF_BASE = 0.5
DEFAULT_MAX_IN_FLIGHT = 4

# Seed registry: the model names a deployment will typically bind, plus the
# builtin mock. Prices are deliberately zero here; vendor pricing drifts, so
# deployments supply their own in the registry file.
_DEFAULT_SPECS: tuple[tuple[str, str, int], ...] = (
    ("gpt-4o", "", 8192),
    ("gpt-4-turbo", "", 8192),
    ("gpt-3.5-turbo", "", 4096),
    ("qwen-7b-chat", "", 8192),
    ("qwen-14b-chat", "", 8192),
    ("deepseek-v3", "", 32000),
    ("deepseek-r1", "", 8192),
    ("chatglm-6b", "", 2048),
    ("chatglm2-6b", "", 8192),
    ("chatglm3-6b", "", 8192),
    ("baichuan-7b-base", "", 4096),
    ("baichuan-13b-base", "", 4096),
    ("baichuan-13b-chat", "", 4096),
    ("chatlaw-13b", "", 2048),
    ("chatlaw-33b", "", 2048),
    ("mock", "builtin", 100000),
)


def fingerprint(role: Role, user_text: str) -> str:
    """Stable key for a prompt: role plus a digest of the user text."""
    digest = hashlib.sha256(f"{role.value}\n{user_text}".encode("utf-8")).hexdigest()
    return digest[:16]


class ProviderRegistry:
    def __init__(self, specs: dict[str, ProviderSpec]):
        self._specs = dict(specs)

    @classmethod
    def default(cls) -> "ProviderRegistry":
        return cls(
            {
                name: ProviderSpec(name=name, endpoint=endpoint, max_context_tokens=ctx)
                for name, endpoint, ctx in _DEFAULT_SPECS
            }
        )

    @classmethod
    def from_mapping(cls, data: dict) -> "ProviderRegistry":
        specs = {}
        for name, fields in data.items():
            specs[name] = ProviderSpec(
                name=name,
                endpoint=fields.get("endpoint", ""),
                auth=fields.get("auth"),
                max_context_tokens=int(fields.get("max_context_tokens", 8192)),
                price_per_1k_input=Decimal(str(fields.get("price_per_1k_input", 0))),
                price_per_1k_output=Decimal(str(fields.get("price_per_1k_output", 0))),
            )
        return cls(specs)

    @classmethod
    def from_file(cls, path: str | Path) -> "ProviderRegistry":
        """Load a registry from a JSON or TOML file keyed by provider name."""
        path = Path(path)
        raw = path.read_bytes()
        if path.suffix == ".toml":
            try:
                import tomllib  # py >= 3.11
            except ModuleNotFoundError:
                import tomli as tomllib
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw.decode("utf-8"), parse_float=Decimal)
        return cls.from_mapping(data)

    def get(self, name: str) -> ProviderSpec:
        spec = self._specs.get(name)
        if spec is None:
            raise UnknownProvider(name)
        return spec

    def __contains__(self, name: str) -> bool:
        return name in self._specs

    def names(self) -> list[str]:
        return list(self._specs)


def prompt_tokens(prompt: Prompt) -> int:
    total = estimate_tokens(prompt.system_text) + estimate_tokens(prompt.user_text)
    for example_in, example_out in prompt.few_shot_examples:
        total += estimate_tokens(example_in) + estimate_tokens(example_out)
    return total


def _check_context(spec: ProviderSpec, prompt: Prompt) -> int:
    tokens = prompt_tokens(prompt)
    if tokens > spec.max_context_tokens:
        raise ContextOverflow(
            f"prompt estimated at {tokens} tokens exceeds {spec.name}'s "
            f"context of {spec.max_context_tokens}"
        )
    return tokens


class MockProvider:
    """Deterministic builtin provider.

    Responses come from a fixture map (fingerprint -> {text, input_tokens,
    output_tokens}) or, when a fingerprint is absent, from an optional
    responder callable. Never touches the network; identical fixtures yield
    identical outputs. All calls are recorded for replay inspection.
    """

    def __init__(
        self,
        spec: ProviderSpec,
        fixtures: dict[str, dict] | None = None,
        responder: Callable[[Prompt], str] | None = None,
    ):
        self.spec = spec
        self.fixtures = dict(fixtures or {})
        self.responder = responder
        self.calls: list[tuple[Role, Prompt, str]] = []
        self._lock = threading.Lock()

    @staticmethod
    def load_fixtures(path: str | Path) -> dict[str, dict]:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def complete(self, prompt: Prompt) -> tuple[str, UsageRecord]:
        input_tokens = _check_context(self.spec, prompt)
        fp = fingerprint(prompt.role, prompt.user_text)
        entry = self.fixtures.get(fp)
        if entry is not None:
            text = entry["text"]
            usage = UsageRecord(
                phase=prompt.role,
                input_tokens=int(entry.get("input_tokens", input_tokens)),
                output_tokens=int(entry.get("output_tokens", estimate_tokens(text))),
                provider=self.spec.name,
            )
        elif self.responder is not None:
            text = self.responder(prompt)
            usage = UsageRecord(
                phase=prompt.role,
                input_tokens=input_tokens,
                output_tokens=estimate_tokens(text),
                provider=self.spec.name,
            )
        else:
            raise FixtureMissing(
                f"mock provider has no scripted response for fingerprint {fp} "
                f"({prompt.role.value})"
            )
        with self._lock:
            self.calls.append((prompt.role, prompt, text))
        return text, usage


class TokenBucket:
    """Simple token-bucket limiter; one bucket per remote provider."""

    def __init__(
        self,
        rate_per_sec: float = 5.0,
        capacity: float = 5.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.rate = rate_per_sec
        self.capacity = capacity
        self._tokens = capacity
        self._last = clock()
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.rate
            self._sleep(wait)


class HttpProvider:
    """Remote provider speaking a minimal JSON completion contract.

    Request: ``POST endpoint`` with ``{model, system, user, few_shot}`` and a
    bearer token resolved from the spec's auth environment variable. Response:
    ``{text, input_tokens, output_tokens}``. Transport errors, 429 and 5xx are
    retried up to ``retries`` times with jittered exponential backoff; auth
    failures are not.
    """

    def __init__(
        self,
        spec: ProviderSpec,
        api_key: str | None = None,
        client: httpx.Client | None = None,
        retries: int = DEFAULT_RETRIES,
        backoff_base: float = DEFAULT_BACKOFF_BASE,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        bucket: TokenBucket | None = None,
    ):
        if not spec.endpoint or spec.is_builtin:
            raise ValueError(f"provider {spec.name!r} has no remote endpoint")
        self.spec = spec
        self._api_key = api_key if api_key is not None else self._resolve_key(spec)
        self._client = client or httpx.Client(timeout=60.0)
        self.retries = retries
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._slots = threading.Semaphore(max_in_flight)
        self._bucket = bucket or TokenBucket()

    @staticmethod
    def _resolve_key(spec: ProviderSpec) -> str | None:
        if spec.auth is None:
            return None
        return os.environ.get(spec.auth)

    def complete(self, prompt: Prompt) -> tuple[str, UsageRecord]:
        _check_context(self.spec, prompt)
        body = {
            "model": self.spec.name,
            "system": prompt.system_text,
            "user": prompt.user_text,
            "few_shot": [list(pair) for pair in prompt.few_shot_examples],
        }
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        last_error: Exception | None = None
        for attempt in range(1, self.retries + 1):
            try:
                with self._slots:
                    self._bucket.acquire()
                    response = self._client.post(self.spec.endpoint, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
            else:
                if response.status_code in (401, 403):
                    raise AuthFailure(f"{self.spec.name}: authentication rejected ({response.status_code})")
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = RateLimited(f"{self.spec.name}: HTTP {response.status_code}")
                else:
                    return self._parse(prompt, response)
            if attempt < self.retries:
                backoff = self.backoff_base * (2 ** (attempt - 1))
                self._sleep(backoff * (1 + self._rng.random() * 0.25))
        if isinstance(last_error, RateLimited):
            raise RateLimited(f"{self.spec.name}: rate limited after {self.retries} attempts")
        raise ProviderUnreachable(f"{self.spec.name}: {last_error}")

    def _parse(self, prompt: Prompt, response: httpx.Response) -> tuple[str, UsageRecord]:
        try:
            payload = response.json()
            text = payload["text"]
            usage = UsageRecord(
                phase=prompt.role,
                input_tokens=int(payload["input_tokens"]),
                output_tokens=int(payload["output_tokens"]),
                provider=self.spec.name,
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedProviderResponse(f"{self.spec.name}: {exc}") from exc
        if not isinstance(text, str):
            raise MalformedProviderResponse(f"{self.spec.name}: text is not a string")
        return text, usage


class Gateway:
    """Resolves provider names to live backends and issues completions.

    Provider handles are stateless for callers and cached per name; the mock
    shares one fixture map and responder across roles.
    """

    def __init__(
        self,
        registry: ProviderRegistry | None = None,
        mock_fixtures: dict[str, dict] | None = None,
        mock_responder: Callable[[Prompt], str] | None = None,
        secrets: dict[str, str] | None = None,
        http_client: httpx.Client | None = None,
    ):
        self.registry = registry or ProviderRegistry.default()
        self._mock_fixtures = mock_fixtures
        self._mock_responder = mock_responder
        self._secrets = dict(secrets or {})
        self._http_client = http_client
        self._providers: dict[str, object] = {}
        self._lock = threading.Lock()

    def provider(self, name: str):
        with self._lock:
            if name not in self._providers:
                spec = self.registry.get(name)
                if spec.is_builtin:
                    self._providers[name] = MockProvider(
                        spec, fixtures=self._mock_fixtures, responder=self._mock_responder
                    )
                else:
                    self._providers[name] = HttpProvider(
                        spec,
                        api_key=self._secrets.get(name),
                        client=self._http_client,
                    )
            return self._providers[name]

    def complete(self, provider_name: str, prompt: Prompt) -> tuple[str, UsageRecord]:
        return self.provider(provider_name).complete(prompt)

    def with_secrets(self, secrets: dict[str, str]) -> "Gateway":
        """Clone with session-scoped API keys; nothing else changes."""
        return Gateway(
            registry=self.registry,
            mock_fixtures=self._mock_fixtures,
            mock_responder=self._mock_responder,
            secrets=secrets,
            http_client=self._http_client,
        )


def complete(provider, prompt: Prompt) -> tuple[str, UsageRecord]:
    """Issue one completion against an already-constructed provider handle."""
    return provider.complete(prompt)

"""Shared gateway types and error classes."""

from dataclasses import dataclass
from decimal import Decimal

from ..core import Role


class GatewayError(Exception):
    pass


class MissingInput(GatewayError):
    pass


class AuthFailure(GatewayError):
    pass


class RateLimited(GatewayError):
    pass


class ContextOverflow(GatewayError):
    pass


class MalformedProviderResponse(GatewayError):
    pass


class ProviderUnreachable(GatewayError):
    pass


class FixtureMissing(GatewayError):
    """The mock provider has no scripted response for a prompt fingerprint."""


class UnknownProvider(GatewayError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"provider {name!r} not present in the registry")


@dataclass(frozen=True)
class Prompt:
    role: Role
    system_text: str
    user_text: str
    few_shot_examples: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "few_shot_examples", tuple(self.few_shot_examples))
        if not self.system_text:
            raise ValueError("system_text must be non-empty")


@dataclass(frozen=True)
class ProviderSpec:
    """One model backend: where it lives, how it authenticates, what it costs.

    ``auth`` names an environment variable (a secret reference); the secret
    itself is never stored in specs, job configs, or logs. ``endpoint`` is a
    URL for remote providers or "builtin" for the deterministic mock.
    """

    name: str
    endpoint: str = ""
    auth: str | None = None
    max_context_tokens: int = 8192
    price_per_1k_input: Decimal = Decimal("0")
    price_per_1k_output: Decimal = Decimal("0")

    def __post_init__(self):
        if self.max_context_tokens <= 0:
            raise ValueError("max_context_tokens must be > 0")
        if self.price_per_1k_input < 0 or self.price_per_1k_output < 0:
            raise ValueError("prices must be >= 0")

    @property
    def is_builtin(self) -> bool:
        return self.endpoint == "builtin"

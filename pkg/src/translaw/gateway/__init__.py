"""LLM provider gateway: prompts, completion backends, tokens, and cost."""

from .base import (
    AuthFailure,
    ContextOverflow,
    FixtureMissing,
    GatewayError,
    MalformedProviderResponse,
    MissingInput,
    Prompt,
    ProviderSpec,
    ProviderUnreachable,
    RateLimited,
    UnknownProvider,
)
from .cost import (
    CostComparison,
    CostReport,
    UsageRecord,
    accrue_cost,
    cost_comparisons,
    round_money,
)
from .prompts import (
    render_annotator_prompt,
    render_prompt,
    render_proofreader_prompt,
    render_translator_prompt,
    taxonomy_digest,
)
from .providers import (
    Gateway,
    HttpProvider,
    MockProvider,
    ProviderRegistry,
    TokenBucket,
    complete,
    fingerprint,
    prompt_tokens,
)
from .tokens import estimate_tokens, register_token_scheme

__all__ = [
    "AuthFailure",
    "ContextOverflow",
    "CostComparison",
    "CostReport",
    "FixtureMissing",
    "Gateway",
    "GatewayError",
    "HttpProvider",
    "MalformedProviderResponse",
    "MissingInput",
    "MockProvider",
    "Prompt",
    "ProviderRegistry",
    "ProviderSpec",
    "ProviderUnreachable",
    "RateLimited",
    "TokenBucket",
    "UnknownProvider",
    "UsageRecord",
    "accrue_cost",
    "complete",
    "cost_comparisons",
    "estimate_tokens",
    "fingerprint",
    "prompt_tokens",
    "register_token_scheme",
    "render_annotator_prompt",
    "render_prompt",
    "render_proofreader_prompt",
    "render_translator_prompt",
    "round_money",
    "taxonomy_digest",
]

import pytest

from translaw.core import Role
from translaw.gateway import (
    Gateway,
    ProviderRegistry,
    estimate_tokens,
    fingerprint,
    prompt_tokens,
)
from translaw.gateway import prompts as prompt_templates
from translaw.memory import open_stores
from translaw.pipeline import Services

FIXED_TIME = "2025-01-01T00:00:00+00:00"


def fixed_clock() -> str:
    return FIXED_TIME


MOCK_BINDINGS = {
    Role.TRANSLATOR: "mock",
    Role.ANNOTATOR: "mock",
    Role.PROOFREADER: "mock",
}


class ScriptedAgents:
    """Deterministic responder for mock jobs, keyed by what each role sees.

    drafts: focal source text -> draft translation
    annotations: draft text -> ERR record lines ("" = clean)
    revisions: draft text -> revised paragraph
    """

    def __init__(self, drafts=None, annotations=None, revisions=None):
        self.drafts = drafts or {}
        self.annotations = annotations or {}
        self.revisions = revisions or {}

    def __call__(self, prompt) -> str:
        if prompt.role is Role.TRANSLATOR:
            focal = prompt.user_text.split(prompt_templates.FOCAL_HEADER + "\n", 1)[1]
            return self.drafts[focal]
        draft = prompt.user_text.split(prompt_templates.DRAFT_HEADER + "\n", 1)[1]
        draft = draft.split("\n\n", 1)[0]
        if prompt.role is Role.ANNOTATOR:
            return self.annotations.get(draft, "")
        return self.revisions[draft]


def make_services(
    data_dir=None,
    responder=None,
    fixtures=None,
    glossary=None,
    registry=None,
    **kwargs,
) -> Services:
    registry = registry or ProviderRegistry.default()
    gateway = Gateway(registry=registry, mock_fixtures=fixtures, mock_responder=responder)
    tm, pm = open_stores(data_dir, clock=fixed_clock)
    return Services(
        gateway=gateway, tm=tm, pm=pm, glossary=glossary, clock=fixed_clock, **kwargs
    )


def record_fixture_map(services) -> dict:
    """Fixture-file entries for every mock call a recording run produced.

    Token counts mirror the responder-mode estimates, so a fixture-driven
    replay yields byte-identical usage.
    """
    provider = services.gateway.provider("mock")
    fixture = {}
    for role, prompt, text in provider.calls:
        fixture[fingerprint(role, prompt.user_text)] = {
            "text": text,
            "input_tokens": prompt_tokens(prompt),
            "output_tokens": estimate_tokens(text),
        }
    return fixture


@pytest.fixture
def mock_bindings():
    return dict(MOCK_BINDINGS)

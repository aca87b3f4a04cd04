#!/usr/bin/env python3
"""Regenerate the frontend test fixtures from the backend package.

Outputs (under tests/fixtures/):
  serialization_cases.json  100 annotations + their canonical record lines,
                            produced by the server-side serializer; the UI
                            serializer must reproduce them byte for byte.
  codes.json                the proofread-code taxonomy as served by /codes.
  mock_fixtures.json        scripted mock-provider responses for the
                            walkthrough job the browser test drives against
                            a real local server.
  walkthrough.json          the walkthrough script itself (text, drafts,
                            the human annotation, expected outputs).
"""

import json
import random
from pathlib import Path

from translaw.annotate import Annotation, serialize_annotations
from translaw.core import DEFAULT_TAXONOMY, LanguageTag, Role, segment_paragraphs
from translaw.gateway import (
    Gateway,
    ProviderRegistry,
    estimate_tokens,
    fingerprint,
    prompt_tokens,
)
from translaw.gateway.prompts import DRAFT_HEADER, FOCAL_HEADER
from translaw.memory import open_stores
from translaw.pipeline import (
    JobConfig,
    Services,
    advance,
    complete_annotation_round,
    create_job,
    render_target_text,
    submit_human_annotations,
)

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

WALKTHROUGH = {
    "text": "Para one.\n\nPara two.",
    "drafts": {"Para one.": "譯文一", "Para two.": "譯文二"},
    "revisions": {"譯文一": "翻譯一"},
    "annotation": {
        "span": "譯文",
        "occurrence": 1,
        "code": "CW",
        "suggestion": "翻譯",
        "rationale": "",
    },
    "expected_txt": "翻譯一\n\n譯文二\n",
}

_SPAN_ALPHABET = "法院上訴裁定條例香港特區終審甲乙丙丁abcdefgh"
_FIELD_ALPHABET = "建議理由字詞 abcdwxyz"


def gen_serialization_cases(count: int = 100) -> list[dict]:
    rng = random.Random(20250110)
    cases = []
    for _ in range(count):
        annotation = Annotation(
            span_text="".join(rng.choice(_SPAN_ALPHABET) for _ in range(rng.randint(1, 8))),
            occurrence=rng.randint(1, 4),
            code=rng.choice(DEFAULT_TAXONOMY.codes),
            suggestion="".join(rng.choice(_FIELD_ALPHABET) for _ in range(rng.randint(0, 8))).strip(),
            rationale="".join(rng.choice(_FIELD_ALPHABET) for _ in range(rng.randint(0, 8))).strip(),
        )
        cases.append(
            {
                "span": annotation.span_text,
                "occurrence": annotation.occurrence,
                "code": annotation.code.code,
                "suggestion": annotation.suggestion,
                "rationale": annotation.rationale,
                "line": serialize_annotations([annotation]),
            }
        )
    return cases


def walkthrough_responder(prompt):
    if prompt.role is Role.TRANSLATOR:
        focal = prompt.user_text.split(FOCAL_HEADER + "\n", 1)[1]
        return WALKTHROUGH["drafts"][focal]
    draft = prompt.user_text.split(DRAFT_HEADER + "\n", 1)[1].split("\n\n", 1)[0]
    return WALKTHROUGH["revisions"][draft]


def record_walkthrough_fixture() -> dict:
    """Replay the walkthrough in-process and capture the mock responses."""
    gateway = Gateway(registry=ProviderRegistry.default(), mock_responder=walkthrough_responder)
    tm, pm = open_stores(None)
    services = Services(gateway=gateway, tm=tm, pm=pm)
    config = JobConfig(
        role_bindings={role: "mock" for role in Role},
        direction=(LanguageTag("en"), LanguageTag("zh-Hant")),
        human_annotation=True,
    )
    job = create_job(config, segment_paragraphs(WALKTHROUGH["text"]))
    advance(job, services)
    annotation = WALKTHROUGH["annotation"]
    records = (
        f'ERR: "{annotation["span"]}"@{annotation["occurrence"]} | {annotation["code"]} '
        f'| {annotation["suggestion"]} | {annotation["rationale"]}'
    )
    submit_human_annotations(job, 0, records)
    complete_annotation_round(job, services)
    advance(job, services)
    assert job.state.value == "Complete", job.failure
    assert render_target_text(job) == WALKTHROUGH["expected_txt"]

    provider = gateway.provider("mock")
    fixture = {}
    for role, prompt, text in provider.calls:
        fixture[fingerprint(role, prompt.user_text)] = {
            "text": text,
            "input_tokens": prompt_tokens(prompt),
            "output_tokens": estimate_tokens(text),
        }
    return fixture


def main() -> None:
    FIXTURES_DIR.mkdir(parents=True, exist_ok=True)
    (FIXTURES_DIR / "serialization_cases.json").write_text(
        json.dumps(gen_serialization_cases(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    (FIXTURES_DIR / "codes.json").write_text(
        json.dumps(
            [
                {"code": c.code, "category": c.category.value, "description": c.description}
                for c in DEFAULT_TAXONOMY
            ],
            ensure_ascii=False,
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    (FIXTURES_DIR / "mock_fixtures.json").write_text(
        json.dumps(record_walkthrough_fixture(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    (FIXTURES_DIR / "walkthrough.json").write_text(
        json.dumps(WALKTHROUGH, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    print(f"fixtures written to {FIXTURES_DIR}")


if __name__ == "__main__":
    main()

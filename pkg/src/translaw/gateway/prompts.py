"""Role prompt construction for the three agents.

Assembly is purely deterministic text templating: identical inputs always
produce identical prompts, which is what makes fingerprint-keyed mock
fixtures and byte-identical replay possible.
"""

from typing import Mapping, Sequence

from ..annotate import Annotation, serialize_annotations
from ..core import DEFAULT_TAXONOMY, LanguageTag, ParagraphPair, Role, Taxonomy
from ..glossary import TermMatch
from .base import MissingInput, Prompt

# Section markers are part of the template contract; scripted mock responders
# key off them to locate the focal text inside a rendered prompt.
CONTEXT_HEADER = "Context paragraphs:"
GLOSSARY_HEADER = "Glossary renderings to use:"
FOCAL_HEADER = "Paragraph to translate:"
SOURCE_HEADER = "Source paragraph:"
DRAFT_HEADER = "Draft translation:"
ANNOTATIONS_HEADER = "Error annotations:"
PRECEDENTS_HEADER = "Precedent corrections from earlier reviews:"


def _require(inputs: Mapping, field: str, role: Role):
    if field not in inputs or inputs[field] is None:
        raise MissingInput(f"{role.value} prompt is missing required input {field!r}")
    return inputs[field]


def render_prompt(role: Role, inputs: Mapping) -> Prompt:
    """Assemble the prompt for a role from its input bundle.

    Translator: source, direction, optional context_pairs / glossary_matches /
    few_shot. Annotator: source, draft, optional taxonomy. Proofreader:
    source, draft, optional annotations / precedents.
    """
    if role is Role.TRANSLATOR:
        return render_translator_prompt(
            source=_require(inputs, "source", role),
            direction=_require(inputs, "direction", role),
            context_pairs=inputs.get("context_pairs", ()),
            glossary_matches=inputs.get("glossary_matches", ()),
            few_shot=inputs.get("few_shot", ()),
        )
    if role is Role.ANNOTATOR:
        return render_annotator_prompt(
            source=_require(inputs, "source", role),
            draft=_require(inputs, "draft", role),
            taxonomy=inputs.get("taxonomy", DEFAULT_TAXONOMY),
        )
    if role is Role.PROOFREADER:
        return render_proofreader_prompt(
            source=_require(inputs, "source", role),
            draft=_require(inputs, "draft", role),
            annotations=inputs.get("annotations", ()),
            precedents=inputs.get("precedents", ()),
        )
    raise MissingInput(f"no prompt template for role {role!r}")


def render_translator_prompt(
    source: str,
    direction: tuple[LanguageTag, LanguageTag],
    context_pairs: Sequence[ParagraphPair] = (),
    glossary_matches: Sequence[TermMatch] = (),
    few_shot: Sequence[tuple[str, str]] = (),
) -> Prompt:
    src_lang, tgt_lang = direction
    system = (
        "You are a professional legal translator working on court judgments. "
        f"Translate from {src_lang} to {tgt_lang}, preserving legal meaning, "
        "terminology, and the tone of the judgment. Keep terminology consistent "
        "with the glossary renderings when they are given. "
        "Respond with the translation of the focal paragraph only."
    )
    parts: list[str] = []
    if context_pairs:
        blocks = []
        for pair in context_pairs:
            block = f"[{pair.index}] SOURCE: {pair.source_text}"
            if pair.target_text:
                block += f"\n[{pair.index}] TARGET: {pair.target_text}"
            blocks.append(block)
        parts.append(CONTEXT_HEADER + "\n" + "\n".join(blocks))
    if glossary_matches:
        lines = [
            f"- {m.entry.source_term}: {m.entry.target_term}" for m in glossary_matches
        ]
        parts.append(GLOSSARY_HEADER + "\n" + "\n".join(lines))
    parts.append(FOCAL_HEADER + "\n" + source)
    return Prompt(
        role=Role.TRANSLATOR,
        system_text=system,
        user_text="\n\n".join(parts),
        few_shot_examples=tuple(few_shot),
    )


def taxonomy_digest(taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> str:
    """The full code list, category by category, as embedded in prompts."""
    sections = []
    current = None
    for code in taxonomy:
        if code.category is not current:
            current = code.category
            sections.append(f"{current.value}:")
        sections.append(f"  {code.code}: {code.description}")
    return "\n".join(sections)


_RECORD_GRAMMAR = (
    "Report each error on its own line, exactly in this form:\n"
    'ERR: "<verbatim span copied from the draft>"@<occurrence> | <CODE> | <suggested replacement> | <rationale>\n'
    "@<occurrence> selects which occurrence of the span is meant (default 1). "
    "Leave suggestion or rationale empty if you have none. "
    "Output only ERR: lines; output nothing at all for a clean translation."
)


def render_annotator_prompt(
    source: str,
    draft: str,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> Prompt:
    system = (
        "You review legal translations and mark every error in the draft using "
        "these proofread codes:\n"
        + taxonomy_digest(taxonomy)
        + "\n\n"
        + _RECORD_GRAMMAR
    )
    user = f"{SOURCE_HEADER}\n{source}\n\n{DRAFT_HEADER}\n{draft}"
    return Prompt(role=Role.ANNOTATOR, system_text=system, user_text=user)


def render_proofreader_prompt(
    source: str,
    draft: str,
    annotations: Sequence[Annotation] = (),
    precedents: Sequence = (),
) -> Prompt:
    system = (
        "You correct and finalize legal translations. Apply the error "
        "annotations to the draft, consult any precedent corrections, and "
        "respond with the full revised paragraph only."
    )
    parts = [f"{SOURCE_HEADER}\n{source}", f"{DRAFT_HEADER}\n{draft}"]
    if annotations:
        parts.append(ANNOTATIONS_HEADER + "\n" + serialize_annotations(list(annotations)))
    if precedents:
        blocks = []
        for i, record in enumerate(precedents, start=1):
            triplet = record.triplet
            blocks.append(
                f"{i}. SOURCE: {triplet.src}\n"
                f"   TRANSLATION: {triplet.ref}\n"
                f"   ERRORS: {serialize_annotations(list(triplet.err))}"
            )
        parts.append(PRECEDENTS_HEADER + "\n" + "\n".join(blocks))
    return Prompt(role=Role.PROOFREADER, system_text=system, user_text="\n\n".join(parts))

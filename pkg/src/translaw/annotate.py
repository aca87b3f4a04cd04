"""Error annotations: the records exchanged between annotator (model or human)
and proofreader, and their stored (src, ref, err) triplet form.

Two wire shapes are supported:

* machine records, one per line::

      ERR: "<span>"@<occurrence> | <CODE> | <suggestion> | <rationale>

  ``@<occurrence>`` defaults to 1 and picks which occurrence of the verbatim
  span inside the translation is meant. Suggestion and rationale may be empty.
  Spans are anchored by verbatim text plus occurrence index, never by
  character offsets, because quoted text can be checked against the
  translation while model-reported offsets cannot.

* inline-tagged documents, the style human reviewers produce, where an
  offending span is wrapped as ``⟦span⟧[CODE]`` or a bare ``[CODE]`` follows
  the offending phrase.
"""

import re
from dataclasses import dataclass, field

from .core import DEFAULT_TAXONOMY, ProofreadCode, Taxonomy, UnknownCode


class AnnotationError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedRecord(AnnotationError):
    """Record line with unbalanced quotes or the wrong field count."""


class SpanNotFound(AnnotationError):
    """The quoted span does not occur (often enough) in the translation."""


class UnbalancedDelimiter(AnnotationError):
    """Strict inline-tag extraction hit an unclosed span delimiter."""


class NoErrors(AnnotationError):
    """A clean translation produces no triplet."""


@dataclass(frozen=True)
class Annotation:
    """One marked error: a verbatim span of the translation plus a code."""

    span_text: str
    code: ProofreadCode
    occurrence: int = 1
    suggestion: str = ""
    rationale: str = ""

    def __post_init__(self):
        if not self.span_text:
            raise ValueError("annotation span_text must be non-empty")
        if self.occurrence < 1:
            raise ValueError("annotation occurrence must be >= 1")

    def to_json(self) -> dict:
        return {
            "span": self.span_text,
            "occurrence": self.occurrence,
            "code": self.code.code,
            "suggestion": self.suggestion,
            "rationale": self.rationale,
        }

    @classmethod
    def from_json(cls, data: dict, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> "Annotation":
        return cls(
            span_text=data["span"],
            occurrence=int(data.get("occurrence", 1)),
            code=taxonomy.validate_code(data["code"]),
            suggestion=data.get("suggestion", ""),
            rationale=data.get("rationale", ""),
        )


@dataclass(frozen=True)
class ErrTriplet:
    """A source paragraph, a candidate translation, and its marked errors."""

    src: str
    ref: str
    err: tuple[Annotation, ...]

    def __post_init__(self):
        object.__setattr__(self, "err", tuple(self.err))
        if not self.err:
            raise NoErrors("a triplet needs at least one annotation")
        for a in self.err:
            _check_span(a, self.ref)


def _check_span(annotation: Annotation, translation: str, line: int | None = None) -> None:
    if translation.count(annotation.span_text) < annotation.occurrence:
        raise SpanNotFound(
            f'span "{annotation.span_text}"@{annotation.occurrence} '
            "not found in the translation",
            line=line,
        )


# --------------------------------------------------------------------------
# Machine record format
# --------------------------------------------------------------------------

_RECORD = re.compile(r'^ERR:\s*"(?P<span>[^"\n]*)"(?:@(?P<occ>\d+))?\s*(?P<rest>\|.*)?$')


def parse_records(
    annotator_output: str,
    translation: str,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> list[Annotation]:
    """Parse ``ERR:`` record lines, verifying every span against the translation.

    Lines not starting with ``ERR:`` are ignored, so models may interleave
    commentary. Raises MalformedRecord / UnknownCode / SpanNotFound with the
    offending line number.
    """
    if not translation:
        raise ValueError("translation must be non-empty")
    annotations: list[Annotation] = []
    # Records are newline-delimited; other Unicode line boundaries are legal
    # inside fields and must not split a record.
    for line_no, raw_line in enumerate(annotator_output.split("\n"), start=1):
        line = raw_line.strip()
        if not line.startswith("ERR:"):
            continue
        m = _RECORD.match(line)
        if m is None:
            if line.count('"') != 2:
                raise MalformedRecord("unbalanced quotes around span", line=line_no)
            raise MalformedRecord("unrecognized record shape", line=line_no)
        span = m.group("span")
        if not span:
            raise MalformedRecord("empty span", line=line_no)
        occurrence = int(m.group("occ") or 1)
        if occurrence < 1:
            raise MalformedRecord("occurrence must be >= 1", line=line_no)
        rest = m.group("rest")
        if not rest:
            raise MalformedRecord("missing code field", line=line_no)
        fields = [f.strip() for f in rest.lstrip("|").split("|")]
        if len(fields) > 3:
            raise MalformedRecord(
                f"expected at most 4 fields (span | code | suggestion | rationale), got {len(fields) + 1}",
                line=line_no,
            )
        if not fields[0]:
            raise MalformedRecord("missing code field", line=line_no)
        try:
            code = taxonomy.validate_code(fields[0])
        except UnknownCode as exc:
            raise UnknownCode(exc.code, line=line_no) from None
        annotation = Annotation(
            span_text=span,
            occurrence=occurrence,
            code=code,
            suggestion=fields[1] if len(fields) > 1 else "",
            rationale=fields[2] if len(fields) > 2 else "",
        )
        _check_span(annotation, translation, line=line_no)
        annotations.append(annotation)
    return annotations


def serialize_annotations(annotations: list[Annotation]) -> str:
    """Emit canonical record lines, one per annotation, in input order.

    The record grammar cannot carry every string: spans may not contain ``"``
    or newlines, and code/suggestion/rationale fields may not contain ``|`` or
    newlines and must carry no surrounding whitespace (the parser strips them).
    Raises MalformedRecord for annotations the grammar cannot represent.
    """
    lines = []
    for a in annotations:
        if '"' in a.span_text or "\n" in a.span_text:
            raise MalformedRecord(f"span {a.span_text!r} cannot be quoted in a record")
        for name, value in (("suggestion", a.suggestion), ("rationale", a.rationale)):
            if "|" in value or "\n" in value:
                raise MalformedRecord(f"{name} {value!r} cannot appear in a record field")
            if value != value.strip():
                raise MalformedRecord(f"{name} {value!r} has surrounding whitespace")
        lines.append(
            f'ERR: "{a.span_text}"@{a.occurrence} | {a.code.code} | {a.suggestion} | {a.rationale}'
        )
    return "\n".join(lines)


def to_triplet(src: str, translation: str, annotations: list[Annotation]) -> ErrTriplet:
    """Bundle validated annotations into the stored triplet form."""
    if not annotations:
        raise NoErrors("clean translation: no annotations to store")
    return ErrTriplet(src=src, ref=translation, err=tuple(annotations))


# --------------------------------------------------------------------------
# Inline-tagged documents
# --------------------------------------------------------------------------

OPEN_DELIM = "⟦"   # ⟦
CLOSE_DELIM = "⟧"  # ⟧

# Tags attach leftward at most to the start of the sentence they sit in.
_SENTENCE_FINAL = set("。．.!?！？")

_TAG = re.compile(r"\[([^\[\]\n]+)\]")


def _codes_from_tag(token: str, taxonomy: Taxonomy) -> list[ProofreadCode] | None:
    """Split a bracketed token on '/' into codes; None if any part is unknown."""
    parts = [p.strip() for p in token.split("/")]
    codes = []
    for part in parts:
        if not part or part not in taxonomy:
            return None
        codes.append(taxonomy.validate_code(part))
    return codes


@dataclass
class _Extraction:
    clean: list[str] = field(default_factory=list)
    length: int = 0
    # (start offset in clean text, span, codes); occurrences resolved at the end
    found: list[tuple[int, str, list[ProofreadCode]]] = field(default_factory=list)
    last_tag_end: int = 0

    def emit(self, text: str) -> None:
        if text:
            self.clean.append(text)
            self.length += len(text)


def extract_inline_tags(
    marked_text: str,
    mode: str = "lenient",
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> tuple[str, list[Annotation]]:
    """Strip inline markup, returning the clean text and the annotations it carried.

    Both modes recognize ``⟦span⟧[CODE]`` (the tag must immediately follow the
    closing delimiter). Lenient mode additionally attaches a bare ``[CODE]``
    to the run of text since the previous tag or sentence-final punctuation,
    whichever is nearer. Multi-code tags like ``[CW/NC]`` yield one annotation
    per code over the same span. Bracketed tokens that are not taxonomy codes
    are ordinary text and stay in the clean output; strict mode also leaves
    bare code tags alone.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    if not marked_text:
        raise ValueError("marked_text must be non-empty")
    strict = mode == "strict"
    state = _Extraction()
    i = 0
    n = len(marked_text)
    while i < n:
        ch = marked_text[i]
        if ch == OPEN_DELIM:
            close = marked_text.find(CLOSE_DELIM, i + 1)
            if close == -1:
                if strict:
                    raise UnbalancedDelimiter(f"unclosed {OPEN_DELIM} at offset {i}")
                state.emit(ch)
                i += 1
                continue
            span = marked_text[i + 1 : close]
            tag = _TAG.match(marked_text, close + 1)
            codes = _codes_from_tag(tag.group(1), taxonomy) if tag else None
            if tag is None or codes is None:
                if strict:
                    raise UnbalancedDelimiter(
                        f"span delimiter at offset {i} is not followed by a code tag"
                    )
                # Delimiters drop out; span text and any inert tag stay.
                state.emit(span)
                i = close + 1
                continue
            start = state.length
            state.emit(span)
            if span:
                state.found.append((start, span, codes))
            state.last_tag_end = state.length
            i = tag.end()
            continue
        if ch == CLOSE_DELIM:
            if strict:
                raise UnbalancedDelimiter(f"stray {CLOSE_DELIM} at offset {i}")
            state.emit(ch)
            i += 1
            continue
        if ch == "[":
            tag = _TAG.match(marked_text, i)
            codes = _codes_from_tag(tag.group(1), taxonomy) if tag else None
            if tag is None or codes is None or strict:
                # Unknown token, or a bare tag in strict mode: inert text.
                end = tag.end() if tag else i + 1
                state.emit(marked_text[i:end])
                i = end
                continue
            span_start, span = _attach_run(state)
            if span:
                state.found.append((span_start, span, codes))
            state.last_tag_end = state.length
            i = tag.end()
            continue
        state.emit(ch)
        i += 1

    clean_text = "".join(state.clean)
    annotations = []
    for start, span, codes in state.found:
        occurrence = clean_text[:start].count(span) + 1
        for code in codes:
            annotations.append(Annotation(span_text=span, occurrence=occurrence, code=code))
    return clean_text, annotations


def _attach_run(state: _Extraction) -> tuple[int, str]:
    """Span for a bare tag: the text since the last tag or sentence boundary."""
    zone = "".join(state.clean)[state.last_tag_end :]
    boundary = 0
    for pos, ch in enumerate(zone):
        if ch in _SENTENCE_FINAL:
            boundary = pos + 1
    run = zone[boundary:]
    stripped = run.strip()
    if not stripped:
        return state.length, ""
    lead = len(run) - len(run.lstrip())
    start = state.last_tag_end + boundary + lead
    return start, stripped

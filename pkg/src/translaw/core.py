"""Shared domain model: language tags, paragraph pairs, documents, and the
proofread-code taxonomy.

Everything here is an immutable value object; instances can be shared freely
across threads.
"""

import csv
import hashlib
import io
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping


class CoreError(Exception):
    pass


class UnknownCode(CoreError):
    """A mnemonic that does not exist in the taxonomy."""

    def __init__(self, code: str, line: int | None = None):
        self.code = code
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unknown proofread code {code!r}{where}")


class EmptyDocument(CoreError):
    """No non-blank content to build a document from."""


class Role(str, Enum):
    TRANSLATOR = "Translator"
    ANNOTATOR = "Annotator"
    PROOFREADER = "Proofreader"


# --------------------------------------------------------------------------
# Language tags
# --------------------------------------------------------------------------

DEFAULT_LANGUAGE_TAGS = frozenset(
    {"en", "zh", "zh-Hant", "zh-Hans", "yue", "fr", "de", "ja", "ko", "es", "pt"}
)

_language_registry: set[str] = set(DEFAULT_LANGUAGE_TAGS)


def register_language_tag(code: str) -> None:
    """Extend the set of accepted language tags for this process."""
    if not code:
        raise ValueError("language tag must be non-empty")
    _language_registry.add(code)


@dataclass(frozen=True)
class LanguageTag:
    code: str

    def __post_init__(self):
        if not self.code:
            raise ValueError("language tag must be non-empty")
        if self.code not in _language_registry:
            raise ValueError(
                f"unsupported language tag {self.code!r}; "
                f"known tags: {', '.join(sorted(_language_registry))}"
            )

    def __str__(self) -> str:
        return self.code


# --------------------------------------------------------------------------
# Paragraphs and documents
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ParagraphPair:
    """One source paragraph and (optionally) its target-side text."""

    index: int
    source_text: str
    target_text: str | None = None
    source_lang: LanguageTag = LanguageTag("en")
    target_lang: LanguageTag = LanguageTag("zh-Hant")

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("paragraph index must be >= 0")
        if not self.source_text:
            raise ValueError(f"paragraph {self.index}: source_text must be non-empty")


@dataclass(frozen=True)
class AlignedDocument:
    """Ordered paragraph pairs; indices are always contiguous from zero."""

    doc_id: str
    pairs: tuple[ParagraphPair, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        indices = [p.index for p in self.pairs]
        if indices != list(range(len(indices))):
            raise ValueError(
                f"document {self.doc_id!r}: paragraph indices must be 0..n-1 "
                f"with no gaps or duplicates, got {indices}"
            )

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[ParagraphPair]:
        return iter(self.pairs)

    def with_targets(self, targets: Mapping[int, str]) -> "AlignedDocument":
        """Copy of the document with target_text filled in for the given indices."""
        new_pairs = tuple(
            replace(p, target_text=targets[p.index]) if p.index in targets else p
            for p in self.pairs
        )
        return replace(self, pairs=new_pairs)


_BLANK_LINE = re.compile(r"\n\s*\n")


def segment_paragraphs(
    raw_text: str,
    source_lang: LanguageTag = LanguageTag("en"),
    target_lang: LanguageTag = LanguageTag("zh-Hant"),
    doc_id: str | None = None,
) -> AlignedDocument:
    """Split raw text into a source-only document on blank-line boundaries.

    Segments are trimmed, empty segments dropped, indices assigned in order.
    The default doc_id is derived from the content so repeated runs agree.
    """
    if not raw_text:
        raise EmptyDocument("input text is empty")
    segments = [s.strip() for s in _BLANK_LINE.split(raw_text)]
    segments = [s for s in segments if s]
    if not segments:
        raise EmptyDocument("no non-blank paragraphs in input")
    if doc_id is None:
        doc_id = "doc-" + hashlib.sha256(raw_text.encode("utf-8")).hexdigest()[:12]
    pairs = tuple(
        ParagraphPair(
            index=i, source_text=s, source_lang=source_lang, target_lang=target_lang
        )
        for i, s in enumerate(segments)
    )
    return AlignedDocument(doc_id=doc_id, pairs=pairs)


# --------------------------------------------------------------------------
# Proofread-code taxonomy
# --------------------------------------------------------------------------


class Category(str, Enum):
    ACCURACY = "Accuracy"
    GRAMMAR = "Grammar"
    USAGE_AND_STYLE = "UsageAndStyle"

    @classmethod
    def parse(cls, raw: str) -> "Category":
        key = "".join(raw.split()).casefold()
        for member in cls:
            if "".join(member.value.split()).casefold() == key:
                return member
        if key in ("usageandstyle", "usage&style", "usagestyle"):
            return cls.USAGE_AND_STYLE
        raise ValueError(f"unknown error category {raw!r}")


@dataclass(frozen=True)
class ProofreadCode:
    code: str
    category: Category
    description: str

    def __post_init__(self):
        if not 2 <= len(self.code) <= 4:
            raise ValueError(f"code mnemonic must be 2-4 characters, got {self.code!r}")


# Canonical code table. Order within each category is the presentation order
# used everywhere (listings, prompts, the /codes endpoint).
_DEFAULT_CODES: tuple[tuple[str, Category, str], ...] = (
    ("CW", Category.ACCURACY, "Choice of word. The word or expression is not a good choice."),
    ("IF", Category.ACCURACY, "Information structure not preserved."),
    ("MC", Category.ACCURACY, "Meaning has been changed because of inappropriate restructuring, e.g., changing the passive to active or vice versa."),
    ("MT", Category.ACCURACY, "Mistranslation due to inadequate comprehension or misinterpretation of the source text."),
    ("NA", Category.ACCURACY, "The translation conveys a different meaning from that of the source text."),
    ("NC", Category.ACCURACY, "Meaning not clear, e.g., because of ambiguity, vagueness or syntactic problems."),
    ("OM", Category.ACCURACY, "Omission. Part of the original has been left untranslated."),
    ("OT", Category.ACCURACY, "Over-translation. Too much has been read into the source text."),
    ("TL", Category.ACCURACY, "Too literal, affecting comprehensibility."),
    ("UT", Category.ACCURACY, "Under-translation. Meaning is not adequately captured in translation."),
    ("Art", Category.GRAMMAR, "Article."),
    ("Det", Category.GRAMMAR, "Determiner."),
    ("MD", Category.GRAMMAR, "Modality."),
    ("NB", Category.GRAMMAR, "Number."),
    ("PN", Category.GRAMMAR, "Punctuation."),
    ("Prep", Category.GRAMMAR, "Wrong preposition."),
    ("PS", Category.GRAMMAR, "Part of speech."),
    ("SP", Category.GRAMMAR, "Spelling or wrong character."),
    ("ST", Category.GRAMMAR, "The sentence or part of the sentence is ill-formed or ambiguous."),
    ("SV", Category.GRAMMAR, "Subject verb agreement."),
    ("TN", Category.GRAMMAR, "Tense problem."),
    ("WO", Category.GRAMMAR, "Word order."),
    ("CL", Category.USAGE_AND_STYLE, "Collocation problem."),
    ("CN", Category.USAGE_AND_STYLE, "The word or expression has connotation not appropriate in the context."),
    ("CO", Category.USAGE_AND_STYLE, "Connective problem, e.g., inappropriate connectives."),
    ("IC", Category.USAGE_AND_STYLE, "Inconsistent use of a word; or incoherence between clauses or sentences."),
    ("ID", Category.USAGE_AND_STYLE, "Idiomaticity, i.e., unidiomatic expression."),
    ("RF", Category.USAGE_AND_STYLE, "Reference problem, e.g., ambiguous use of a pronoun."),
    ("RN", Category.USAGE_AND_STYLE, "Redundancy: the word or expression should be deleted."),
    ("SL", Category.USAGE_AND_STYLE, "Stylistic problems, e.g., the word or expression is not of an appropriate style."),
    ("TS", Category.USAGE_AND_STYLE, "Transition problems: sentences not well connected; bad language flow."),
)


class Taxonomy:
    """The proofread-code system: a fixed set of codes grouped in three categories.

    Mnemonics are stored in canonical casing (``Art``, ``Det``, ``Prep`` are
    mixed case); lookups are case-insensitive because model output casing
    varies.
    """

    def __init__(self, codes: Iterable[ProofreadCode]):
        self._codes: tuple[ProofreadCode, ...] = tuple(codes)
        self._by_key: dict[str, ProofreadCode] = {}
        for c in self._codes:
            key = c.code.casefold()
            if key in self._by_key:
                raise ValueError(f"duplicate code mnemonic {c.code!r}")
            self._by_key[key] = c

    def __len__(self) -> int:
        return len(self._codes)

    def __iter__(self) -> Iterator[ProofreadCode]:
        return iter(self._codes)

    def __contains__(self, raw: str) -> bool:
        return raw.casefold() in self._by_key

    @property
    def codes(self) -> tuple[ProofreadCode, ...]:
        return self._codes

    def validate_code(self, raw: str, line: int | None = None) -> ProofreadCode:
        """Resolve a raw mnemonic to its canonical taxonomy entry."""
        if not raw:
            raise UnknownCode(raw, line=line)
        entry = self._by_key.get(raw.casefold())
        if entry is None:
            raise UnknownCode(raw, line=line)
        return entry

    def codes_by_category(self, category: Category) -> list[ProofreadCode]:
        return [c for c in self._codes if c.category is category]

    @classmethod
    def from_csv(cls, content: str) -> "Taxonomy":
        """Load a taxonomy from UTF-8 CSV with header ``code,category,description``."""
        reader = csv.reader(io.StringIO(content))
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
        if not rows:
            raise ValueError("empty taxonomy CSV")
        if [cell.strip().casefold() for cell in rows[0][:3]] == ["code", "category", "description"]:
            rows = rows[1:]
        codes = []
        for i, row in enumerate(rows, start=1):
            if len(row) < 3:
                raise ValueError(f"taxonomy CSV line {i}: expected code,category,description")
            codes.append(
                ProofreadCode(
                    code=row[0].strip(),
                    category=Category.parse(row[1]),
                    description=row[2].strip(),
                )
            )
        return cls(codes)


def default_taxonomy() -> Taxonomy:
    return Taxonomy(ProofreadCode(c, cat, d) for c, cat, d in _DEFAULT_CODES)


# Shared default instance; the taxonomy is immutable so this is safe.
DEFAULT_TAXONOMY = default_taxonomy()


def validate_code(raw: str, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> ProofreadCode:
    return taxonomy.validate_code(raw)


def codes_by_category(
    category: Category, taxonomy: Taxonomy = DEFAULT_TAXONOMY
) -> list[ProofreadCode]:
    return taxonomy.codes_by_category(category)

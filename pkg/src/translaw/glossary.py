"""Terminology glossaries: loading, source-term matching, and consistency checks.

Matching is case-insensitive and whitespace-normalized on the source side
(legal English capitalizes inconsistently and line wrapping varies); target
checks are exact substring since Traditional Chinese has no case. A term may
not start or end in the middle of a Latin word ("appeal" never matches inside
"appeals"); CJK terms match at any offset.
"""

import csv
import io
import re
from dataclasses import dataclass
from typing import Iterable, Iterator


class GlossaryParseError(Exception):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class GlossaryEntry:
    source_term: str
    target_term: str
    domain_label: str | None = None

    def __post_init__(self):
        if not self.source_term or not self.target_term:
            raise ValueError("glossary terms must be non-empty")


@dataclass(frozen=True)
class TermMatch:
    entry: GlossaryEntry
    start: int
    end: int


@dataclass(frozen=True)
class Violation:
    entry: GlossaryEntry
    reason: str


def _normalize(term: str) -> str:
    return " ".join(term.split()).casefold()


class Glossary:
    """Immutable snapshot of glossary entries, deduplicated, in load order.

    A source term may map to several targets (legitimate synonyms); all are
    kept and consistency passes if any one appears in the translation.
    """

    def __init__(self, entries: Iterable[GlossaryEntry]):
        self._entries: list[GlossaryEntry] = []
        self._targets: dict[str, list[str]] = {}
        self._first_entry: dict[str, GlossaryEntry] = {}
        seen: set[tuple[str, str]] = set()
        for entry in entries:
            key = (_normalize(entry.source_term), entry.target_term)
            if key in seen:
                continue
            seen.add(key)
            self._entries.append(entry)
            norm = key[0]
            self._targets.setdefault(norm, []).append(entry.target_term)
            self._first_entry.setdefault(norm, entry)
        self._patterns = [
            (self._first_entry[norm], _term_pattern(norm))
            for norm in self._targets
        ]

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[GlossaryEntry]:
        return iter(self._entries)

    def targets_for(self, source_term: str) -> list[str]:
        return list(self._targets.get(_normalize(source_term), []))


def _term_pattern(normalized_term: str) -> re.Pattern:
    tokens = normalized_term.split(" ")
    return re.compile(r"\s+".join(re.escape(t) for t in tokens), re.IGNORECASE)


def load_glossary(content: str, format: str = "tsv") -> Glossary:
    """Parse TSV/CSV rows ``source<sep>target[<sep>domain]`` into a Glossary.

    A header row is skipped when its first cell is literally "source".
    Duplicate (source, target) rows collapse; conflicting targets for one
    source are all kept.
    """
    if format not in ("tsv", "csv"):
        raise ValueError(f"format must be 'tsv' or 'csv', got {format!r}")
    delimiter = "\t" if format == "tsv" else ","
    reader = csv.reader(io.StringIO(content), delimiter=delimiter)
    entries = []
    for line_no, row in enumerate(reader, start=1):
        if not row or not any(cell.strip() for cell in row):
            continue
        if line_no == 1 and row[0].strip().casefold() == "source":
            continue
        if not 2 <= len(row) <= 3:
            raise GlossaryParseError(
                f"expected source, target[, domain] columns, got {len(row)}", line=line_no
            )
        source, target = row[0].strip(), row[1].strip()
        if not source or not target:
            raise GlossaryParseError("empty source or target term", line=line_no)
        domain = row[2].strip() if len(row) == 3 and row[2].strip() else None
        entries.append(GlossaryEntry(source, target, domain))
    return Glossary(entries)


def _is_latin_word_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


def _boundary_ok(text: str, start: int, end: int) -> bool:
    if start > 0 and _is_latin_word_char(text[start - 1]) and _is_latin_word_char(text[start]):
        return False
    if end < len(text) and _is_latin_word_char(text[end - 1]) and _is_latin_word_char(text[end]):
        return False
    return True


def match_terms(source_text: str, glossary: Glossary) -> list[TermMatch]:
    """Greedy left-to-right longest-match of glossary source terms.

    Matched regions are consumed, so results never overlap; where two terms
    start at the same offset the longer match wins. Result is sorted by start.
    """
    matches: list[TermMatch] = []
    pos = 0
    while pos < len(source_text):
        best: tuple[int, int, GlossaryEntry] | None = None  # (start, end, entry)
        for entry, pattern in glossary._patterns:
            m = pattern.search(source_text, pos)
            while m is not None and not _boundary_ok(source_text, m.start(), m.end()):
                m = pattern.search(source_text, m.start() + 1)
            if m is None:
                continue
            if best is None or (m.start(), -(m.end() - m.start())) < (best[0], -(best[1] - best[0])):
                best = (m.start(), m.end(), entry)
        if best is None:
            break
        matches.append(TermMatch(entry=best[2], start=best[0], end=best[1]))
        pos = best[1]
    return matches


def check_consistency(
    translation: str,
    matches: list[TermMatch],
    glossary: Glossary | None = None,
) -> list[Violation]:
    """Report matched terms none of whose glossary renderings appear in the translation.

    Informational only; the pipeline never blocks on violations. When the
    glossary is given, every target registered for the source term counts as
    acceptable, not just the matched entry's.
    """
    violations: list[Violation] = []
    seen: set[str] = set()
    for match in matches:
        norm = _normalize(match.entry.source_term)
        if norm in seen:
            continue
        seen.add(norm)
        targets = glossary.targets_for(match.entry.source_term) if glossary else []
        if not targets:
            targets = [
                m.entry.target_term
                for m in matches
                if _normalize(m.entry.source_term) == norm
            ]
        if any(t in translation for t in targets):
            continue
        rendered = ", ".join(targets)
        violations.append(
            Violation(
                entry=match.entry,
                reason=(
                    f'no glossary rendering of "{match.entry.source_term}" '
                    f"found in the translation (expected one of: {rendered})"
                ),
            )
        )
    return violations

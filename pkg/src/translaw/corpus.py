"""Bilingual corpus ingestion, statistics, and test-set selection.

Reference corpora are fully bilingual: every pair carries both source and
target text. The corpus data itself is external; this module only validates
and normalizes what the user supplies.
"""

import json
import random
from dataclasses import dataclass
from typing import Iterable

from .core import AlignedDocument, EmptyDocument, LanguageTag, ParagraphPair, segment_paragraphs
from .gateway.tokens import estimate_tokens


class CorpusError(Exception):
    pass


class AlignmentMismatch(CorpusError):
    def __init__(self, source_count: int, target_count: int, doc_id: str | None = None):
        self.source_count = source_count
        self.target_count = target_count
        where = f" in document {doc_id!r}" if doc_id else ""
        super().__init__(
            f"paragraph counts differ{where}: {source_count} source vs {target_count} target"
        )


class CorpusParseError(CorpusError):
    pass


class SelectorUnsatisfiable(CorpusError):
    pass


@dataclass(frozen=True)
class AlignedCorpus:
    documents: tuple[AlignedDocument, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        for doc in self.documents:
            for pair in doc.pairs:
                if not pair.target_text:
                    raise ValueError(
                        f"corpus {self.name!r}: document {doc.doc_id!r} paragraph "
                        f"{pair.index} has no target text"
                    )

    @property
    def pair_count(self) -> int:
        return sum(len(d) for d in self.documents)


@dataclass(frozen=True)
class CorpusStats:
    document_count: int
    pair_count: int
    source_chars: int
    target_chars: int
    estimated_source_tokens: int


def ingest_parallel(
    source_text: str,
    target_text: str,
    doc_id: str,
    source_lang: LanguageTag = LanguageTag("en"),
    target_lang: LanguageTag = LanguageTag("zh-Hant"),
) -> AlignedDocument:
    """Align two blank-line-delimited texts paragraph by paragraph."""
    source_doc = segment_paragraphs(source_text, source_lang, target_lang, doc_id=doc_id)
    try:
        target_doc = segment_paragraphs(target_text, source_lang, target_lang, doc_id=doc_id)
    except EmptyDocument:
        raise AlignmentMismatch(len(source_doc), 0, doc_id=doc_id) from None
    if len(source_doc) != len(target_doc):
        raise AlignmentMismatch(len(source_doc), len(target_doc), doc_id=doc_id)
    pairs = tuple(
        ParagraphPair(
            index=i,
            source_text=s.source_text,
            target_text=t.source_text,
            source_lang=source_lang,
            target_lang=target_lang,
        )
        for i, (s, t) in enumerate(zip(source_doc.pairs, target_doc.pairs))
    )
    return AlignedDocument(doc_id=doc_id, pairs=pairs)


def ingest_parallel_files(
    file_pairs: Iterable[tuple[str, str]],
    name: str = "",
    source_lang: LanguageTag = LanguageTag("en"),
    target_lang: LanguageTag = LanguageTag("zh-Hant"),
) -> AlignedCorpus:
    documents = []
    for source_path, target_path in file_pairs:
        with open(source_path, encoding="utf-8") as fh:
            source_text = fh.read()
        with open(target_path, encoding="utf-8") as fh:
            target_text = fh.read()
        documents.append(
            ingest_parallel(source_text, target_text, doc_id=str(source_path),
                            source_lang=source_lang, target_lang=target_lang)
        )
    return AlignedCorpus(documents=tuple(documents), name=name)


def ingest_jsonl(
    content: str,
    name: str = "",
    source_lang: LanguageTag = LanguageTag("en"),
    target_lang: LanguageTag = LanguageTag("zh-Hant"),
) -> AlignedCorpus:
    """Load a corpus from JSON lines with fields {doc_id, index, src, tgt}."""
    rows_by_doc: dict[str, dict[int, tuple[str, str]]] = {}
    doc_order: list[str] = []
    for line_no, line in enumerate(content.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
            doc_id, index = row["doc_id"], int(row["index"])
            src, tgt = row["src"], row["tgt"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorpusParseError(f"line {line_no}: {exc}") from exc
        if doc_id not in rows_by_doc:
            rows_by_doc[doc_id] = {}
            doc_order.append(doc_id)
        if index in rows_by_doc[doc_id]:
            raise CorpusParseError(
                f"line {line_no}: duplicate paragraph ({doc_id!r}, {index})"
            )
        rows_by_doc[doc_id][index] = (src, tgt)
    documents = []
    for doc_id in doc_order:
        rows = rows_by_doc[doc_id]
        expected = set(range(len(rows)))
        if set(rows) != expected:
            missing = sorted(expected - set(rows))
            raise CorpusParseError(
                f"document {doc_id!r}: paragraph indices have gaps (missing {missing})"
            )
        pairs = tuple(
            ParagraphPair(
                index=i,
                source_text=rows[i][0],
                target_text=rows[i][1],
                source_lang=source_lang,
                target_lang=target_lang,
            )
            for i in range(len(rows))
        )
        documents.append(AlignedDocument(doc_id=doc_id, pairs=pairs))
    return AlignedCorpus(documents=tuple(documents), name=name)


def export_jsonl(corpus: AlignedCorpus) -> str:
    """Inverse of ingest_jsonl: one {doc_id, index, src, tgt} line per pair."""
    lines = []
    for doc in corpus.documents:
        for pair in doc.pairs:
            lines.append(
                json.dumps(
                    {
                        "doc_id": doc.doc_id,
                        "index": pair.index,
                        "src": pair.source_text,
                        "tgt": pair.target_text,
                    },
                    ensure_ascii=False,
                )
            )
    return "\n".join(lines) + ("\n" if lines else "")


def stats(corpus: AlignedCorpus, token_scheme: str = "heuristic") -> CorpusStats:
    """Counts over paragraph text only; separators are not counted."""
    source_chars = sum(len(p.source_text) for d in corpus.documents for p in d.pairs)
    target_chars = sum(len(p.target_text or "") for d in corpus.documents for p in d.pairs)
    tokens = sum(
        estimate_tokens(p.source_text, token_scheme) for d in corpus.documents for p in d.pairs
    )
    return CorpusStats(
        document_count=len(corpus.documents),
        pair_count=corpus.pair_count,
        source_chars=source_chars,
        target_chars=target_chars,
        estimated_source_tokens=tokens,
    )


def take_test_set(
    corpus: AlignedCorpus,
    doc_id: str | None = None,
    pair_count: int | None = None,
    seed: int | None = None,
) -> AlignedCorpus:
    """Carve a test corpus: one whole document by id, or a random pair sample.

    Sampling is deterministic for a given seed and preserves paragraph order
    within each document (indices are reassigned to stay contiguous).
    """
    if (doc_id is None) == (pair_count is None):
        raise SelectorUnsatisfiable("specify exactly one of doc_id or pair_count")
    if doc_id is not None:
        for doc in corpus.documents:
            if doc.doc_id == doc_id:
                return AlignedCorpus(documents=(doc,), name=corpus.name)
        raise SelectorUnsatisfiable(f"document {doc_id!r} not in corpus")
    if pair_count < 1:
        raise SelectorUnsatisfiable("pair_count must be >= 1")
    positions = [
        (di, pair.index) for di, doc in enumerate(corpus.documents) for pair in doc.pairs
    ]
    if pair_count > len(positions):
        raise SelectorUnsatisfiable(
            f"requested {pair_count} pairs but corpus has only {len(positions)}"
        )
    chosen = set(random.Random(seed).sample(positions, pair_count))
    documents = []
    for di, doc in enumerate(corpus.documents):
        kept = [p for p in doc.pairs if (di, p.index) in chosen]
        if not kept:
            continue
        pairs = tuple(
            ParagraphPair(
                index=i,
                source_text=p.source_text,
                target_text=p.target_text,
                source_lang=p.source_lang,
                target_lang=p.target_lang,
            )
            for i, p in enumerate(kept)
        )
        documents.append(AlignedDocument(doc_id=doc.doc_id, pairs=pairs, metadata=doc.metadata))
    return AlignedCorpus(documents=tuple(documents), name=corpus.name)

"""Translation Memory (TM) and Proofreading Memory (PM).

Both stores are append-only JSON-lines logs replayed into memory at open:
durable, diff-able, and free of external database dependencies. Records never
mutate and ids grow strictly, including across reopen. Similarity is the Dice
coefficient over character-bigram sets, which is language-neutral (it works
equally for Chinese and English) and fully deterministic.
"""

import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from .annotate import Annotation, ErrTriplet
from .core import DEFAULT_TAXONOMY, AlignedDocument, ParagraphPair, Taxonomy

SCHEMA_VERSION = 1


class MemoryError_(Exception):
    pass


class IndexOutOfRange(MemoryError_):
    pass


class StorageError(MemoryError_):
    """I/O failure or a log line the store cannot replay."""


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class TmRecord:
    src: str
    tgt: str
    doc_id: str
    paragraph_index: int
    created_at: str

    def __post_init__(self):
        if not self.src:
            raise ValueError("TmRecord.src must be non-empty")


@dataclass(frozen=True)
class PmRecord:
    triplet: ErrTriplet
    doc_id: str
    paragraph_index: int
    round: int
    created_at: str


@dataclass(frozen=True)
class PnsConfig:
    """Neighbor radius for physical-neighbor context sampling."""

    k: int = 2
    max_k: int = 5

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("neighbor radius k must be >= 0")
        if self.k > self.max_k:
            raise ValueError(f"neighbor radius k={self.k} exceeds maximum {self.max_k}")


# --------------------------------------------------------------------------
# Similarity and retrieval
# --------------------------------------------------------------------------


def _bigram_set(text: str) -> set[str]:
    normalized = " ".join(text.split()).casefold()
    return {normalized[i : i + 2] for i in range(len(normalized) - 1)}


def bigram_dice(a: str, b: str) -> float:
    """Dice coefficient over character-bigram sets of normalized inputs.

    1.0 when both inputs have no bigrams, 0.0 when exactly one has none.
    """
    set_a, set_b = _bigram_set(a), _bigram_set(b)
    if not set_a and not set_b:
        return 1.0
    if not set_a or not set_b:
        return 0.0
    return 2.0 * len(set_a & set_b) / (len(set_a) + len(set_b))


def retrieve_similar(
    pm: "PmStore | Sequence[PmRecord]",
    query_src: str,
    top_k: int,
) -> list[PmRecord]:
    """Top-k PM records by source-text similarity to the query.

    Ordering is by non-increasing score; ties break toward older created_at,
    then insertion order. Accepts a PmStore or a plain record sequence (a
    snapshot), scoring every record.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    records = pm.all() if isinstance(pm, JsonlStore) else list(pm)
    scored = [
        (-bigram_dice(query_src, record.triplet.src), record.created_at, position, record)
        for position, record in enumerate(records)
    ]
    scored.sort(key=lambda item: item[:3])
    return [record for _, _, _, record in scored[:top_k]]


def pns_context(doc: AlignedDocument, index: int, cfg: PnsConfig) -> list[ParagraphPair]:
    """Paragraph pairs physically adjacent to ``index``, clipped to the document.

    Preceding neighbors keep whatever target_text they already carry (fresh
    drafts, in pipeline use); following neighbors are source-only. The focal
    index itself is never included.
    """
    n = len(doc.pairs)
    if not 0 <= index < n:
        raise IndexOutOfRange(f"paragraph index {index} out of range 0..{n - 1}")
    before = [doc.pairs[j] for j in range(max(0, index - cfg.k), index)]
    after = [
        replace(doc.pairs[j], target_text=None)
        for j in range(index + 1, min(n, index + cfg.k + 1))
    ]
    return before + after


# --------------------------------------------------------------------------
# Append-only stores
# --------------------------------------------------------------------------


class JsonlStore:
    """Append-only JSONL log with an in-memory replay index.

    One writer at a time (appends serialize on an internal lock); readers see
    immutable record objects. ``path=None`` keeps the store memory-only, with
    identical semantics minus durability.
    """

    def __init__(self, path: str | Path | None, clock: Callable[[], str] = utc_now_iso):
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self._lock = threading.Lock()
        self._records: list = []
        self._by_id: dict[int, object] = {}
        self._next_id = 1
        self._fh = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self.path.exists():
                self._replay()
            self._fh = open(self.path, "a", encoding="utf-8")

    def _replay(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    payload = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise StorageError(f"{self.path}:{line_no}: invalid JSON") from exc
                if payload.get("schema_version") != SCHEMA_VERSION:
                    raise StorageError(
                        f"{self.path}:{line_no}: unsupported schema_version "
                        f"{payload.get('schema_version')!r}"
                    )
                record_id = payload["id"]
                record = self._decode(payload)
                self._records.append(record)
                self._by_id[record_id] = record
                self._next_id = max(self._next_id, record_id + 1)

    def append(self, record) -> int:
        with self._lock:
            record_id = self._next_id
            self._next_id += 1
            payload = {"schema_version": SCHEMA_VERSION, "id": record_id}
            payload.update(self._encode(record))
            if self._fh is not None:
                try:
                    self._fh.write(json.dumps(payload, ensure_ascii=False) + "\n")
                    self._fh.flush()
                except OSError as exc:
                    raise StorageError(f"append to {self.path} failed: {exc}") from exc
            self._records.append(record)
            self._by_id[record_id] = record
            return record_id

    def get(self, record_id: int):
        return self._by_id[record_id]

    def all(self) -> list:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    # subclasses provide the record codecs
    def _encode(self, record) -> dict:
        raise NotImplementedError

    def _decode(self, payload: dict):
        raise NotImplementedError


class TmStore(JsonlStore):
    FILENAME = "tm.jsonl"

    def _encode(self, record: TmRecord) -> dict:
        return {
            "src": record.src,
            "tgt": record.tgt,
            "doc_id": record.doc_id,
            "paragraph_index": record.paragraph_index,
            "created_at": record.created_at,
        }

    def _decode(self, payload: dict) -> TmRecord:
        return TmRecord(
            src=payload["src"],
            tgt=payload["tgt"],
            doc_id=payload["doc_id"],
            paragraph_index=payload["paragraph_index"],
            created_at=payload["created_at"],
        )


class PmStore(JsonlStore):
    FILENAME = "pm.jsonl"

    def __init__(self, path=None, clock=utc_now_iso, taxonomy: Taxonomy = DEFAULT_TAXONOMY):
        self.taxonomy = taxonomy
        super().__init__(path, clock)

    def _encode(self, record: PmRecord) -> dict:
        return {
            "src": record.triplet.src,
            "ref": record.triplet.ref,
            "err": [a.to_json() for a in record.triplet.err],
            "doc_id": record.doc_id,
            "paragraph_index": record.paragraph_index,
            "round": record.round,
            "created_at": record.created_at,
        }

    def _decode(self, payload: dict) -> PmRecord:
        triplet = ErrTriplet(
            src=payload["src"],
            ref=payload["ref"],
            err=tuple(Annotation.from_json(a, self.taxonomy) for a in payload["err"]),
        )
        return PmRecord(
            triplet=triplet,
            doc_id=payload["doc_id"],
            paragraph_index=payload["paragraph_index"],
            round=payload["round"],
            created_at=payload["created_at"],
        )


def open_stores(
    data_dir: str | Path | None,
    clock: Callable[[], str] = utc_now_iso,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> tuple[TmStore, PmStore]:
    """Open (or create) the tm.jsonl / pm.jsonl pair under a data directory."""
    if data_dir is None:
        return TmStore(None, clock), PmStore(None, clock, taxonomy)
    base = Path(data_dir)
    return (
        TmStore(base / TmStore.FILENAME, clock),
        PmStore(base / PmStore.FILENAME, clock, taxonomy),
    )

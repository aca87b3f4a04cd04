"""Three-phase translation jobs: translate, annotate, proofread.

A job walks a document through the agent roles. Phase 1 translates
paragraphs sequentially so the neighbor-sampling context can carry fresh
preceding drafts. Phase 2 collects error annotations (from the annotator
model or a waiting human) and files each one into the proofreading memory.
Phase 3 revises annotated paragraphs with similar past corrections retrieved
as precedents; unannotated paragraphs pass through untouched. Extra rounds
repeat phases 2-3 on the revised text.

Retrieval within a round sees only memory from before the round, so
paragraph order cannot leak into scores. Phases 2-3 fan out over a bounded
worker pool, but results, usage, and memory appends merge in paragraph order
on the coordinating thread: two runs with the same config, document, and
mock fixtures are byte-identical.
"""

import json
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping

from .annotate import AnnotationError, Annotation, ErrTriplet, parse_records
from .core import (
    DEFAULT_TAXONOMY,
    AlignedDocument,
    EmptyDocument,
    LanguageTag,
    Role,
    Taxonomy,
    UnknownCode,
)
from .gateway import Gateway, GatewayError, UsageRecord, accrue_cost, render_prompt
from .glossary import Glossary, check_consistency, match_terms
from .memory import (
    PmRecord,
    PmStore,
    PnsConfig,
    StorageError,
    TmStore,
    TmRecord,
    bigram_dice,
    pns_context,
    retrieve_similar,
    utc_now_iso,
)

DEFAULT_MAX_ROUNDS = 5
DEFAULT_DIVERGENCE_BOUNDS = (0.5, 2.0)
DEFAULT_FEW_SHOT_EXAMPLES = 5
ANNOTATION_PARSE_RETRIES = 1


class PipelineError(Exception):
    pass


class WrongState(PipelineError):
    pass


class UnknownParagraph(PipelineError):
    pass


class ProviderFailure(PipelineError):
    pass


class JobState(str, Enum):
    PENDING = "Pending"
    TRANSLATING = "Translating"
    ANNOTATING = "Annotating"
    AWAITING_HUMAN_ANNOTATION = "AwaitingHumanAnnotation"
    PROOFREADING = "Proofreading"
    COMPLETE = "Complete"
    FAILED = "Failed"


_ALLOWED_TRANSITIONS: dict[JobState, set[JobState]] = {
    JobState.PENDING: {JobState.TRANSLATING, JobState.FAILED},
    JobState.TRANSLATING: {JobState.ANNOTATING, JobState.FAILED},
    JobState.ANNOTATING: {
        JobState.AWAITING_HUMAN_ANNOTATION,
        JobState.PROOFREADING,
        JobState.FAILED,
    },
    JobState.AWAITING_HUMAN_ANNOTATION: {JobState.PROOFREADING, JobState.FAILED},
    JobState.PROOFREADING: {JobState.ANNOTATING, JobState.COMPLETE, JobState.FAILED},
    JobState.COMPLETE: set(),
    JobState.FAILED: set(),
}


@dataclass(frozen=True)
class JobConfig:
    role_bindings: Mapping[Role, str]
    direction: tuple[LanguageTag, LanguageTag]
    glossary_ref: str | None = None
    pns: PnsConfig = PnsConfig()
    pm_top_k: int = 3
    rounds: int = 1
    human_annotation: bool = False
    few_shot: bool = False
    max_rounds: int = DEFAULT_MAX_ROUNDS

    def __post_init__(self):
        object.__setattr__(self, "role_bindings", dict(self.role_bindings))
        missing = [r.value for r in Role if r not in self.role_bindings]
        if missing:
            raise ValueError(f"role_bindings missing {', '.join(missing)}")
        if not 1 <= self.rounds <= self.max_rounds:
            raise ValueError(f"rounds must be between 1 and {self.max_rounds}")
        if self.pm_top_k < 1:
            raise ValueError("pm_top_k must be >= 1")


@dataclass(frozen=True)
class JobWarning:
    kind: str  # "divergence" | "annotation_parse" | "terminology"
    paragraph_index: int
    round: int
    message: str
    details: Mapping = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "paragraph_index": self.paragraph_index,
            "round": self.round,
            "message": self.message,
            "details": dict(self.details),
        }


@dataclass
class RoundRecord:
    round: int
    annotations: list[Annotation] = field(default_factory=list)
    revision: str | None = None  # None = passed through unrevised
    warnings: list[str] = field(default_factory=list)


@dataclass
class ParagraphState:
    index: int
    source: str
    draft: str | None = None
    rounds: list[RoundRecord] = field(default_factory=list)
    final: str | None = None

    def current_text(self) -> str | None:
        """The latest accepted text: the last revision, else the draft."""
        text = self.draft
        for record in self.rounds:
            if record.revision is not None:
                text = record.revision
        return text


@dataclass
class Job:
    job_id: str
    config: JobConfig
    doc: AlignedDocument
    created_at: str
    state: JobState = JobState.PENDING
    paragraphs: list[ParagraphState] = field(default_factory=list)
    usage: list[UsageRecord] = field(default_factory=list)
    warnings: list[JobWarning] = field(default_factory=list)
    current_round: int = 0
    failure: str | None = None
    history: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.paragraphs:
            self.paragraphs = [
                ParagraphState(index=p.index, source=p.source_text) for p in self.doc.pairs
            ]
        if not self.history:
            self.history = [self.state.value]
        self._pm_snapshot: list[PmRecord] = []

    @property
    def terminal(self) -> bool:
        return self.state in (JobState.COMPLETE, JobState.FAILED)


@dataclass
class Services:
    """Everything a running job needs; built once per server or CLI invocation."""

    gateway: Gateway
    tm: TmStore
    pm: PmStore
    glossary: Glossary | None = None
    taxonomy: Taxonomy = DEFAULT_TAXONOMY
    clock: Callable[[], str] = utc_now_iso
    max_workers: int = 4
    few_shot_examples: int = DEFAULT_FEW_SHOT_EXAMPLES


def _transition(job: Job, new_state: JobState) -> None:
    if new_state not in _ALLOWED_TRANSITIONS[job.state]:
        raise WrongState(f"cannot move {job.state.value} -> {new_state.value}")
    job.state = new_state
    job.history.append(new_state.value)


def _fail(job: Job, cause: str) -> None:
    job.failure = cause
    _transition(job, JobState.FAILED)


def create_job(
    config: JobConfig,
    doc: AlignedDocument,
    clock: Callable[[], str] = utc_now_iso,
    job_id: str | None = None,
) -> Job:
    if not doc.pairs:
        raise EmptyDocument("document has no paragraphs")
    return Job(
        job_id=job_id or str(uuid.uuid4()),
        config=config,
        doc=doc,
        created_at=clock(),
    )


def run_job(
    config: JobConfig,
    doc: AlignedDocument,
    services: Services,
    job_id: str | None = None,
    human: Callable[[ParagraphState], str] | None = None,
) -> Job:
    """Run a job to a terminal state.

    With human_annotation set, ``human`` is called once per paragraph per
    round and must return ``ERR:`` record lines ("" marks the paragraph
    clean); without a callback such a job cannot finish here and must be
    driven through submit_human_annotations / complete_annotation_round.
    """
    job = create_job(config, doc, clock=services.clock, job_id=job_id)
    advance(job, services)
    while job.state is JobState.AWAITING_HUMAN_ANNOTATION:
        if human is None:
            raise WrongState(
                "job is waiting for human annotations and no callback was given"
            )
        for paragraph in job.paragraphs:
            records = human(paragraph)
            submit_human_annotations(job, paragraph.index, records, services.taxonomy)
        complete_annotation_round(job, services)
        advance(job, services)
    return job


def advance(job: Job, services: Services) -> Job:
    """Drive the job until it completes, fails, or waits for a human."""
    if job.terminal:
        return job
    try:
        if job.state is JobState.PENDING:
            _transition(job, JobState.TRANSLATING)
            _phase_translate(job, services)
            _start_round(job, services, 1)
        while True:
            if job.state is JobState.ANNOTATING:
                if job.config.human_annotation:
                    _transition(job, JobState.AWAITING_HUMAN_ANNOTATION)
                    return job
                _phase_annotate(job, services)
                _file_annotations(job, services)
            if job.state is JobState.AWAITING_HUMAN_ANNOTATION:
                return job
            if job.state is JobState.PROOFREADING:
                _phase_proofread(job, services)
                if job.current_round < job.config.rounds:
                    _start_round(job, services, job.current_round + 1)
                    continue
                for paragraph in job.paragraphs:
                    paragraph.final = paragraph.current_text()
                _transition(job, JobState.COMPLETE)
                return job
    except (GatewayError, StorageError) as exc:
        _fail(job, f"{type(exc).__name__}: {exc}")
        return job


def submit_human_annotations(
    job: Job,
    paragraph_index: int,
    records: str,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> Job:
    """Attach human ``ERR:`` records to one paragraph of a waiting job.

    Replaces any earlier submission for this round. An empty record string
    marks the paragraph clean. Parse errors leave the job waiting untouched.
    """
    if job.state is not JobState.AWAITING_HUMAN_ANNOTATION:
        raise WrongState(
            f"annotations can only be submitted in "
            f"{JobState.AWAITING_HUMAN_ANNOTATION.value}, job is {job.state.value}"
        )
    if not 0 <= paragraph_index < len(job.paragraphs):
        raise UnknownParagraph(f"no paragraph {paragraph_index} in this job")
    paragraph = job.paragraphs[paragraph_index]
    annotations = parse_records(records, paragraph.current_text(), taxonomy)
    paragraph.rounds[-1].annotations = annotations
    return job


def complete_annotation_round(job: Job, services: Services) -> Job:
    """Close the human-annotation round and file the collected annotations."""
    if job.state is not JobState.AWAITING_HUMAN_ANNOTATION:
        raise WrongState(f"no annotation round open, job is {job.state.value}")
    _file_annotations(job, services)
    return job


def divergence_guard(
    original_draft: str,
    revised: str,
    bounds: tuple[float, float] = DEFAULT_DIVERGENCE_BOUNDS,
    round_number: int = 1,
    paragraph_index: int = 0,
) -> JobWarning | None:
    """Flag revisions whose length has drifted far from the original draft.

    A deterministic stand-in for semantic-drift review: repeated revision
    rounds tend to wander from the source, and a large length swing is the
    cheapest reliable symptom. Warnings never block completion.
    """
    if not original_draft:
        raise ValueError("original_draft must be non-empty")
    low, high = bounds
    ratio = len(revised) / len(original_draft)
    if low <= ratio <= high:
        return None
    return JobWarning(
        kind="divergence",
        paragraph_index=paragraph_index,
        round=round_number,
        message=(
            f"revision is {len(revised)} chars vs draft {len(original_draft)} "
            f"(ratio {ratio:.2f}, outside {low}..{high})"
        ),
        details={
            "draft_chars": len(original_draft),
            "revised_chars": len(revised),
            "ratio": ratio,
        },
    )


# --------------------------------------------------------------------------
# Phases
# --------------------------------------------------------------------------


def _pmap(fn, items, max_workers: int):
    if max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, items))


def _binding(job: Job, role: Role) -> str:
    return job.config.role_bindings[role]


def _phase_translate(job: Job, services: Services) -> None:
    config = job.config
    tm_snapshot = services.tm.all() if config.few_shot else []
    fresh_targets: dict[int, str] = {}
    for paragraph in job.paragraphs:
        working_doc = job.doc.with_targets(fresh_targets)
        context = pns_context(working_doc, paragraph.index, config.pns)
        matches = (
            match_terms(paragraph.source, services.glossary) if services.glossary else []
        )
        few_shot = (
            _few_shot_examples(tm_snapshot, paragraph.source, services.few_shot_examples)
            if config.few_shot
            else ()
        )
        prompt = render_prompt(
            Role.TRANSLATOR,
            {
                "source": paragraph.source,
                "direction": config.direction,
                "context_pairs": context,
                "glossary_matches": matches,
                "few_shot": few_shot,
            },
        )
        text, usage = services.gateway.complete(_binding(job, Role.TRANSLATOR), prompt)
        paragraph.draft = text
        fresh_targets[paragraph.index] = text
        job.usage.append(usage)
        if matches and services.glossary:
            for violation in check_consistency(text, matches, services.glossary):
                job.warnings.append(
                    JobWarning(
                        kind="terminology",
                        paragraph_index=paragraph.index,
                        round=0,
                        message=violation.reason,
                    )
                )
        services.tm.append(
            TmRecord(
                src=paragraph.source,
                tgt=text,
                doc_id=job.doc.doc_id,
                paragraph_index=paragraph.index,
                created_at=services.clock(),
            )
        )


def _few_shot_examples(
    tm_records: list[TmRecord], source: str, k: int
) -> tuple[tuple[str, str], ...]:
    scored = sorted(
        ((-bigram_dice(source, r.src), r.created_at, i, r) for i, r in enumerate(tm_records)),
        key=lambda item: item[:3],
    )
    return tuple((r.src, r.tgt) for _, _, _, r in scored[:k])


def _start_round(job: Job, services: Services, round_number: int) -> None:
    job.current_round = round_number
    job._pm_snapshot = services.pm.all()
    for paragraph in job.paragraphs:
        paragraph.rounds.append(RoundRecord(round=round_number))
    _transition(job, JobState.ANNOTATING)


def _phase_annotate(job: Job, services: Services) -> None:
    provider = _binding(job, Role.ANNOTATOR)

    def annotate(paragraph: ParagraphState):
        draft = paragraph.current_text()
        prompt = render_prompt(
            Role.ANNOTATOR,
            {"source": paragraph.source, "draft": draft, "taxonomy": services.taxonomy},
        )
        usages = []
        for attempt in range(ANNOTATION_PARSE_RETRIES + 1):
            text, usage = services.gateway.complete(provider, prompt)
            usages.append(usage)
            try:
                return parse_records(text, draft, services.taxonomy), usages, None
            except (AnnotationError, UnknownCode) as exc:
                error = exc
                if attempt < ANNOTATION_PARSE_RETRIES:
                    prompt = replace(
                        prompt,
                        user_text=(
                            prompt.user_text
                            + f"\n\nYour previous response could not be parsed ({error}). "
                            "Re-emit every ERR: record in the exact format."
                        ),
                    )
        return [], usages, f"annotation records unparseable after retry: {error}"

    results = _pmap(annotate, job.paragraphs, services.max_workers)
    for paragraph, (annotations, usages, failure) in zip(job.paragraphs, results):
        record = paragraph.rounds[-1]
        record.annotations = annotations
        job.usage.extend(usages)
        if failure:
            record.warnings.append(failure)
            job.warnings.append(
                JobWarning(
                    kind="annotation_parse",
                    paragraph_index=paragraph.index,
                    round=job.current_round,
                    message=failure,
                )
            )


def _file_annotations(job: Job, services: Services) -> None:
    """Store each parsed annotation as a proofreading-memory triplet, then move on."""
    for paragraph in job.paragraphs:
        record = paragraph.rounds[-1]
        draft = paragraph.current_text()
        for annotation in record.annotations:
            services.pm.append(
                PmRecord(
                    triplet=ErrTriplet(src=paragraph.source, ref=draft, err=(annotation,)),
                    doc_id=job.doc.doc_id,
                    paragraph_index=paragraph.index,
                    round=job.current_round,
                    created_at=services.clock(),
                )
            )
    _transition(job, JobState.PROOFREADING)


def _phase_proofread(job: Job, services: Services) -> None:
    provider = _binding(job, Role.PROOFREADER)
    snapshot = job._pm_snapshot

    def proofread(paragraph: ParagraphState):
        record = paragraph.rounds[-1]
        if not record.annotations:
            return None, [], None
        draft = paragraph.current_text()
        precedents = retrieve_similar(snapshot, paragraph.source, job.config.pm_top_k)
        prompt = render_prompt(
            Role.PROOFREADER,
            {
                "source": paragraph.source,
                "draft": draft,
                "annotations": record.annotations,
                "precedents": precedents,
            },
        )
        text, usage = services.gateway.complete(provider, prompt)
        warning = divergence_guard(
            paragraph.draft,
            text,
            round_number=job.current_round,
            paragraph_index=paragraph.index,
        )
        return text, [usage], warning

    results = _pmap(proofread, job.paragraphs, services.max_workers)
    for paragraph, (revision, usages, warning) in zip(job.paragraphs, results):
        record = paragraph.rounds[-1]
        record.revision = revision
        job.usage.extend(usages)
        if warning is not None:
            record.warnings.append(warning.message)
            job.warnings.append(warning)


# --------------------------------------------------------------------------
# Views and exports
# --------------------------------------------------------------------------


def job_summary(job: Job) -> dict:
    return {
        "job_id": job.job_id,
        "state": job.state.value,
        "created_at": job.created_at,
        "paragraph_count": len(job.paragraphs),
        "current_round": job.current_round,
        "warning_count": len(job.warnings),
    }


def export_result(job: Job, registry) -> dict:
    """Full job view: per-paragraph history plus usage, cost, and warnings."""
    source_lang, target_lang = job.config.direction
    cost = accrue_cost(job.usage, registry)
    return {
        "job_id": job.job_id,
        "state": job.state.value,
        "created_at": job.created_at,
        "doc_id": job.doc.doc_id,
        "direction": {"source": str(source_lang), "target": str(target_lang)},
        "failure": job.failure,
        "paragraphs": [
            {
                "index": p.index,
                "source": p.source,
                "draft": p.draft,
                "rounds": [
                    {
                        "round": r.round,
                        "annotations": [a.to_json() for a in r.annotations],
                        "revision": r.revision,
                        "warnings": list(r.warnings),
                    }
                    for r in p.rounds
                ],
                "final": p.final,
            }
            for p in job.paragraphs
        ],
        "usage": [u.to_json() for u in job.usage],
        "cost": cost.to_json(),
        "warnings": [w.to_json() for w in job.warnings],
    }


def export_result_json(job: Job, registry) -> str:
    return json.dumps(export_result(job, registry), ensure_ascii=False, indent=2) + "\n"


def render_target_text(job: Job) -> str:
    """Target-only rendering: final paragraphs separated by blank lines."""
    if job.state is not JobState.COMPLETE:
        raise WrongState(f"job is {job.state.value}, result requires Complete")
    return "\n\n".join(p.final for p in job.paragraphs) + "\n"

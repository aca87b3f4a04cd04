"""Request/response models for the HTTP API."""

from pydantic import BaseModel, Field


class Direction(BaseModel):
    source: str = "en"
    target: str = "zh-Hant"


class JobCreateRequest(BaseModel):
    role_bindings: dict[str, str]
    direction: Direction = Field(default_factory=Direction)
    glossary_ref: str | None = None
    pns_k: int = 2
    pm_top_k: int = 3
    rounds: int = 1
    human_annotation: bool = False
    few_shot: bool = False
    text: str | None = None
    corpus_ref: str | None = None
    doc_id: str | None = None


class JobSummary(BaseModel):
    job_id: str
    state: str
    created_at: str
    paragraph_count: int
    current_round: int
    warning_count: int


class AnnotationSubmission(BaseModel):
    paragraph_index: int
    records: str = ""
    round_complete: bool = False


class CodeEntry(BaseModel):
    code: str
    category: str
    description: str


class ProviderList(BaseModel):
    providers: list[str]


class FieldError(BaseModel):
    field: str
    message: str

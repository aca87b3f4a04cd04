"""translaw: three-agent legal translation pipeline with memory-backed
retrieval, proofread-code annotation, human-in-the-loop review, and cost
accounting."""

__version__ = "0.1.0"

from .core import (
    DEFAULT_TAXONOMY,
    AlignedDocument,
    Category,
    LanguageTag,
    ParagraphPair,
    ProofreadCode,
    Role,
    Taxonomy,
    segment_paragraphs,
)
from .pipeline import Job, JobConfig, JobState, Services, advance, create_job, run_job

__all__ = [
    "DEFAULT_TAXONOMY",
    "AlignedDocument",
    "Category",
    "Job",
    "JobConfig",
    "JobState",
    "LanguageTag",
    "ParagraphPair",
    "ProofreadCode",
    "Role",
    "Services",
    "Taxonomy",
    "advance",
    "create_job",
    "run_job",
    "segment_paragraphs",
]

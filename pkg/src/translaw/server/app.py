"""HTTP API over the job pipeline: the contract the CLI and web UI consume.

Jobs run asynchronously; clients poll GET /jobs/{id}. Job mutations serialize
per job id, and state only ever moves forward along the pipeline's state
machine, so a later poll never shows an earlier state. Provider secrets
arrive per request (X-Provider-Key header) or from the server environment
and are never written into job records or logs.
"""

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Response
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .. import corpus as corpus_mod
from ..annotate import AnnotationError
from ..core import DEFAULT_TAXONOMY, EmptyDocument, LanguageTag, Role, UnknownCode, segment_paragraphs
from ..gateway import Gateway, MockProvider, ProviderRegistry
from ..glossary import load_glossary
from ..memory import PnsConfig, open_stores
from ..pipeline import (
    Job,
    JobConfig,
    JobState,
    Services,
    UnknownParagraph,
    WrongState,
    advance,
    complete_annotation_round,
    create_job,
    export_result,
    job_summary,
    render_target_text,
    submit_human_annotations,
)
from .schemas import (
    AnnotationSubmission,
    CodeEntry,
    JobCreateRequest,
    JobSummary,
    ProviderList,
)


@dataclass
class ServerConfig:
    data_dir: str | None = None
    registry_path: str | None = None
    mock_fixtures_path: str | None = None
    glossaries: dict[str, str] = field(default_factory=dict)  # name -> file path
    max_rounds: int = 5
    static_dir: str | None = None
    host: str = "127.0.0.1"
    port: int = 8787

    @classmethod
    def from_file(cls, path: str | Path) -> "ServerConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))


class JobManager:
    """Owns running jobs: registry of Job objects plus their worker futures."""

    def __init__(self, services: Services, max_rounds: int, max_workers: int = 4):
        self.services = services
        self.max_rounds = max_rounds
        self._jobs: dict[str, Job] = {}
        self._job_services: dict[str, Services] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._executor = ThreadPoolExecutor(max_workers=max_workers)

    def create(self, config: JobConfig, doc, services: Services | None = None) -> dict:
        """Register and start a job; returns the pre-start summary snapshot."""
        job = create_job(config, doc, clock=self.services.clock)
        self._jobs[job.job_id] = job
        self._job_services[job.job_id] = services or self.services
        self._locks[job.job_id] = threading.Lock()
        summary = job_summary(job)
        self._schedule(job)
        return summary

    def _schedule(self, job: Job) -> None:
        self._executor.submit(self._run, job)

    def _run(self, job: Job) -> None:
        try:
            advance(job, self._job_services[job.job_id])
        except Exception as exc:  # background thread: surface bugs as job failure
            if not job.terminal:
                job.failure = f"{type(exc).__name__}: {exc}"
                job.state = JobState.FAILED
                job.history.append(JobState.FAILED.value)

    def get(self, job_id: str) -> Job:
        job = self._jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return job

    def jobs(self) -> list[Job]:
        return list(self._jobs.values())

    def submit_annotations(
        self, job_id: str, submission: AnnotationSubmission
    ) -> Job:
        job = self.get(job_id)
        services = self._job_services[job_id]
        with self._locks[job_id]:
            submit_human_annotations(
                job, submission.paragraph_index, submission.records, services.taxonomy
            )
            if submission.round_complete:
                complete_annotation_round(job, services)
                self._schedule(job)
        return job

    def shutdown(self) -> None:
        self._executor.shutdown(wait=True)


def build_services(config: ServerConfig) -> tuple[Services, ProviderRegistry]:
    registry = (
        ProviderRegistry.from_file(config.registry_path)
        if config.registry_path
        else ProviderRegistry.default()
    )
    fixtures = (
        MockProvider.load_fixtures(config.mock_fixtures_path)
        if config.mock_fixtures_path
        else None
    )
    tm, pm = open_stores(config.data_dir)
    gateway = Gateway(registry=registry, mock_fixtures=fixtures)
    return Services(gateway=gateway, tm=tm, pm=pm), registry


def _parse_provider_keys(header: str | None) -> dict[str, str]:
    """Parse "name=secret[,name=secret...]" from the X-Provider-Key header."""
    if not header:
        return {}
    secrets = {}
    for chunk in header.split(","):
        name, _, secret = chunk.strip().partition("=")
        if name and secret:
            secrets[name] = secret
    return secrets


def create_app(
    config: ServerConfig | None = None,
    services: Services | None = None,
) -> FastAPI:
    """App factory. ``services`` overrides the config-built stack (tests use
    this to inject scripted mock gateways and in-memory stores)."""
    config = config or ServerConfig()
    if services is None:
        services, registry = build_services(config)
    else:
        registry = services.gateway.registry
    manager = JobManager(services, max_rounds=config.max_rounds)

    app = FastAPI(title="translaw", version="0.1.0")
    app.state.config = config
    app.state.manager = manager
    app.state.registry = registry

    def _validate(body: JobCreateRequest) -> tuple[JobConfig, object]:
        errors: list[dict] = []
        bindings: dict[Role, str] = {}
        for role in Role:
            name = body.role_bindings.get(role.value)
            if not name:
                errors.append(
                    {"field": "role_bindings", "message": f"missing binding for {role.value}"}
                )
            elif name not in registry:
                errors.append(
                    {"field": "role_bindings", "message": f"unknown provider {name!r}"}
                )
            else:
                bindings[role] = name
        direction = None
        try:
            direction = (LanguageTag(body.direction.source), LanguageTag(body.direction.target))
        except ValueError as exc:
            errors.append({"field": "direction", "message": str(exc)})
        if not 1 <= body.rounds <= config.max_rounds:
            errors.append(
                {"field": "rounds", "message": f"rounds must be between 1 and {config.max_rounds}"}
            )
        pns = None
        try:
            pns = PnsConfig(k=body.pns_k)
        except ValueError as exc:
            errors.append({"field": "pns_k", "message": str(exc)})
        if body.pm_top_k < 1:
            errors.append({"field": "pm_top_k", "message": "pm_top_k must be >= 1"})
        if body.glossary_ref and body.glossary_ref not in config.glossaries:
            errors.append(
                {"field": "glossary_ref", "message": f"unknown glossary {body.glossary_ref!r}"}
            )
        if not body.text and not body.corpus_ref:
            errors.append({"field": "text", "message": "one of text or corpus_ref is required"})
        if errors:
            raise HTTPException(status_code=400, detail=errors)

        if body.text:
            try:
                doc = segment_paragraphs(body.text, direction[0], direction[1])
            except EmptyDocument as exc:
                raise HTTPException(status_code=422, detail=f"EmptyDocument: {exc}")
        else:
            try:
                with open(body.corpus_ref, encoding="utf-8") as fh:
                    loaded = corpus_mod.ingest_jsonl(fh.read(), source_lang=direction[0], target_lang=direction[1])
            except (OSError, corpus_mod.CorpusError) as exc:
                raise HTTPException(
                    status_code=400,
                    detail=[{"field": "corpus_ref", "message": str(exc)}],
                )
            docs = [d for d in loaded.documents if body.doc_id in (None, d.doc_id)]
            if not docs:
                raise HTTPException(
                    status_code=400,
                    detail=[{"field": "doc_id", "message": f"document {body.doc_id!r} not in corpus"}],
                )
            doc = docs[0]

        job_config = JobConfig(
            role_bindings=bindings,
            direction=direction,
            glossary_ref=body.glossary_ref,
            pns=pns,
            pm_top_k=body.pm_top_k,
            rounds=body.rounds,
            human_annotation=body.human_annotation,
            few_shot=body.few_shot,
            max_rounds=config.max_rounds,
        )
        return job_config, doc

    @app.post("/jobs", status_code=201, response_model=JobSummary)
    def create_job_endpoint(
        body: JobCreateRequest,
        response: Response,
        x_provider_key: str | None = Header(default=None),
    ):
        job_config, doc = _validate(body)
        job_services = services
        secrets = _parse_provider_keys(x_provider_key)
        if secrets:
            job_services = replace(services, gateway=services.gateway.with_secrets(secrets))
        if job_config.glossary_ref:
            path = Path(config.glossaries[job_config.glossary_ref])
            fmt = "csv" if path.suffix == ".csv" else "tsv"
            job_services = replace(
                job_services, glossary=load_glossary(path.read_text(encoding="utf-8"), fmt)
            )
        summary = manager.create(job_config, doc, services=job_services)
        response.headers["Location"] = f"/jobs/{summary['job_id']}"
        return summary

    @app.get("/jobs")
    def list_jobs():
        return [job_summary(j) for j in manager.jobs()]

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return export_result(manager.get(job_id), registry)

    @app.post("/jobs/{job_id}/annotations")
    def post_annotations(job_id: str, submission: AnnotationSubmission):
        try:
            job = manager.submit_annotations(job_id, submission)
        except WrongState as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (AnnotationError, UnknownCode, UnknownParagraph) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"job_id": job.job_id, "state": job.state.value}

    @app.get("/jobs/{job_id}/result")
    def get_result(job_id: str, format: str = "json"):
        job = manager.get(job_id)
        if job.state is not JobState.COMPLETE:
            raise HTTPException(
                status_code=409, detail=f"job is {job.state.value}, result requires Complete"
            )
        if format == "txt":
            return PlainTextResponse(render_target_text(job))
        if format == "json":
            return export_result(job, registry)
        raise HTTPException(status_code=400, detail=[{"field": "format", "message": "use json or txt"}])

    @app.get("/codes", response_model=list[CodeEntry])
    def get_codes():
        return [
            {"code": c.code, "category": c.category.value, "description": c.description}
            for c in DEFAULT_TAXONOMY
        ]

    @app.get("/providers", response_model=ProviderList)
    def get_providers():
        return {"providers": registry.names()}

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app

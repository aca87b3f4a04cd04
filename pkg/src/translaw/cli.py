"""Command-line frontend.

Every command is a thin adapter over the library: the same inputs produce the
same outputs as the corresponding library calls. Exit codes are stable for
scripting: 0 success, 1 runtime failure, 2 usage error.
"""

import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

import click

from . import corpus as corpus_mod
from .annotate import AnnotationError
from .core import EmptyDocument, LanguageTag, Role, UnknownCode, segment_paragraphs
from .gateway import (
    Gateway,
    MockProvider,
    ProviderRegistry,
    UnknownProvider,
    UsageRecord,
    accrue_cost,
    cost_comparisons,
    round_money,
)
from .glossary import load_glossary
from .memory import PnsConfig, open_stores
from .pipeline import (
    JobState,
    JobConfig,
    Services,
    advance,
    complete_annotation_round,
    create_job,
    export_result_json,
    render_target_text,
    submit_human_annotations,
)
from .scoring import (
    PRESETS,
    ScoringError,
    WeightVector,
    acs,
    aggregate,
    load_scores_csv,
    score_report,
)


@click.group()
@click.version_option(package_name="translaw")
def main():
    """Legal translation jobs: translate documents, score outputs, track costs."""


def _language(tag: str) -> LanguageTag:
    try:
        return LanguageTag(tag)
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _load_registry(path: str | None) -> ProviderRegistry:
    if path is None:
        return ProviderRegistry.default()
    try:
        return ProviderRegistry.from_file(path)
    except (OSError, ValueError, KeyError) as exc:
        raise click.UsageError(f"cannot load provider registry {path}: {exc}")


@main.command()
@click.option("--translator", required=True, help="Provider for the Translator role.")
@click.option("--annotator", required=True, help="Provider for the Annotator role.")
@click.option("--proofreader", required=True, help="Provider for the Proofreader role.")
@click.option("--source", default="en", show_default=True, help="Source language tag.")
@click.option("--target", default="zh-Hant", show_default=True, help="Target language tag.")
@click.option("--glossary", "glossary_path", type=click.Path(exists=True, readable=True), default=None)
@click.option("--glossary-format", type=click.Choice(["tsv", "csv"]), default="tsv", show_default=True)
@click.option("--rounds", default=1, show_default=True, help="Annotate/proofread iterations.")
@click.option("--few-shot", is_flag=True, help="Add similar memory pairs as examples.")
@click.option("--human", is_flag=True, help="You act as the annotator, per paragraph.")
@click.option("--pns-k", default=2, show_default=True, help="Context paragraphs on each side.")
@click.option("--pm-top-k", default=3, show_default=True, help="Precedent corrections to retrieve.")
@click.option("--registry", "registry_path", type=click.Path(exists=True, readable=True), default=None,
              help="Provider registry file (JSON or TOML).")
@click.option("--mock-fixtures", type=click.Path(exists=True, readable=True), default=None,
              help="Scripted responses for the mock provider.")
@click.option("--data-dir", default="translaw-data", show_default=True,
              help="Directory for the tm.jsonl / pm.jsonl stores.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="Where to write results (default: alongside the input).")
@click.argument("input_file", type=click.Path(exists=True, readable=True, dir_okay=False))
def translate(translator, annotator, proofreader, source, target, glossary_path,
              glossary_format, rounds, few_shot, human, pns_k, pm_top_k,
              registry_path, mock_fixtures, data_dir, out_dir, input_file):
    """Translate INPUT_FILE through the three-agent pipeline.

    Writes <input>.result.json and <input>.target.txt. Exit 0 when the job
    completes, 1 when it fails, 2 on usage errors.
    """
    registry = _load_registry(registry_path)
    for flag, name in (("--translator", translator), ("--annotator", annotator),
                       ("--proofreader", proofreader)):
        if name not in registry:
            raise click.UsageError(f"{flag}: unknown provider {name!r}")
    direction = (_language(source), _language(target))
    try:
        config = JobConfig(
            role_bindings={
                Role.TRANSLATOR: translator,
                Role.ANNOTATOR: annotator,
                Role.PROOFREADER: proofreader,
            },
            direction=direction,
            glossary_ref=glossary_path,
            pns=PnsConfig(k=pns_k),
            pm_top_k=pm_top_k,
            rounds=rounds,
            human_annotation=human,
            few_shot=few_shot,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))

    fixtures = MockProvider.load_fixtures(mock_fixtures) if mock_fixtures else None
    gateway = Gateway(registry=registry, mock_fixtures=fixtures)
    tm, pm = open_stores(data_dir)
    glossary = None
    if glossary_path:
        glossary = load_glossary(
            Path(glossary_path).read_text(encoding="utf-8"), glossary_format
        )
    services = Services(gateway=gateway, tm=tm, pm=pm, glossary=glossary)

    raw_text = Path(input_file).read_text(encoding="utf-8")
    try:
        doc = segment_paragraphs(raw_text, direction[0], direction[1])
    except EmptyDocument as exc:
        raise click.UsageError(str(exc))

    job = create_job(config, doc)
    advance(job, services)
    while job.state is JobState.AWAITING_HUMAN_ANNOTATION:
        _annotate_interactively(job, services)
        complete_annotation_round(job, services)
        advance(job, services)

    base = Path(out_dir) if out_dir else Path(input_file).parent
    base.mkdir(parents=True, exist_ok=True)
    stem = Path(input_file).stem
    result_path = base / f"{stem}.result.json"
    result_path.write_text(export_result_json(job, registry), encoding="utf-8")
    if job.state is JobState.FAILED:
        click.echo(f"job failed: {job.failure}", err=True)
        click.echo(f"wrote {result_path}", err=True)
        sys.exit(1)
    target_path = base / f"{stem}.target.txt"
    target_path.write_text(render_target_text(job), encoding="utf-8")
    click.echo(f"wrote {result_path}")
    click.echo(f"wrote {target_path}")


def _annotate_interactively(job, services) -> None:
    """Prompt for ERR: records per paragraph; a blank line ends a paragraph."""
    click.echo(f"-- round {job.current_round}: enter annotations --")
    for paragraph in job.paragraphs:
        while True:
            click.echo(f"\n[paragraph {paragraph.index}] SOURCE:\n{paragraph.source}")
            click.echo(f"[paragraph {paragraph.index}] DRAFT:\n{paragraph.current_text()}")
            click.echo('ERR: lines (blank line to finish; nothing = clean):')
            lines = []
            for line in sys.stdin:
                line = line.rstrip("\n")
                if not line.strip():
                    break
                lines.append(line)
            try:
                submit_human_annotations(
                    job, paragraph.index, "\n".join(lines), services.taxonomy
                )
                break
            except (AnnotationError, UnknownCode) as exc:
                click.echo(f"rejected: {exc}", err=True)


def _parse_weights(raw: str) -> WeightVector:
    try:
        parts = [float(p) for p in raw.split(",")]
    except ValueError:
        raise click.UsageError(f"--weights must be three comma-separated numbers, got {raw!r}")
    if len(parts) != 3:
        raise click.UsageError(f"--weights must have exactly three values, got {len(parts)}")
    try:
        return WeightVector(*parts)
    except ScoringError as exc:
        raise click.UsageError(str(exc))


@main.group(name="eval")
def eval_group():
    """Human-evaluation scoring over score CSV files."""


@eval_group.command(name="acs")
@click.option("--weights", default="0.6,0.3,0.1", show_default=True,
              help="Accuracy, coherence, style weights; must sum to 1.")
@click.argument("scores_csv", type=click.Path(exists=True, readable=True, dir_okay=False))
def eval_acs(weights, scores_csv):
    """Per-system dimension means and the weighted score."""
    vector = _parse_weights(weights)
    try:
        per_system = load_scores_csv(Path(scores_csv).read_text(encoding="utf-8"))
    except ScoringError as exc:
        raise click.UsageError(str(exc))
    click.echo(f"{'System':<24}{'Accuracy':>10}{'Coherence':>11}{'Style':>8}{'ACS':>8}")
    for system, segments in per_system.items():
        report = aggregate(segments, vector)
        click.echo(
            f"{system:<24}{report.mean_accuracy:>10.2f}{report.mean_coherence:>11.2f}"
            f"{report.mean_style:>8.2f}{report.mean_acs:>8.2f}"
        )


@eval_group.command(name="report")
@click.option("--baseline", required=True, help="System name improvements are measured against.")
@click.argument("scores_csv", type=click.Path(exists=True, readable=True, dir_okay=False))
def eval_report(baseline, scores_csv):
    """Leaderboard with the three preset weightings and relative improvements."""
    try:
        per_system = load_scores_csv(Path(scores_csv).read_text(encoding="utf-8"))
        reports = score_report(per_system, baseline=baseline)
    except ScoringError as exc:
        raise click.UsageError(str(exc))

    def cell(value: float, delta: float | None) -> str:
        text = f"{value:.2f}"
        if delta is not None:
            text += f" (+{delta:.2f}%)" if delta >= 0 else f" ({delta:.2f}%)"
        return text

    header = ["System", "Accuracy", "Coherence/Cohesion", "Style", "ACS1", "ACS2", "ACS3"]
    rows = [header]
    for report in reports:
        deltas = report.improvements
        rows.append([
            report.system,
            cell(report.means.mean_accuracy, deltas.get("accuracy")),
            cell(report.means.mean_coherence, deltas.get("coherence")),
            cell(report.means.mean_style, deltas.get("style")),
            cell(report.acs_by_preset["ACS1"], deltas.get("ACS1")),
            cell(report.acs_by_preset["ACS2"], deltas.get("ACS2")),
            cell(report.acs_by_preset["ACS3"], deltas.get("ACS3")),
        ])
    widths = [max(len(row[i]) for row in rows) + 2 for i in range(len(header))]
    for row in rows:
        click.echo("".join(cell_.ljust(width) for cell_, width in zip(row, widths)).rstrip())


@main.command()
@click.option("--prices", "prices_path", required=True,
              type=click.Path(exists=True, readable=True, dir_okay=False),
              help="Provider registry file carrying per-1k token prices.")
@click.option("--words", type=int, default=None, help="Source word count for the human quote.")
@click.option("--human-rate", default=None, help="Professional per-word rate.")
@click.option("--baseline", default=None, help="Single-model baseline total to compare against.")
@click.argument("usage_jsonl", type=click.Path(exists=True, readable=True, dir_okay=False))
def cost(prices_path, words, human_rate, baseline, usage_jsonl):
    """Cost report over a usage log, with optional comparisons."""
    registry = _load_registry(prices_path)
    usages = []
    for line_no, line in enumerate(Path(usage_jsonl).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            usages.append(UsageRecord.from_json(json.loads(line)))
        except (ValueError, KeyError) as exc:
            raise click.UsageError(f"{usage_jsonl}:{line_no}: {exc}")
    try:
        report = accrue_cost(usages, registry)
    except UnknownProvider as exc:
        raise click.UsageError(str(exc))
    for role in Role:
        if role in report.per_phase:
            click.echo(f"{role.value:<12}{round_money(report.per_phase[role])}")
    click.echo(f"{'Total':<12}{round_money(report.total)}")
    if words is not None and human_rate is not None:
        try:
            rate = Decimal(human_rate)
            baseline_total = Decimal(baseline) if baseline else round_money(report.total)
            comparison = cost_comparisons(round_money(report.total), words, rate, baseline_total)
        except (InvalidOperation, ValueError) as exc:
            raise click.UsageError(str(exc))
        click.echo(f"Human quote: {round_money(comparison.human_quote)} ({words} words x {rate}/word)")
        click.echo(f"Ratio vs human: {comparison.ratio_vs_human.quantize(Decimal('1'))}x")
        if baseline:
            click.echo(
                f"Vs baseline {baseline}: {comparison.pct_vs_baseline.quantize(Decimal('0.01'))}% cheaper"
            )


@main.group(name="corpus")
def corpus_group():
    """Inspect and carve aligned bilingual corpora."""


@corpus_group.command(name="stats")
@click.argument("path", type=click.Path(exists=True, readable=True, dir_okay=False))
def corpus_stats(path):
    """Counts for a JSONL corpus ({doc_id, index, src, tgt} per line)."""
    try:
        loaded = corpus_mod.ingest_jsonl(Path(path).read_text(encoding="utf-8"), name=path)
    except corpus_mod.CorpusError as exc:
        raise click.UsageError(str(exc))
    s = corpus_mod.stats(loaded)
    click.echo(f"documents: {s.document_count}")
    click.echo(f"pairs: {s.pair_count}")
    click.echo(f"source_chars: {s.source_chars}")
    click.echo(f"target_chars: {s.target_chars}")
    click.echo(f"estimated_source_tokens: {s.estimated_source_tokens}")


@corpus_group.command(name="sample")
@click.option("--doc", "doc_id", default=None, help="Take one whole document by id.")
@click.option("--pairs", "pair_count", type=int, default=None, help="Sample this many pairs.")
@click.option("--seed", type=int, default=None, help="Seed for reproducible sampling.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.argument("path", type=click.Path(exists=True, readable=True, dir_okay=False))
def corpus_sample(doc_id, pair_count, seed, output, path):
    """Carve a test set out of a JSONL corpus."""
    try:
        loaded = corpus_mod.ingest_jsonl(Path(path).read_text(encoding="utf-8"), name=path)
        subset = corpus_mod.take_test_set(loaded, doc_id=doc_id, pair_count=pair_count, seed=seed)
    except corpus_mod.CorpusError as exc:
        raise click.UsageError(str(exc))
    Path(output).write_text(corpus_mod.export_jsonl(subset), encoding="utf-8")
    click.echo(f"wrote {subset.pair_count} pairs to {output}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, readable=True), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--data-dir", default=None)
@click.option("--registry", "registry_path", type=click.Path(exists=True), default=None)
@click.option("--mock-fixtures", type=click.Path(exists=True), default=None)
@click.option("--static-dir", type=click.Path(file_okay=False), default=None)
def serve(config_path, host, port, data_dir, registry_path, mock_fixtures, static_dir):
    """Run the HTTP API (and the web UI, when a static bundle is configured)."""
    import uvicorn

    from .server import ServerConfig, create_app

    config = ServerConfig.from_file(config_path) if config_path else ServerConfig()
    if host:
        config.host = host
    if port:
        config.port = port
    if data_dir:
        config.data_dir = data_dir
    if registry_path:
        config.registry_path = registry_path
    if mock_fixtures:
        config.mock_fixtures_path = mock_fixtures
    if static_dir:
        config.static_dir = static_dir
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()

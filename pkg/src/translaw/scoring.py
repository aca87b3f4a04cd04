"""Human-evaluation scoring: the weighted ACS metric, aggregation, relative
improvements, and the client contract for external automated scorers.

ACS combines three expert-judged dimensions of a legal translation into
one weighted value: accuracy of legal meaning, coherence and cohesion in
structure, and appropriateness in style, each on a 0-10 scale.
The combination is computed in full precision; rounding to two decimals is
purely a display concern.
"""

import csv
import io
import json
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import httpx


class ScoringError(Exception):
    pass


class InvalidWeights(ScoringError):
    pass


class ScoreOutOfRange(ScoringError):
    pass


class ZeroBaseline(ScoringError):
    pass


class EmptyInput(ScoringError):
    pass


class ScorerUnavailable(ScoringError):
    pass


class MalformedScore(ScoringError):
    pass


_WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DimensionScores:
    accuracy: float
    coherence: float
    style: float

    def __post_init__(self):
        for name, value in (
            ("accuracy", self.accuracy),
            ("coherence", self.coherence),
            ("style", self.style),
        ):
            if not 0 <= value <= 10:
                raise ScoreOutOfRange(f"{name} score {value} outside [0, 10]")


@dataclass(frozen=True)
class WeightVector:
    """Dimension weights; must be non-negative and sum to 1."""

    accuracy: float
    coherence: float
    style: float

    def __post_init__(self):
        if min(self.accuracy, self.coherence, self.style) < 0:
            raise InvalidWeights("weights must be non-negative")
        total = self.accuracy + self.coherence + self.style
        if abs(total - 1.0) > _WEIGHT_TOLERANCE:
            raise InvalidWeights(f"weights must sum to 1, got {total}")


# Named presets; ACS2 is the default weighting (accuracy of legal meaning
# carries the most weight).
PRESETS: dict[str, WeightVector] = {
    "ACS1": WeightVector(0.7, 0.2, 0.1),
    "ACS2": WeightVector(0.6, 0.3, 0.1),
    "ACS3": WeightVector(0.5, 0.3, 0.2),
}
DEFAULT_WEIGHTS = PRESETS["ACS2"]


def acs(scores: DimensionScores, weights: WeightVector = DEFAULT_WEIGHTS) -> float:
    """The weighted combination of the three dimension scores."""
    return (
        weights.accuracy * scores.accuracy
        + weights.coherence * scores.coherence
        + weights.style * scores.style
    )


def relative_improvement(candidate: float, baseline: float) -> float:
    """Percentage improvement of candidate over baseline."""
    if baseline <= 0:
        raise ZeroBaseline("baseline must be > 0")
    return 100.0 * (candidate - baseline) / baseline


@dataclass(frozen=True)
class AggregateReport:
    mean_accuracy: float
    mean_coherence: float
    mean_style: float
    mean_acs: float


def aggregate(
    per_segment: Sequence[DimensionScores], weights: WeightVector = DEFAULT_WEIGHTS
) -> AggregateReport:
    """Arithmetic means per dimension plus the ACS of the means.

    By linearity the ACS of the means equals the mean of per-segment ACS.
    """
    if not per_segment:
        raise EmptyInput("no segments to aggregate")
    n = len(per_segment)
    mean_scores = DimensionScores(
        accuracy=sum(s.accuracy for s in per_segment) / n,
        coherence=sum(s.coherence for s in per_segment) / n,
        style=sum(s.style for s in per_segment) / n,
    )
    return AggregateReport(
        mean_accuracy=mean_scores.accuracy,
        mean_coherence=mean_scores.coherence,
        mean_style=mean_scores.style,
        mean_acs=acs(mean_scores, weights),
    )


# --------------------------------------------------------------------------
# Score files and reports
# --------------------------------------------------------------------------


def load_scores_csv(content: str) -> dict[str, list[DimensionScores]]:
    """Parse the score CSV (header ``segment_id,system,A,C,S``) by system."""
    reader = csv.DictReader(io.StringIO(content))
    expected = ["segment_id", "system", "A", "C", "S"]
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != expected:
        raise ScoringError(
            f"score CSV must have header {','.join(expected)}, got {reader.fieldnames}"
        )
    per_system: dict[str, list[DimensionScores]] = {}
    for row in reader:
        per_system.setdefault(row["system"], []).append(
            DimensionScores(
                accuracy=float(row["A"]),
                coherence=float(row["C"]),
                style=float(row["S"]),
            )
        )
    if not per_system:
        raise EmptyInput("score CSV contains no rows")
    return per_system


@dataclass(frozen=True)
class SystemReport:
    system: str
    means: AggregateReport
    acs_by_preset: Mapping[str, float]
    improvements: Mapping[str, float]  # dimension/preset name -> % vs baseline


def score_report(
    per_system: Mapping[str, Sequence[DimensionScores]],
    baseline: str | None = None,
    presets: Mapping[str, WeightVector] = PRESETS,
) -> list[SystemReport]:
    """Leaderboard rows: per-system means, ACS under each preset, improvements.

    Improvements are reported for every system except the baseline itself.
    """
    if baseline is not None and baseline not in per_system:
        raise ScoringError(f"baseline system {baseline!r} not present in scores")
    base_means = aggregate(per_system[baseline]) if baseline else None
    base_acs = (
        {name: acs(DimensionScores(base_means.mean_accuracy, base_means.mean_coherence, base_means.mean_style), w) for name, w in presets.items()}
        if base_means
        else None
    )
    reports = []
    for system, segments in per_system.items():
        means = aggregate(segments)
        mean_scores = DimensionScores(means.mean_accuracy, means.mean_coherence, means.mean_style)
        acs_values = {name: acs(mean_scores, w) for name, w in presets.items()}
        improvements: dict[str, float] = {}
        if base_means is not None and system != baseline:
            improvements = {
                "accuracy": relative_improvement(means.mean_accuracy, base_means.mean_accuracy),
                "coherence": relative_improvement(means.mean_coherence, base_means.mean_coherence),
                "style": relative_improvement(means.mean_style, base_means.mean_style),
            }
            for name in presets:
                improvements[name] = relative_improvement(acs_values[name], base_acs[name])
        reports.append(
            SystemReport(
                system=system,
                means=means,
                acs_by_preset=acs_values,
                improvements=improvements,
            )
        )
    return reports


def report_to_json(reports: Sequence[SystemReport]) -> str:
    rows = []
    for r in reports:
        rows.append(
            {
                "system": r.system,
                "accuracy": round(r.means.mean_accuracy, 2),
                "coherence": round(r.means.mean_coherence, 2),
                "style": round(r.means.mean_style, 2),
                "acs": {name: round(v, 2) for name, v in r.acs_by_preset.items()},
                "improvements": {name: round(v, 2) for name, v in r.improvements.items()},
            }
        )
    return json.dumps(rows, indent=2)


def report_to_csv(reports: Sequence[SystemReport]) -> str:
    buffer = io.StringIO()
    preset_names = list(reports[0].acs_by_preset) if reports else list(PRESETS)
    writer = csv.writer(buffer)
    writer.writerow(
        ["system", "accuracy", "coherence", "style"]
        + preset_names
        + [f"improvement_{name}" for name in ("accuracy", "coherence", "style", *preset_names)]
    )
    for r in reports:
        writer.writerow(
            [r.system,
             f"{r.means.mean_accuracy:.2f}", f"{r.means.mean_coherence:.2f}",
             f"{r.means.mean_style:.2f}"]
            + [f"{r.acs_by_preset[name]:.2f}" for name in preset_names]
            + [
                f"{r.improvements[key]:+.2f}%" if key in r.improvements else ""
                for key in ("accuracy", "coherence", "style", *preset_names)
            ]
        )
    return buffer.getvalue()


# --------------------------------------------------------------------------
# External automated scorers
# --------------------------------------------------------------------------


class ExternalScorer:
    """Client for a remote quality scorer (xCOMET-style models hosted elsewhere).

    Wire contract: ``POST endpoint`` with ``{src, hyp, ref?}``, response
    ``{score}`` with score in [0, 1]. Hosting the neural models themselves is
    out of scope; this is only the call contract.
    """

    def __init__(
        self,
        endpoint: str,
        client: httpx.Client | None = None,
        retries: int = 3,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self._client = client or httpx.Client(timeout=120.0)
        self.retries = retries
        self._sleep = sleep

    def score(self, src: str, hypothesis: str, reference: str | None = None) -> float:
        body = {"src": src, "hyp": hypothesis}
        if reference is not None:
            body["ref"] = reference
        last_error: Exception | None = None
        for attempt in range(1, self.retries + 1):
            try:
                response = self._client.post(self.endpoint, json=body)
            except httpx.HTTPError as exc:
                last_error = exc
                if attempt < self.retries:
                    self._sleep(0.2 * attempt)
                continue
            if response.status_code != 200:
                last_error = ScorerUnavailable(f"scorer returned HTTP {response.status_code}")
                if attempt < self.retries:
                    self._sleep(0.2 * attempt)
                continue
            try:
                value = float(response.json()["score"])
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedScore(f"scorer response not parseable: {exc}") from exc
            if not 0 <= value <= 1:
                raise MalformedScore(f"scorer value {value} outside [0, 1]")
            return value
        raise ScorerUnavailable(f"scorer unreachable after {self.retries} attempts: {last_error}")


def score_external(
    scorer: ExternalScorer, src: str, hypothesis: str, reference: str | None = None
) -> float:
    return scorer.score(src, hypothesis, reference)

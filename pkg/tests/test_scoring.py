import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from translaw.scoring import (
    DEFAULT_WEIGHTS,
    PRESETS,
    AggregateReport,
    DimensionScores,
    EmptyInput,
    ExternalScorer,
    InvalidWeights,
    MalformedScore,
    ScoreOutOfRange,
    ScorerUnavailable,
    WeightVector,
    ZeroBaseline,
    acs,
    aggregate,
    load_scores_csv,
    relative_improvement,
    score_external,
    score_report,
)


class TestAcs:
    def test_weighted_combination(self):
        scores = DimensionScores(8.91, 9.05, 9.82)
        assert acs(scores, WeightVector(0.6, 0.3, 0.1)) == pytest.approx(9.043, abs=1e-9)

    def test_equal_scores_collapse(self):
        scores = DimensionScores(7.5, 7.5, 7.5)
        for weights in PRESETS.values():
            assert acs(scores, weights) == pytest.approx(7.5, abs=1e-9)

    def test_degenerate_weights(self):
        scores = DimensionScores(8.91, 9.05, 9.82)
        assert acs(scores, WeightVector(1, 0, 0)) == 8.91

    def test_default_weights(self):
        assert DEFAULT_WEIGHTS == WeightVector(0.6, 0.3, 0.1)

    def test_presets(self):
        assert PRESETS["ACS1"] == WeightVector(0.7, 0.2, 0.1)
        assert PRESETS["ACS2"] == WeightVector(0.6, 0.3, 0.1)
        assert PRESETS["ACS3"] == WeightVector(0.5, 0.3, 0.2)

    def test_invalid_weights(self):
        with pytest.raises(InvalidWeights):
            WeightVector(0.5, 0.5, 0.5)
        with pytest.raises(InvalidWeights):
            WeightVector(-0.1, 1.0, 0.1)

    def test_score_out_of_range(self):
        with pytest.raises(ScoreOutOfRange):
            DimensionScores(11, 5, 5)
        with pytest.raises(ScoreOutOfRange):
            DimensionScores(5, -1, 5)

    @given(
        st.floats(0, 10), st.floats(0, 10), st.floats(0, 10),
        st.sampled_from(list(PRESETS.values())),
    )
    def test_bounded_by_extremes(self, a, c, s, weights):
        value = acs(DimensionScores(a, c, s), weights)
        assert min(a, c, s) - 1e-9 <= value <= max(a, c, s) + 1e-9

    def test_monotone_in_each_dimension(self):
        base = DimensionScores(5, 5, 5)
        weights = WeightVector(0.6, 0.3, 0.1)
        for bumped in (DimensionScores(6, 5, 5), DimensionScores(5, 6, 5), DimensionScores(5, 5, 6)):
            assert acs(bumped, weights) > acs(base, weights)

    def test_dominance_preserves_ranking(self):
        stronger = DimensionScores(9, 8, 7)
        weaker = DimensionScores(8.5, 7.5, 6.5)
        for weights in PRESETS.values():
            assert acs(stronger, weights) > acs(weaker, weights)


class TestRelativeImprovement:
    @pytest.mark.parametrize("candidate,baseline,expected", [
        (9.32, 8.91, "+4.60%"),
        (9.33, 9.05, "+3.09%"),
        (9.92, 9.82, "+1.02%"),
    ])
    def test_two_decimal_display(self, candidate, baseline, expected):
        value = relative_improvement(candidate, baseline)
        assert f"{value:+.2f}%" == expected

    def test_identity_is_zero(self):
        assert relative_improvement(4.2, 4.2) == 0.0

    def test_zero_baseline(self):
        with pytest.raises(ZeroBaseline):
            relative_improvement(1.0, 0.0)


class TestAggregate:
    def test_single_segment(self):
        report = aggregate([DimensionScores(6, 7, 8)], WeightVector(0.6, 0.3, 0.1))
        assert (report.mean_accuracy, report.mean_coherence, report.mean_style) == (6, 7, 8)

    def test_two_segments(self):
        report = aggregate(
            [DimensionScores(6, 6, 6), DimensionScores(8, 8, 8)],
            PRESETS["ACS2"],
        )
        assert report.mean_accuracy == 7
        assert report.mean_acs == pytest.approx(7.0, abs=1e-9)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            aggregate([])

    @given(st.lists(
        st.builds(DimensionScores, st.floats(0, 10), st.floats(0, 10), st.floats(0, 10)),
        min_size=1, max_size=10,
    ))
    def test_linearity(self, segments):
        report = aggregate(segments, DEFAULT_WEIGHTS)
        mean_of_acs = sum(acs(s, DEFAULT_WEIGHTS) for s in segments) / len(segments)
        assert report.mean_acs == pytest.approx(mean_of_acs, abs=1e-9)


SCORES_CSV = """segment_id,system,A,C,S
1,GPT-4o,8.91,9.05,9.82
1,Ours,9.32,9.33,9.92
"""


class TestScoreFiles:
    def test_load(self):
        per_system = load_scores_csv(SCORES_CSV)
        assert set(per_system) == {"GPT-4o", "Ours"}
        assert per_system["GPT-4o"][0].accuracy == 8.91

    def test_bad_header(self):
        with pytest.raises(Exception):
            load_scores_csv("id,sys,a,c,s\n1,x,1,2,3\n")

    def test_report_improvements(self):
        reports = score_report(load_scores_csv(SCORES_CSV), baseline="GPT-4o")
        ours = next(r for r in reports if r.system == "Ours")
        assert f"{ours.improvements['accuracy']:+.2f}%" == "+4.60%"
        baseline_row = next(r for r in reports if r.system == "GPT-4o")
        assert baseline_row.improvements == {}

    def test_report_unknown_baseline(self):
        with pytest.raises(Exception):
            score_report(load_scores_csv(SCORES_CSV), baseline="ghost")

    def test_report_csv_and_json_forms(self):
        from translaw.scoring import report_to_csv, report_to_json
        reports = score_report(load_scores_csv(SCORES_CSV), baseline="GPT-4o")
        csv_text = report_to_csv(reports)
        assert "+4.60%" in csv_text
        assert csv_text.splitlines()[0].startswith("system,accuracy,coherence,style,ACS1")
        import json
        rows = json.loads(report_to_json(reports))
        assert {r["system"] for r in rows} == {"GPT-4o", "Ours"}


def scorer_with(handler):
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return ExternalScorer("https://scorer.test/score", client=client, sleep=lambda _: None)


class TestExternalScorer:
    def test_valid_score(self):
        scorer = scorer_with(lambda request: httpx.Response(200, json={"score": 0.8411}))
        assert score_external(scorer, "src", "hyp", "ref") == 0.8411

    def test_out_of_range_score(self):
        scorer = scorer_with(lambda request: httpx.Response(200, json={"score": 1.3}))
        with pytest.raises(MalformedScore):
            scorer.score("src", "hyp")

    def test_unreachable_after_retries(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            raise httpx.ConnectError("down")

        with pytest.raises(ScorerUnavailable):
            scorer_with(handler).score("src", "hyp")
        assert len(attempts) == 3

    def test_request_carries_fields(self):
        import json

        seen = {}

        def handler(request):
            seen["body"] = json.loads(request.content)
            return httpx.Response(200, json={"score": 0.5})

        scorer_with(handler).score("s", "h", "r")
        assert seen["body"] == {"src": "s", "hyp": "h", "ref": "r"}

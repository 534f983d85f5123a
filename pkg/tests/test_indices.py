"""Tests for the index family, including the published comparison rows.

The three framework rows used as fixtures (question counts, query counts,
server-busy counts, average response times, averaged MAPEs) and their
expected index values come from the reference comparison of GPT, OAI1 and
OAI3; they double as regression anchors for the whole pipeline.
"""

from __future__ import annotations

import math

import pytest

from inference_index.indices import (
    IndexConfig,
    InIReport,
    SessionStats,
    accuracy,
    artpq,
    consistency,
    efficiency,
    evaluate,
    inference_index,
    response_time_index,
    server_busy_index,
)

DEFAULTS = IndexConfig()

# (label, attempts Q, queries N, SB, ARTpQ seconds, averaged MAPE %)
FRAMEWORK_ROWS = [
    ("GPT", 2, 2, 0, 28.53, 11.76),
    ("OAI1", 4, 4, 0, 129.25, 12.81),
    ("OAI3", 2, 2, 0, 25.50, 13.16),
]


class TestArtpq:
    def test_single_value(self):
        assert artpq([30.0]) == 30.0

    def test_four_query_timings(self):
        assert artpq([133, 113, 168, 103]) == 129.25

    def test_two_query_timings(self):
        assert artpq([30, 21]) == 25.5

    def test_narrated_two_attempt_timings(self):
        assert artpq([53, 3]) == 28.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            artpq([])

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            artpq([5.0, 0.0])


class TestServerBusyIndex:
    def test_no_busy_responses(self):
        assert server_busy_index(0, 2) == 1.0

    def test_worked_example_four_of_five(self):
        assert server_busy_index(4, 5) == pytest.approx(0.2)

    def test_all_busy(self):
        assert server_busy_index(5, 5) == 0.0

    def test_zero_total_rejected(self):
        with pytest.raises(ValueError):
            server_busy_index(0, 0)

    def test_strictly_decreasing_in_sb_count(self):
        values = [server_busy_index(sb, 10) for sb in range(11)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestResponseTimeIndex:
    def test_between_thresholds(self):
        assert response_time_index(28.53, DEFAULTS) == 0.5

    def test_beyond_upper_threshold(self):
        assert response_time_index(129.25, DEFAULTS) == 0.0

    def test_boundary_at_lower_threshold_is_excellent(self):
        assert response_time_index(10.0, DEFAULTS) == 1.0

    def test_boundary_at_upper_threshold_is_poor(self):
        assert response_time_index(30.0, DEFAULTS) == 0.0

    def test_image_is_exactly_three_values(self):
        seen = {response_time_index(t / 10.0, DEFAULTS) for t in range(0, 1000)}
        assert seen == {0.0, 0.5, 1.0}

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            response_time_index(-1.0, DEFAULTS)


class TestEfficiency:
    @pytest.mark.parametrize(
        "e_sbr,e_art,expected", [(1.0, 0.5, 0.75), (1.0, 0.0, 0.50), (0.0, 0.0, 0.0)]
    )
    def test_mean_of_components(self, e_sbr, e_art, expected):
        assert efficiency(e_sbr, e_art) == expected


class TestConsistency:
    @pytest.mark.parametrize("m", [0.1, 1.0, 10.0])
    def test_single_attempt_is_perfect(self, m):
        assert consistency(1, m) == 1.0

    def test_two_attempts(self):
        assert consistency(2, 1.0) == pytest.approx(0.59064, abs=1e-4)

    def test_four_attempts(self):
        assert consistency(4, 1.0) == pytest.approx(0.41903, abs=1e-4)

    def test_strictly_decreasing_in_attempts(self):
        values = [consistency(q, 1.0) for q in range(1, 30)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_strictly_decreasing_in_m_for_multiple_attempts(self):
        values = [consistency(3, m) for m in (0.1, 0.5, 1.0, 2.0, 10.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_invalid_attempts_rejected(self):
        with pytest.raises(ValueError):
            consistency(0, 1.0)


class TestAccuracy:
    def test_reference_value(self):
        assert accuracy(11.76) == pytest.approx(0.8824)

    def test_perfect(self):
        assert accuracy(0.0) == 1.0

    @pytest.mark.parametrize("mape", [100.0, 101.0, 150.0, 1e6, float(10**8)])
    def test_clamp_zeroes_out_at_and_past_100(self, mape):
        assert accuracy(mape) == 0.0

    def test_non_increasing(self):
        values = [accuracy(m) for m in range(0, 201, 5)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            accuracy(-0.1)


class TestInferenceIndex:
    def test_weighted_mean_of_components(self):
        value = inference_index(0.75, 1.0 / (1.0 + math.log(2)), 0.8824, DEFAULTS)
        assert value == pytest.approx(0.7410, abs=5e-4)
        assert round(value, 2) == 0.74

    def test_all_perfect(self):
        assert inference_index(1.0, 1.0, 1.0, DEFAULTS) == pytest.approx(1.0)

    def test_bounded_by_components(self):
        import random

        rng = random.Random(3)
        for _ in range(500):
            e, c, a = rng.random(), rng.random(), rng.random()
            ini = inference_index(e, c, a, DEFAULTS)
            assert min(e, c, a) - 1e-12 <= ini <= max(e, c, a) + 1e-12

    def test_out_of_range_component_rejected(self):
        with pytest.raises(ValueError):
            inference_index(1.5, 0.5, 0.5, DEFAULTS)


class TestIndexConfig:
    def test_defaults_are_valid(self):
        cfg = IndexConfig()
        assert cfg.art1_s == 10.0 and cfg.art2_s == 30.0 and cfg.m == 1.0

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            IndexConfig(w_e=0.5, w_c=0.5, w_a=0.5)

    def test_weights_are_not_auto_normalized(self):
        with pytest.raises(ValueError):
            IndexConfig(w_e=2.0, w_c=2.0, w_a=2.0)

    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError, match="art2_s"):
            IndexConfig(art1_s=30.0, art2_s=10.0)

    def test_round_trip_dict(self):
        cfg = IndexConfig(art1_s=5.0, art2_s=60.0, m=0.5)
        assert IndexConfig.from_dict(cfg.to_dict()) == cfg


class TestSessionStats:
    def test_response_time_count_must_match_answered_queries(self):
        with pytest.raises(ValueError, match="response times"):
            SessionStats(
                attempts_q=1, total_queries_n=5, sb_count=4, response_times_s=(1.0, 2.0)
            )

    def test_worked_example_shape(self):
        stats = SessionStats(
            attempts_q=1,
            total_queries_n=5,
            sb_count=4,
            response_times_s=(12.0,),
            sb_wait_times_s=(1.0, 1.0, 1.0, 1.0),
        )
        assert stats.total_queries_n - stats.sb_count == 1

    def test_attempts_cannot_exceed_queries(self):
        with pytest.raises(ValueError):
            SessionStats(attempts_q=3, total_queries_n=2, sb_count=0, response_times_s=(1.0, 1.0))


def _stats_for(q: int, n: int, sb: int, artpq_s: float) -> SessionStats:
    answered = n - sb
    return SessionStats(
        attempts_q=q,
        total_queries_n=n,
        sb_count=sb,
        response_times_s=tuple([artpq_s] * answered),
    )


class TestEvaluate:
    def test_gpt_row_full_report(self):
        label, q, n, sb, art, mape_av = FRAMEWORK_ROWS[0]
        report = evaluate(_stats_for(q, n, sb, art), mape_av, DEFAULTS)
        assert report.e_sbr == 1.0
        assert report.e_art == 0.5
        assert report.e == 0.75
        assert round(report.c, 2) == 0.59
        assert round(report.a, 2) == 0.88
        assert round(report.ini, 2) == 0.74
        assert report.artpq_s == pytest.approx(art)

    def test_oai1_row(self):
        label, q, n, sb, art, mape_av = FRAMEWORK_ROWS[1]
        report = evaluate(_stats_for(q, n, sb, art), mape_av, DEFAULTS)
        assert report.e == 0.50
        assert round(report.c, 2) == 0.42
        assert round(report.a, 2) == 0.87
        assert round(report.ini, 2) == 0.60

    def test_oai3_row_components(self):
        label, q, n, sb, art, mape_av = FRAMEWORK_ROWS[2]
        report = evaluate(_stats_for(q, n, sb, art), mape_av, DEFAULTS)
        assert report.e == 0.75
        assert round(report.c, 2) == 0.59
        # full-precision pipeline: ini = (0.75 + 0.59062 + 0.8684) / 3
        assert report.ini == pytest.approx(0.736339, abs=5e-6)

    def test_perfect_session(self):
        stats = _stats_for(1, 1, 0, 1.0)
        report = evaluate(stats, 0.0, DEFAULTS)
        assert report.ini == pytest.approx(1.0)
        assert report.e == report.c == report.a == 1.0

    def test_all_indices_in_unit_interval(self):
        import random

        rng = random.Random(8)
        for _ in range(300):
            q = rng.randint(1, 20)
            extra = rng.randint(0, 10)
            n = q + extra
            sb = rng.randint(0, extra)
            answered = n - sb
            if answered == 0:
                continue
            stats = SessionStats(
                attempts_q=q,
                total_queries_n=n,
                sb_count=sb,
                response_times_s=tuple(rng.uniform(0.5, 200.0) for _ in range(answered)),
            )
            report = evaluate(stats, rng.uniform(0, 500), DEFAULTS)
            for value in (report.e_sbr, report.e_art, report.e, report.c, report.a, report.ini):
                assert 0.0 <= value <= 1.0

    def test_sb_waits_excluded_from_artpq_by_default(self):
        stats = SessionStats(
            attempts_q=1,
            total_queries_n=3,
            sb_count=2,
            response_times_s=(10.0,),
            sb_wait_times_s=(300.0, 300.0),
        )
        report = evaluate(stats, 0.0, DEFAULTS)
        assert report.artpq_s == 10.0

    def test_sb_waits_included_behind_flag(self):
        cfg = IndexConfig(include_sb_in_artpq=True)
        stats = SessionStats(
            attempts_q=1,
            total_queries_n=3,
            sb_count=2,
            response_times_s=(10.0,),
            sb_wait_times_s=(40.0, 40.0),
        )
        report = evaluate(stats, 0.0, cfg)
        assert report.artpq_s == pytest.approx(30.0)

    def test_report_round_trip(self):
        report = evaluate(_stats_for(2, 2, 0, 28.53), 11.76, DEFAULTS)
        assert InIReport.from_dict(report.to_dict()) == report

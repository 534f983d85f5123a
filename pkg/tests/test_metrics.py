"""Unit and property tests for the error-metric suite."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from inference_index import metrics

from oracles import oracle_metric_report


class TestPointwiseMetrics:
    def test_mse_identity(self):
        assert metrics.mse([1, 2, 3], [1, 2, 3]) == 0.0

    def test_mse_hand_computed(self):
        assert metrics.mse([2, 4], [1, 2]) == pytest.approx(2.5)
        assert metrics.mse([1, 2, 3], [3, 2, 1]) == pytest.approx(8.0 / 3.0)

    def test_mae_identity(self):
        assert metrics.mae([5, 5], [5, 5]) == 0.0

    def test_mae_hand_computed(self):
        assert metrics.mae([2, 4], [1, 2]) == pytest.approx(1.5)
        assert metrics.mae([1, 2, 3], [3, 2, 1]) == pytest.approx(4.0 / 3.0)

    def test_mean_bias_sign_is_pred_minus_obs(self):
        assert metrics.mean_bias([2, 4], [1, 2]) == pytest.approx(1.5)

    def test_mean_bias_symmetric_errors_cancel(self):
        assert metrics.mean_bias([1, 2, 3], [3, 2, 1]) == 0.0
        assert metrics.mean_bias([7, 7], [7, 7]) == 0.0

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError, match="length mismatch"):
            metrics.mse([1, 2], [1, 2, 3])

    def test_empty_input_raises(self):
        with pytest.raises(ValueError, match="empty"):
            metrics.mae([], [])

    def test_non_finite_input_raises(self):
        with pytest.raises(ValueError, match="non-finite"):
            metrics.mse([1.0, float("nan")], [1.0, 2.0])


class TestMape:
    def test_identity_is_zero(self):
        raw, masked, n_masked = metrics.mape([1, 2], [1, 2])
        assert raw == 0.0 and masked == 0.0 and n_masked == 0

    def test_hand_computed(self):
        raw, _, _ = metrics.mape([2, 4], [1, 2], mask_eps=0.0)
        assert raw == pytest.approx(100.0)

    def test_near_zero_observation_blows_up_raw_not_masked(self):
        obs = [1e-9, 10.0, 20.0]
        pred = [1.0, 10.0, 20.0]
        raw, _, _ = metrics.mape(pred, obs, mask_eps=0.0)
        assert raw > 1e8
        _, masked, n_masked = metrics.mape(pred, obs, mask_eps=0.1)
        assert masked == pytest.approx(0.0)
        assert n_masked == 1

    def test_zero_observation_is_inf_flag_not_nan(self):
        raw, _, _ = metrics.mape([1.0, 2.0], [0.0, 2.0], mask_eps=0.0)
        assert math.isinf(raw) and raw > 0

    def test_all_points_masked_gives_none(self):
        raw, masked, n_masked = metrics.mape([1.0, 1.0], [0.01, -0.02], mask_eps=0.5)
        assert masked is None
        assert n_masked == 2
        assert math.isfinite(raw)

    def test_negative_eps_rejected(self):
        with pytest.raises(ValueError):
            metrics.mape([1], [1], mask_eps=-0.1)


class TestMfeMfb:
    def test_identity(self):
        mfe, mfb, excluded = metrics.mfe_mfb([3, 4], [3, 4])
        assert mfe == 0.0 and mfb == 0.0 and excluded == 0

    def test_all_positive_errors_make_mfe_equal_mfb(self):
        mfe, mfb, _ = metrics.mfe_mfb([2, 4], [1, 2])
        assert mfe == pytest.approx(200.0 / 3.0)
        assert mfb == pytest.approx(200.0 / 3.0)

    def test_underprediction_signs(self):
        mfe, mfb, _ = metrics.mfe_mfb([1], [3])
        assert mfe == pytest.approx(100.0)
        assert mfb == pytest.approx(-100.0)

    def test_zero_sum_points_excluded_and_counted(self):
        mfe, mfb, excluded = metrics.mfe_mfb([1, -2], [3, 2])
        assert excluded == 1
        assert mfe == pytest.approx(100.0)

    def test_all_zero_sum_gives_none(self):
        mfe, mfb, excluded = metrics.mfe_mfb([-1], [1])
        assert mfe is None and mfb is None and excluded == 1


class TestRSquaredAndPearson:
    def test_r2_identity(self):
        assert metrics.r_squared([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_r2_hand_computed(self):
        assert metrics.r_squared([2, 4], [1, 2]) == pytest.approx(-9.0)

    def test_r2_mean_predictor_is_zero(self):
        obs = [1.0, 2.0, 3.0, 6.0]
        pred = [3.0] * 4
        assert metrics.r_squared(pred, obs) == pytest.approx(0.0)

    def test_r2_constant_obs_undefined(self):
        assert metrics.r_squared([1, 2], [5, 5]) is None

    def test_pearson_perfect_linear(self):
        assert metrics.pearson_r([2, 4], [1, 2]) == pytest.approx(1.0)

    def test_pearson_anticorrelation(self):
        assert metrics.pearson_r([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_pearson_identity(self):
        assert metrics.pearson_r([1, 5, 2], [1, 5, 2]) == pytest.approx(1.0)

    def test_pearson_constant_series_undefined(self):
        assert metrics.pearson_r([1, 1], [1, 2]) is None
        assert metrics.pearson_r([1, 2], [3, 3]) is None


class TestMetricReport:
    def test_identity_pattern(self):
        rep = metrics.metric_report([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert rep.mse == 0.0
        assert rep.mae == 0.0
        assert rep.mb == 0.0
        assert rep.mape_pct == 0.0
        assert rep.mape_masked_pct == 0.0
        assert rep.mfe_pct == 0.0
        assert rep.mfb_pct == 0.0
        assert rep.r2 == pytest.approx(1.0)
        assert rep.pearson_r == pytest.approx(1.0)
        assert rep.n_masked == 0

    def test_assembles_component_values(self):
        rep = metrics.metric_report([2.0, 4.0], [1.0, 2.0], mask_eps=0.0)
        assert rep.mse == pytest.approx(2.5)
        assert rep.mae == pytest.approx(1.5)
        assert rep.mb == pytest.approx(1.5)
        assert rep.mape_pct == pytest.approx(100.0)
        assert rep.mfe_pct == pytest.approx(200.0 / 3.0)
        assert rep.mfb_pct == pytest.approx(200.0 / 3.0)
        assert rep.r2 == pytest.approx(-9.0)
        assert rep.pearson_r == pytest.approx(1.0)

    def test_undefined_flags_do_not_abort_report(self):
        rep = metrics.metric_report([1.0, 2.0], [4.0, 4.0])
        assert rep.r2 is None
        assert rep.pearson_r is None
        assert math.isfinite(rep.mse)

    def test_round_trip_dict(self):
        rep = metrics.metric_report([2.0, 4.0], [1.0, 2.0])
        assert metrics.MetricReport.from_dict(rep.to_dict()) == rep


def _random_case(rng: random.Random) -> tuple[list[float], list[float]]:
    n = rng.randint(2, 500)
    scale = 10.0 ** rng.uniform(-2, 3)
    obs = [rng.uniform(-scale, scale) for _ in range(n)]
    pred = [o + rng.gauss(0, scale * 0.1) for o in obs]
    return pred, obs


def _close(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    if math.isinf(a) or math.isinf(b):
        return a == b
    return math.isclose(a, b, rel_tol=1e-10, abs_tol=1e-12)


class TestOracleAgreement:
    def test_thousand_random_instances_match_brute_force(self):
        rng = random.Random(20260810)
        for case in range(1000):
            pred, obs = _random_case(rng)
            eps = rng.choice([0.0, 0.1, 1.0])
            got = metrics.metric_report(pred, obs, mask_eps=eps).to_dict()
            want = oracle_metric_report(pred, obs, mask_eps=eps)
            for key, expected in want.items():
                if key in ("n_masked", "n_zero_sum"):
                    assert got[key] == expected, f"case {case}: {key}"
                else:
                    assert _close(got[key], expected), (
                        f"case {case}: {key}: got {got[key]}, oracle {expected}"
                    )

    def test_hundred_point_series_vs_oracle(self):
        rng = random.Random(7)
        obs = [rng.uniform(1, 50) for _ in range(100)]
        pred = [o + rng.gauss(0, 2) for o in obs]
        got = metrics.metric_report(pred, obs, mask_eps=0.1).to_dict()
        want = oracle_metric_report(pred, obs, mask_eps=0.1)
        for key in want:
            assert _close(got[key], want[key]) or got[key] == want[key]


class TestProperties:
    def test_nonnegativity_and_bias_bound(self):
        rng = random.Random(99)
        for _ in range(300):
            pred, obs = _random_case(rng)
            rep = metrics.metric_report(pred, obs, mask_eps=0.1)
            assert rep.mse >= 0.0
            assert rep.mae >= 0.0
            assert rep.mape_pct >= 0.0
            assert abs(rep.mb) <= rep.mae + 1e-12
            if rep.pearson_r is not None:
                assert -1.0 <= rep.pearson_r <= 1.0
            if rep.r2 is not None:
                assert rep.r2 <= 1.0

    def test_mape_zero_iff_equal(self):
        rng = random.Random(5)
        for _ in range(100):
            pred, obs = _random_case(rng)
            raw, _, _ = metrics.mape(pred, obs, mask_eps=0.0)
            if raw == 0.0:
                assert pred == obs
        series = [rng.uniform(1, 5) for _ in range(10)]
        raw, masked, n_masked = metrics.mape(series, series, mask_eps=0.0)
        assert raw == 0.0 and masked == 0.0 and n_masked == 0

    def test_masked_mape_finite_when_any_point_survives(self):
        rng = random.Random(11)
        for _ in range(200):
            n = rng.randint(2, 50)
            obs = [rng.choice([0.0, rng.uniform(0.5, 10)]) for _ in range(n)]
            pred = [o + rng.uniform(-1, 1) for o in obs]
            _, masked, n_masked = metrics.mape(pred, obs, mask_eps=0.1)
            if n_masked < n:
                assert masked is not None and math.isfinite(masked)

    def test_pearson_affine_invariance(self):
        rng = random.Random(42)
        base_pred = [rng.uniform(-5, 5) for _ in range(50)]
        base_obs = [p + rng.gauss(0, 1) for p in base_pred]
        r0 = metrics.pearson_r(base_pred, base_obs)
        for _ in range(100):
            a = rng.uniform(0.01, 100.0)
            b = rng.uniform(-100.0, 100.0)
            side = rng.random() < 0.5
            pred = [a * p + b for p in base_pred] if side else base_pred
            obs = base_obs if side else [a * o + b for o in base_obs]
            assert metrics.pearson_r(pred, obs) == pytest.approx(r0, rel=1e-9)
        # negative scale flips the sign
        flipped = metrics.pearson_r([-p for p in base_pred], base_obs)
        assert flipped == pytest.approx(-r0, rel=1e-9)

    def test_report_accepts_numpy_arrays(self):
        rep = metrics.metric_report(np.array([2.0, 4.0]), np.array([1.0, 2.0]))
        assert rep.mae == pytest.approx(1.5)

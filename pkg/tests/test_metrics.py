import random

import pytest
from statsmodels.stats.proportion import proportion_confint

from citynav.metrics import (
    DomainError,
    EmptyInput,
    EpisodeResult,
    aggregate_report,
    distance_progress,
    subtask_success_rate,
    task_progress,
    wilson_interval,
)


class TestSubtaskSuccessRate:
    def test_zero_of_four(self):
        assert subtask_success_rate(0, 4) == 0.0

    def test_all_of_four(self):
        assert subtask_success_rate(4, 4) == 1.0

    def test_one_of_four(self):
        assert subtask_success_rate(1, 4) == 0.25

    def test_zero_total_rejected(self):
        with pytest.raises(DomainError):
            subtask_success_rate(0, 0)


class TestDistanceProgress:
    def test_partial(self):
        assert distance_progress(200, 50) == 0.75

    def test_no_progress(self):
        assert distance_progress(100, 100) == 0.0

    def test_regression_clamped(self):
        assert distance_progress(100, 150) == 0.0

    def test_zero_initial_rejected(self):
        with pytest.raises(DomainError):
            distance_progress(0, 10)


class TestTaskProgress:
    def test_met(self):
        assert task_progress(576, 0) == 1.0

    def test_unmoved(self):
        assert task_progress(576, 576) == 0.0

    def test_diverged_clamped(self):
        assert task_progress(576, 700) == 0.0

    def test_clamp_range_property(self):
        rand = random.Random(1)
        for _ in range(200):
            d0 = rand.uniform(0.1, 1000)
            dt = rand.uniform(0, 2000)
            assert 0.0 <= task_progress(d0, dt) <= 1.0
            assert 0.0 <= distance_progress(d0, dt) <= 1.0


class TestWilson:
    def test_zero_successes_lower_bound_zero(self):
        low, _high = wilson_interval(0, 25)
        assert low == 0.0

    def test_all_successes_upper_bound_one(self):
        _low, high = wilson_interval(25, 25)
        assert high == 1.0

    def test_against_reference_implementation(self):
        low, high = wilson_interval(2, 50, 0.95)
        ref_low, ref_high = proportion_confint(2, 50, alpha=0.05, method="wilson")
        assert low == pytest.approx(ref_low, abs=1e-9)
        assert high == pytest.approx(ref_high, abs=1e-9)

    def test_many_random_pairs_against_reference(self):
        rand = random.Random(7)
        for _ in range(40):
            n = rand.randint(1, 500)
            k = rand.randint(0, n)
            low, high = wilson_interval(k, n, 0.95)
            ref_low, ref_high = proportion_confint(k, n, alpha=0.05, method="wilson")
            assert low == pytest.approx(ref_low, abs=1e-9)
            assert high == pytest.approx(ref_high, abs=1e-9)

    def test_width_shrinks_with_n(self):
        widths = []
        for n in (10, 40, 160, 640):
            low, high = wilson_interval(n // 2, n)
            widths.append(high - low)
        assert widths == sorted(widths, reverse=True)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            wilson_interval(5, 4)
        with pytest.raises(DomainError):
            wilson_interval(0, 0)


def mmnav_result(task_id, success, completed, total, d0, dT, st=0, dy=0, rl=0, steps=10):
    return EpisodeResult(
        task_id=task_id,
        benchmark="mmnav",
        success=success,
        subtasks_total=total,
        subtasks_completed=completed,
        d0=d0,
        dT=dT,
        static_collisions=st,
        dynamic_collisions=dy,
        red_light_violations=rl,
        steps=steps,
    )


class TestAggregate:
    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            aggregate_report([])

    def test_single_episode_passthrough(self):
        r = mmnav_result("t", True, 3, 3, 100, 0)
        report = aggregate_report([r])
        assert report.success_rate == 1.0
        assert report.subtask_success_rate == 1.0
        assert report.distance_progress == 1.0

    def test_all_success(self):
        results = [mmnav_result(f"t{i}", True, 4, 4, 200, 50) for i in range(10)]
        report = aggregate_report(results)
        assert report.success_rate == 1.0
        assert report.distance_progress == pytest.approx(0.75)

    def test_hand_computed_aggregate(self):
        # spreadsheet-style oracle: explicit arithmetic over a known batch
        results = [
            mmnav_result("a", True, 4, 4, 100, 0, st=1, dy=0, rl=0),
            mmnav_result("b", False, 1, 4, 100, 50, st=0, dy=2, rl=1),
            mmnav_result("c", False, 2, 4, 200, 300, st=3, dy=0, rl=0),
            mmnav_result("d", True, 2, 2, 80, 8, st=0, dy=0, rl=1),
        ]
        report = aggregate_report(results)
        assert report.success_rate == pytest.approx(2 / 4)
        expected_ssr = (1.0 + 0.25 + 0.5 + 1.0) / 4
        assert report.subtask_success_rate == pytest.approx(expected_ssr)
        expected_dp = (1.0 + 0.5 + 0.0 + 0.9) / 4
        assert report.distance_progress == pytest.approx(expected_dp)
        assert report.mean_static_collisions == pytest.approx(1.0)
        assert report.mean_dynamic_collisions == pytest.approx(0.5)
        assert report.mean_red_light_violations == pytest.approx(0.5)
        assert report.success_ci == wilson_interval(2, 4)

    def test_concatenation_weighted_means(self):
        a = [mmnav_result(f"a{i}", True, 4, 4, 100, 0) for i in range(3)]
        b = [mmnav_result(f"b{i}", False, 0, 4, 100, 100) for i in range(6)]
        combined = aggregate_report(a + b)
        assert combined.success_rate == pytest.approx(3 / 9)
        assert combined.distance_progress == pytest.approx(3 / 9)

    def test_mrs_aggregate(self):
        results = [
            EpisodeResult("m0", "mrs", True, D0=576, DT=0, met=True, steps=100),
            EpisodeResult("m1", "mrs", False, D0=576, DT=288, met=False, steps=600),
        ]
        report = aggregate_report(results)
        assert report.collaborative_success_rate == 0.5
        assert report.task_progress == pytest.approx(0.75)
        assert report.collaborative_ci == wilson_interval(1, 2)

    def test_table_rendering(self):
        report = aggregate_report([mmnav_result("t", True, 2, 2, 10, 0)])
        table = report.to_table()
        assert "SR %" in table and "Subtask SR %" in table

    def test_result_roundtrip(self):
        r = mmnav_result("t", True, 3, 4, 100, 10, st=1)
        assert EpisodeResult.from_dict(r.to_dict()) == r

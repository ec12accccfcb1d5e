"""
Tests for the Simulation Engine

Short runs of the presets plus small hand-built scenarios.
"""

import numpy as np
import pytest

from src.control.design import design_controller
from src.control.reference import reference_value
from src.core.engine import SimulationEngine, run
from src.models.scenario import ScenarioConfig, SchedulingMode
from src.services.scenario_service import preset

C = 0.0032


@pytest.fixture(scope="module")
def nonfs_run():
    config = preset("scenario-1").with_overrides(duration_s=1.0, log_grid_s=1e-3, mode="nonfs")
    return run(config)


@pytest.fixture(scope="module")
def ifs_run():
    """Engine and result of a two-second IFS run of the four-loop preset."""
    engine = SimulationEngine(preset("scenario-2").with_overrides(duration_s=2.0, log_grid_s=1e-3))
    return engine, engine.run()


class TestZeroLoops:
    def test_only_log_ticks(self):
        result = run(ScenarioConfig(name="empty", duration_s=1.0, log_grid_s=0.01))

        assert result.columns == ("time_s",)
        assert result.timeseries.shape == (101, 1)
        assert result.times[0] == 0.0
        assert result.times[-1] == 1.0
        assert result.summary.mean_requested_utilization == 0.0
        assert result.summary.loops == ()
        assert [row.time_s for row in result.scheduler_trace] == [0.5, 1.0]


class TestFixedPeriods:
    """NonFS keeps every period and priority for the whole run."""

    def test_periods_and_priorities_constant(self, nonfs_run):
        assert np.all(nonfs_run.column("h_1_ms") == 10.0)
        assert np.all(nonfs_run.column("h_2_ms") == 12.0)
        assert np.all(nonfs_run.column("prio_1") == 1)
        assert np.all(nonfs_run.column("prio_2") == 2)
        assert nonfs_run.scheduler_trace == []

    def test_requested_utilization_constant(self, nonfs_run):
        values = nonfs_run.utilization_trace[:, 1]
        assert values == pytest.approx(np.full(values.shape, C / 0.01 + C / 0.012))

    def test_highest_priority_loop_delay_bounded_by_one_blocking_frame(self, nonfs_run):
        assert nonfs_run.summary.loops[0].max_delay_ms <= 2 * C * 1000 + 1e-6
        assert nonfs_run.summary.loops[0].delivered > 0

    def test_busy_fraction_within_requested(self, nonfs_run):
        summary = nonfs_run.summary
        tolerance = 2 * C / 1.0
        assert summary.bus_busy_fraction <= min(1.0, summary.mean_requested_utilization) + tolerance + 1e-9

    def test_outputs_track_reference(self, nonfs_run):
        y = nonfs_run.column("y_1")
        assert abs(y[-1] - 1.0) < 0.1


class TestReferenceSignal:
    def test_logged_reference_is_the_square_wave(self, nonfs_run):
        times = nonfs_run.times

        assert nonfs_run.column("r_1").tolist() == [reference_value(t, 4.0) for t in times]
        assert nonfs_run.column("r_2").tolist() == [reference_value(t, 2.0) for t in times]
        assert nonfs_run.column("r_2")[-1] == -1.0


class TestRunInvariants:
    """Properties every run satisfies."""

    @pytest.mark.parametrize("mode", list(SchedulingMode))
    def test_samples_are_conserved(self, short_scenario_2, mode):
        result = run(short_scenario_2.with_overrides(mode=mode))

        for loop in result.summary.loops:
            assert loop.generated == loop.delivered + loop.dropped + loop.discarded + loop.in_flight

    def test_time_strictly_increasing(self, short_scenario_1):
        result = run(short_scenario_1)

        assert np.all(np.diff(result.times) > 0)
        assert result.times[-1] == 1.0
        assert len(result.times) == 1001

    def test_runs_are_deterministic(self, short_scenario_1):
        first, second = run(short_scenario_1), run(short_scenario_1)

        np.testing.assert_array_equal(first.timeseries, second.timeseries)
        assert first.summary == second.summary

    def test_iae_matches_reported_total(self, short_scenario_1):
        result = run(short_scenario_1)
        assert result.total_iae == pytest.approx(result.loop_iae(1) + result.loop_iae(2))
        assert result.loop_iae(1) > 0


class TestFeedbackScheduling:
    """IFS on the overloaded preset."""

    def test_one_row_per_window(self, ifs_run):
        _, result = ifs_run
        assert [row.time_s for row in result.scheduler_trace] == [0.5, 1.0, 1.5, 2.0]

    def test_periods_within_bounds(self, ifs_run):
        _, result = ifs_run
        for row in result.scheduler_trace:
            assert all(C <= h <= 0.02 for h in row.periods_s)
            assert sum(C / h for h in row.periods_s) <= row.utilization + 1e-12

    def test_priorities_stay_a_permutation(self, ifs_run):
        _, result = ifs_run
        for row in result.scheduler_trace:
            assert sorted(row.priority_levels) == [1, 2, 3, 4]
        prios = np.column_stack([result.column(f"prio_{i}") for i in range(1, 5)])
        assert all(sorted(r) == [1, 2, 3, 4] for r in prios.astype(int).tolist())

    def test_every_designed_period_places_the_poles(self, ifs_run):
        engine, _ = ifs_run
        for loop in engine.loops:
            assert len(loop.designed_periods) >= 1
            for h in loop.designed_periods:
                gains = design_controller(loop.config.plant, loop.config.desired_poles, h)
                eigenvalues = sorted(np.linalg.eigvals(gains.closed_loop), key=lambda z: z.imag)
                assert abs(eigenvalues[0] - (0.8 - 0.3j)) < 1e-9
                assert abs(eigenvalues[1] - (0.8 + 0.3j)) < 1e-9

    def test_logged_period_matches_scheduler(self, ifs_run):
        _, result = ifs_run
        last = result.scheduler_trace[-1]
        logged = [result.column(f"h_{i}_ms")[-1] for i in range(1, 5)]
        assert logged == pytest.approx([h * 1000 for h in last.periods_s])

    def test_overloaded_start_is_resplit_before_the_first_sample(self, ifs_run):
        _, result = ifs_run

        for i in range(1, 5):
            assert result.column(f"h_{i}_ms")[0] == pytest.approx(12.8, abs=1e-9)
        assert result.utilization_trace[0, 1] <= 1.0 + 1e-9

    def test_first_window_meets_every_deadline(self, ifs_run):
        _, result = ifs_run
        assert result.scheduler_trace[0].miss_ratio == 0.0

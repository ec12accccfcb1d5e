"""
Tests for run metrics: miss-ratio windows, IAE, packet statistics and the
utilization trace.
"""
import numpy as np
import pytest

from src.models.results import LoopSummary, MetricsSummary, SimulationResult
from src.models.scenario import SchedulingMode
from src.network.base import PacketOutcome, PacketState, SamplePacket
from src.utils.metrics import MetricsRecord, iae_improvement, requested_utilization, window_index


def packet(loop_id=0, release=0.0, deadline=0.01, state=PacketState.DELIVERED) -> SamplePacket:
    return SamplePacket(
        packet_id=0, loop_id=loop_id, priority=1, release_time=release, deadline=deadline,
        transmission_time=0.0032, state_sample=np.zeros(2), reference=1.0, state=state,
    )


class TestWindowIndex:
    """Deadlines are attributed to the window that contains them."""

    @pytest.mark.parametrize(
        "deadline,expected",
        [(0.0, 1), (0.01, 1), (0.5, 1), (0.5 + 1e-6, 2), (1.0, 2), (0.1 + 0.2 + 0.2, 1)],
    )
    def test_index(self, deadline, expected):
        assert window_index(deadline, 0.5) == expected


class TestMissRatio:
    """Tests for record_outcome / miss_ratio."""

    def test_ratio(self):
        metrics = MetricsRecord(n_loops=1, t_fs=0.5)
        for i in range(50):
            metrics.record_outcome(PacketOutcome.MISSED if i < 3 else PacketOutcome.MET, 0.25)

        assert metrics.miss_ratio(1) == pytest.approx(0.06)
        assert metrics.window(1).generated == 50

    def test_empty_window_is_zero(self):
        assert MetricsRecord(n_loops=1, t_fs=0.5).miss_ratio(3) == 0.0

    def test_late_release_counts_in_next_window(self):
        metrics = MetricsRecord(n_loops=1, t_fs=0.5)

        metrics.on_resolved(packet(release=0.495, deadline=0.505), PacketOutcome.MISSED, 0.505)

        assert metrics.window(1).generated == 0
        assert metrics.window(2).missed == 1


class TestPacketStatistics:
    def test_terminations_by_state(self):
        metrics = MetricsRecord(n_loops=2, t_fs=0.5)

        metrics.on_terminated(packet(loop_id=0, release=0.0), 0.0032)
        metrics.on_terminated(packet(loop_id=0, release=0.01), 0.0164)
        metrics.on_terminated(packet(loop_id=1, state=PacketState.DROPPED), 0.01)
        metrics.on_terminated(packet(loop_id=1, state=PacketState.DISCARDED), 0.012)
        metrics.on_resolved(packet(loop_id=1), PacketOutcome.MISSED, 0.01)

        summary = metrics.snapshot(duration=1.0, bus_busy_time=0.0, in_flight=(0, 1))
        first, second = summary.loops

        assert first.delivered == 2
        assert first.mean_delay_ms == pytest.approx(4.8)
        assert first.max_delay_ms == pytest.approx(6.4)
        assert second.dropped == 1
        assert second.discarded == 1
        assert second.deadline_misses == 1
        assert second.in_flight == 1
        assert second.mean_delay_ms == 0.0


class TestIae:
    """Trapezoidal IAE on the log grid."""

    def test_constant_error(self):
        metrics = MetricsRecord(n_loops=1, t_fs=0.5)
        metrics.iae_step(0, 1.0, 0.0)
        for _ in range(2000):
            metrics.iae_step(0, 1.0, 1e-3)

        assert metrics.loop_iae(0) == pytest.approx(2.0, abs=1e-9)

    def test_zero_error(self):
        metrics = MetricsRecord(n_loops=1, t_fs=0.5)
        for _ in range(10):
            metrics.iae_step(0, 0.0, 1e-3)
        assert metrics.loop_iae(0) == 0.0

    def test_linear_error_is_exact(self):
        metrics = MetricsRecord(n_loops=1, t_fs=0.5)
        for k in range(1001):
            metrics.iae_step(0, k / 1000, 0.0 if k == 0 else 1e-3)

        assert metrics.loop_iae(0) == pytest.approx(0.5, abs=1e-6)

    def test_negative_dt_rejected(self):
        with pytest.raises(ValueError):
            MetricsRecord(n_loops=1, t_fs=0.5).iae_step(0, 1.0, -1e-3)


class TestRequestedUtilization:
    @pytest.mark.parametrize(
        "periods,expected",
        [((0.01, 0.012), 0.5867), ((0.01, 0.01, 0.012, 0.012), 1.1733), ((0.0032,), 1.0)],
    )
    def test_sum(self, periods, expected):
        assert requested_utilization(periods, (0.0032,) * len(periods)) == pytest.approx(expected, abs=1e-4)


class TestSnapshot:
    """Summary figures."""

    @pytest.fixture
    def metrics(self):
        metrics = MetricsRecord(n_loops=1, t_fs=0.5)
        for t, u in [(0.0, 0.4), (0.25, 0.4), (0.5, 0.8), (0.75, 0.8), (1.0, 0.8)]:
            metrics.record_utilization(t, u)
        metrics.record_outcome(PacketOutcome.MET, 0.3)
        metrics.record_outcome(PacketOutcome.MISSED, 0.6)
        metrics.record_outcome(PacketOutcome.MET, 0.9)
        metrics.record_outcome(PacketOutcome.MISSED, 1.2)
        return metrics

    def test_utilization_means(self, metrics):
        summary = metrics.snapshot(duration=1.0, bus_busy_time=0.25, in_flight=(0,))

        assert summary.mean_requested_utilization == pytest.approx(0.64)
        assert summary.final_half_requested_utilization == pytest.approx(0.8)
        assert summary.bus_busy_fraction == pytest.approx(0.25)

    def test_only_closed_windows_count(self, metrics):
        summary = metrics.snapshot(duration=1.0, bus_busy_time=0.0, in_flight=(0,))

        assert [w.index for w in summary.windows] == [1, 2]
        assert summary.run_miss_ratio == pytest.approx(1 / 3)
        assert summary.final_window_miss_ratio == pytest.approx(0.5)

    def test_utilization_trace(self, metrics):
        trace = metrics.utilization_trace()
        assert trace.shape == (5, 2)
        assert trace[2].tolist() == [0.5, 0.8]

    def test_no_loops(self):
        summary = MetricsRecord(n_loops=0, t_fs=0.5).snapshot(1.0, 0.0, ())
        assert summary.loops == ()
        assert summary.total_iae == 0.0


def make_result(mode, iaes) -> SimulationResult:
    return SimulationResult(
        scenario="test",
        mode=mode,
        n_loops=len(iaes),
        columns=("time_s",),
        timeseries=np.zeros((1, 1)),
        summary=MetricsSummary(loops=tuple(LoopSummary(loop=i + 1, iae=v) for i, v in enumerate(iaes))),
    )


class TestIaeImprovement:
    def test_percentages(self):
        report = iae_improvement(
            make_result(SchedulingMode.NON_FS, (2.0, 1.0)),
            make_result(SchedulingMode.IFS, (1.0, 1.5)),
        )

        assert report.per_loop_percent == pytest.approx((50.0, -50.0))
        assert report.total_percent == pytest.approx(100 * (3.0 - 2.5) / 3.0)
        assert report.candidate_mode == "ifs"

    def test_zero_baseline(self):
        report = iae_improvement(
            make_result(SchedulingMode.NON_FS, (0.0,)), make_result(SchedulingMode.IFS, (1.0,)),
        )
        assert report.per_loop_percent == (0.0,)

    def test_loop_count_mismatch(self):
        with pytest.raises(ValueError):
            iae_improvement(make_result(SchedulingMode.NON_FS, (1.0,)), make_result(SchedulingMode.IFS, (1.0, 1.0)))

"""
Run Metrics

Deadline-miss accounting per scheduler window, per-loop IAE and packet
statistics, and the requested-utilization trace of one simulation run.

Window j collects the packets whose deadline falls in ((j-1) T_FS, j T_FS],
so a window's miss ratio is fully known when the scheduler runs at j T_FS.
"""
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import computed_field

from src.models.base import SimBaseModel
from src.models.results import LoopSummary, MetricsSummary, SimulationResult, WindowRecord
from src.network.base import PacketObserver, PacketOutcome, PacketState, SamplePacket

WINDOW_EPSILON = 1e-9


def requested_utilization(periods: Sequence[float], transmission_times: Sequence[float]) -> float:
    """Sum of c_i / h_i."""
    return sum(c / h for c, h in zip(transmission_times, periods))


def window_index(deadline: float, t_fs: float) -> int:
    """Index j of the window ((j-1) T_FS, j T_FS] that contains deadline."""
    return max(1, math.ceil(deadline / t_fs - WINDOW_EPSILON))


class _LoopCounters:
    __slots__ = ("iae", "last_abs_error", "generated", "delivered", "dropped", "discarded",
                 "misses", "delay_sum", "delay_max")

    def __init__(self):
        self.iae = 0.0
        self.last_abs_error: Optional[float] = None
        self.generated = 0
        self.delivered = 0
        self.dropped = 0
        self.discarded = 0
        self.misses = 0
        self.delay_sum = 0.0
        self.delay_max = 0.0


class MetricsRecord(PacketObserver):
    """
    Accumulates everything the summary reports for one run.

    Registered as the bus observer, so packet outcomes stream in as the bus
    resolves them.
    """

    def __init__(self, n_loops: int, t_fs: float):
        self.n_loops = n_loops
        self.t_fs = t_fs
        self._loops = [_LoopCounters() for _ in range(n_loops)]
        self._windows: dict[int, list[int]] = {}
        self._utilization_times: list[float] = []
        self._utilization_values: list[float] = []

    # ------------------------------------------------------------------
    # Deadline accounting
    # ------------------------------------------------------------------

    def record_generated(self, loop_id: int) -> None:
        self._loops[loop_id].generated += 1

    def record_outcome(self, outcome: PacketOutcome, deadline: float) -> None:
        counts = self._windows.setdefault(window_index(deadline, self.t_fs), [0, 0])
        counts[0] += 1
        if outcome == PacketOutcome.MISSED:
            counts[1] += 1

    def on_resolved(self, packet: SamplePacket, outcome: PacketOutcome, time: float) -> None:
        self.record_outcome(outcome, packet.deadline)
        if outcome == PacketOutcome.MISSED:
            self._loops[packet.loop_id].misses += 1

    def on_terminated(self, packet: SamplePacket, time: float) -> None:
        loop = self._loops[packet.loop_id]
        if packet.state == PacketState.DELIVERED:
            loop.delivered += 1
            delay = time - packet.release_time
            loop.delay_sum += delay
            loop.delay_max = max(loop.delay_max, delay)
        elif packet.state == PacketState.DROPPED:
            loop.dropped += 1
        else:
            loop.discarded += 1

    def window(self, index: int) -> WindowRecord:
        generated, missed = self._windows.get(index, (0, 0))
        return WindowRecord(index=index, generated=generated, missed=missed)

    def miss_ratio(self, index: int) -> float:
        """rho of window index; 0 for a window without deadlines."""
        return self.window(index).miss_ratio

    # ------------------------------------------------------------------
    # Control performance and utilization
    # ------------------------------------------------------------------

    def iae_step(self, loop_id: int, e_abs: float, dt: float) -> None:
        """Trapezoidal IAE increment from the previous |e| sample to this one, dt apart."""
        if dt < 0:
            raise ValueError(f"dt must be non-negative, got {dt!r}")
        loop = self._loops[loop_id]
        if loop.last_abs_error is not None:
            loop.iae += 0.5 * (loop.last_abs_error + e_abs) * dt
        loop.last_abs_error = e_abs

    def loop_iae(self, loop_id: int) -> float:
        return self._loops[loop_id].iae

    def record_utilization(self, time: float, value: float) -> None:
        self._utilization_times.append(time)
        self._utilization_values.append(value)

    def utilization_trace(self) -> np.ndarray:
        """Array of (time, requested utilization) rows, one per log tick."""
        return np.column_stack([self._utilization_times, self._utilization_values]) \
            if self._utilization_times else np.empty((0, 2))

    # ------------------------------------------------------------------
    # Summary
    # ------------------------------------------------------------------

    def snapshot(self, duration: float, bus_busy_time: float, in_flight: Sequence[int]) -> MetricsSummary:
        times = np.asarray(self._utilization_times)
        values = np.asarray(self._utilization_values)
        mean_u = float(values.mean()) if values.size else 0.0
        final_half = values[times >= duration / 2] if values.size else values
        final_half_u = float(final_half.mean()) if final_half.size else 0.0

        closed = math.floor(duration / self.t_fs + WINDOW_EPSILON)
        windows = tuple(self.window(j) for j in sorted(self._windows) if j <= closed)
        generated = sum(w.generated for w in windows)
        missed = sum(w.missed for w in windows)

        loops = []
        for loop_id, loop in enumerate(self._loops):
            loops.append(LoopSummary(
                loop=loop_id + 1,
                iae=loop.iae,
                generated=loop.generated,
                delivered=loop.delivered,
                dropped=loop.dropped,
                discarded=loop.discarded,
                in_flight=in_flight[loop_id],
                deadline_misses=loop.misses,
                mean_delay_ms=1000 * loop.delay_sum / loop.delivered if loop.delivered else 0.0,
                max_delay_ms=1000 * loop.delay_max,
            ))

        return MetricsSummary(
            loops=tuple(loops),
            windows=windows,
            mean_requested_utilization=mean_u,
            final_half_requested_utilization=final_half_u,
            bus_busy_fraction=bus_busy_time / duration,
            run_miss_ratio=missed / generated if generated else 0.0,
            final_window_miss_ratio=self.miss_ratio(closed) if closed >= 1 else 0.0,
        )


class ImprovementReport(SimBaseModel):
    """IAE improvement of a candidate run over a baseline, in percent."""

    baseline_mode: str
    candidate_mode: str
    per_loop_percent: tuple[float, ...]
    baseline_total_iae: float
    candidate_total_iae: float

    @computed_field
    @property
    def total_percent(self) -> float:
        return _improvement(self.baseline_total_iae, self.candidate_total_iae)


def _improvement(baseline: float, candidate: float) -> float:
    if baseline == 0:
        return 0.0
    return 100.0 * (baseline - candidate) / baseline


def iae_improvement(baseline: SimulationResult, candidate: SimulationResult) -> ImprovementReport:
    """100 (IAE_base - IAE_cand) / IAE_base per loop and in total; 0 where the baseline is 0."""
    if baseline.n_loops != candidate.n_loops:
        raise ValueError(
            f"cannot compare runs with {baseline.n_loops} and {candidate.n_loops} loops"
        )
    return ImprovementReport(
        baseline_mode=str(baseline.mode),
        candidate_mode=str(candidate.mode),
        per_loop_percent=tuple(
            _improvement(b.iae, c.iae) for b, c in zip(baseline.summary.loops, candidate.summary.loops)
        ),
        baseline_total_iae=baseline.total_iae,
        candidate_total_iae=candidate.total_iae,
    )

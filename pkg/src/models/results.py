"""
Result Records

What a run produces: the state timeseries, the scheduler trace and the
summary metrics. Priorities in the timeseries and the CSV files use the
display encoding N + 1 - level (1 = highest priority).
"""
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from pydantic import Field, computed_field

from src.models.base import SimBaseModel
from src.models.scenario import SchedulingMode

TIMESERIES_FIELDS = ("r", "y", "u", "h", "prio")


def display_priority(level: int, n_loops: int) -> int:
    """Convert an arbitration level (greater wins) to the plotted value (1 = highest)."""
    return n_loops + 1 - level


def timeseries_columns(n_loops: int) -> tuple[str, ...]:
    columns = ["time_s"]
    for i in range(1, n_loops + 1):
        columns += [f"r_{i}", f"y_{i}", f"u_{i}", f"h_{i}_ms", f"prio_{i}"]
    return tuple(columns)


@dataclass(frozen=True, slots=True)
class LogRow:
    time_s: float
    references: tuple[float, ...]
    outputs: tuple[float, ...]
    inputs: tuple[float, ...]
    periods_ms: tuple[float, ...]
    priorities: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class SchedulerRow:
    """
    One feedback-scheduler invocation.

    Attributes:
        time_s: Invocation instant (a multiple of T_FS)
        miss_ratio: Measured rho of the closing window
        err: Deadzone error fed to the PI controller
        utilization: Utilization command after the update
        costs: J per loop
        weighted_costs: J' per loop
        periods_s: Allocated periods
        priority_levels: Assigned levels (greater wins)
    """
    time_s: float
    miss_ratio: float
    err: float
    utilization: float
    costs: tuple[float, ...]
    weighted_costs: tuple[float, ...]
    periods_s: tuple[float, ...]
    priority_levels: tuple[int, ...]

    @property
    def display_priorities(self) -> tuple[int, ...]:
        n = len(self.priority_levels)
        return tuple(display_priority(level, n) for level in self.priority_levels)


class WindowRecord(SimBaseModel):
    index: int = Field(..., ge=1, description="Window j covers deadlines in ((j-1) T_FS, j T_FS]")
    generated: int = 0
    missed: int = 0

    @computed_field
    @property
    def miss_ratio(self) -> float:
        return self.missed / self.generated if self.generated else 0.0


class LoopSummary(SimBaseModel):
    loop: int = Field(..., ge=1, description="1-based loop index")
    iae: float = 0.0
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    discarded: int = 0
    in_flight: int = 0
    deadline_misses: int = 0
    mean_delay_ms: float = 0.0
    max_delay_ms: float = 0.0


class MetricsSummary(SimBaseModel):
    loops: tuple[LoopSummary, ...] = ()
    windows: tuple[WindowRecord, ...] = ()
    mean_requested_utilization: float = 0.0
    final_half_requested_utilization: float = 0.0
    bus_busy_fraction: float = 0.0
    run_miss_ratio: float = 0.0
    final_window_miss_ratio: float = 0.0

    @computed_field
    @property
    def total_iae(self) -> float:
        return sum(loop.iae for loop in self.loops)


@dataclass
class SimulationResult:
    """
    Output of one run.

    The timeseries is an array with one row per log tick and the columns
    named in ``columns`` (see timeseries_columns).
    """
    scenario: str
    mode: SchedulingMode
    n_loops: int
    columns: tuple[str, ...]
    timeseries: np.ndarray
    scheduler_trace: list[SchedulerRow] = field(default_factory=list)
    summary: MetricsSummary = field(default_factory=MetricsSummary)
    utilization_trace: Optional[np.ndarray] = None

    def column(self, name: str) -> np.ndarray:
        try:
            index = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no timeseries column {name!r}; have {list(self.columns)}") from None
        return self.timeseries[:, index]

    @property
    def times(self) -> np.ndarray:
        return self.timeseries[:, 0]

    def loop_iae(self, loop: int) -> float:
        """IAE of a loop, 1-based."""
        return self.summary.loops[loop - 1].iae

    @property
    def total_iae(self) -> float:
        return self.summary.total_iae

    def rows(self) -> Iterator[LogRow]:
        n = self.n_loops
        for row in self.timeseries:
            per_loop = row[1:].reshape(n, len(TIMESERIES_FIELDS)) if n else np.empty((0, 5))
            yield LogRow(
                time_s=float(row[0]),
                references=tuple(float(v) for v in per_loop[:, 0]),
                outputs=tuple(float(v) for v in per_loop[:, 1]),
                inputs=tuple(float(v) for v in per_loop[:, 2]),
                periods_ms=tuple(float(v) for v in per_loop[:, 3]),
                priorities=tuple(int(v) for v in per_loop[:, 4]),
            )

"""
Rate-Monotonic Schedulability

Sufficient utilization-bound test for non-preemptive fixed-priority frames
with blocking: for every RM level i,

    sum_{k<=i} c_k / h_k + b_i / h_i <= i (2^(1/i) - 1),   b_i = max_{n>i} c_n

A False verdict does not prove the set unschedulable.
"""
from dataclasses import dataclass
from typing import Sequence

BOUND_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TaskSetSpec:
    """Per-loop frame times and periods, in seconds, in loop order."""
    transmission_times: tuple[float, ...]
    periods: tuple[float, ...]

    def __post_init__(self):
        if len(self.transmission_times) != len(self.periods):
            raise ValueError("transmission_times and periods must have equal length")
        if any(c <= 0 for c in self.transmission_times) or any(h <= 0 for h in self.periods):
            raise ValueError("transmission times and periods must be positive")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "TaskSetSpec":
        return cls(tuple(c for c, _ in pairs), tuple(h for _, h in pairs))

    def rm_order(self) -> list[int]:
        """Loop indices by rate-monotonic priority: shorter period first, ties by index."""
        return sorted(range(len(self.periods)), key=lambda i: (self.periods[i], i))


@dataclass(frozen=True)
class LevelCheck:
    level: int
    loop: int
    utilization: float
    blocking: float
    lhs: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound + BOUND_TOLERANCE


def liu_layland_bound(i: int) -> float:
    return i * (2 ** (1 / i) - 1)


def rm_schedulability_report(spec: TaskSetSpec) -> list[LevelCheck]:
    """One check per RM level, highest priority first."""
    order = spec.rm_order()
    checks = []
    cumulative = 0.0
    for level, loop in enumerate(order, start=1):
        c, h = spec.transmission_times[loop], spec.periods[loop]
        cumulative += c / h
        lower = order[level:]
        blocking = max((spec.transmission_times[k] for k in lower), default=0.0)
        checks.append(LevelCheck(
            level=level,
            loop=loop,
            utilization=cumulative,
            blocking=blocking,
            lhs=cumulative + blocking / h,
            bound=liu_layland_bound(level),
        ))
    return checks


def rm_schedulable(spec: TaskSetSpec) -> bool:
    return all(check.holds for check in rm_schedulability_report(spec))

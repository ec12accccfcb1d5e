"""
Feedback Scheduler

Runtime bandwidth and priority management for control loops sharing the bus.

Every T_FS the integrated scheduler:
1. turns the measured deadline miss ratio into a deadzone error
2. updates the total utilization command with a clamped PI law
3. reads each loop's control cost from its latest delivered error
4. splits the free bandwidth by cost into sampling periods
5. reassigns priority levels by weighted cost (skipped in period-only mode)

The fixed-period scheduler is the baseline: nothing ever changes.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

from src.core.errors import SimulationError
from src.models.results import SchedulerRow
from src.models.scenario import ScenarioConfig, SchedulerParams, SchedulingMode
from src.services.priority_modification import modify_priorities
from src.utils.observability import log_scheduler_invocation

BUDGET_TOLERANCE = 1e-12


class AllocationError(SimulationError):
    """Utilization command below the minimum the loops need at h_max."""
    pass


@dataclass
class SchedulerState:
    """
    Attributes:
        utilization: Total utilization command U, within [u_floor, 1]
        u_floor: Sum of c_i / h_max
        periods: Current per-loop periods (s)
        priorities: Current per-loop levels (greater wins)
        err_prev: ERR of the previous invocation
        costs: Latest J per loop
        weighted_costs: Latest J' per loop
    """
    utilization: float
    u_floor: float
    periods: tuple[float, ...]
    priorities: tuple[int, ...]
    err_prev: float = 0.0
    costs: tuple[float, ...] = ()
    weighted_costs: tuple[float, ...] = ()
    invocations: int = 0

    @classmethod
    def initial(
        cls,
        transmission_times: Sequence[float],
        periods: Sequence[float],
        priorities: Sequence[int],
        params: SchedulerParams,
    ) -> "SchedulerState":
        """Start from the configured operating point, clamped into [u_floor, 1]."""
        u_floor = sum(c / params.h_max_s for c in transmission_times)
        requested = sum(c / h for c, h in zip(transmission_times, periods))
        n = len(periods)
        return cls(
            utilization=min(1.0, max(u_floor, requested)),
            u_floor=u_floor,
            periods=tuple(periods),
            priorities=tuple(priorities),
            costs=(0.0,) * n,
            weighted_costs=(0.0,) * n,
        )


def compute_err(rho: float, rho_r: float) -> float:
    """
    Deadzone error on the miss ratio.

    rho == 0 gives +rho_r (bandwidth is being wasted), rho in (0, rho_r] gives 0,
    rho above the setpoint gives -rho.
    """
    if rho == 0:
        return rho_r
    if rho <= rho_r:
        return 0.0
    return -rho


def update_utilization(state: SchedulerState, err: float, params: SchedulerParams) -> float:
    """
    U += K_P (ERR - ERR_prev) + K_I ERR, clamped to [u_floor, 1].

    Excess beyond the clamp is discarded; ERR_prev is updated either way.
    """
    delta_u = params.k_p * (err - state.err_prev) + params.k_i * err
    state.utilization = min(1.0, max(state.u_floor, state.utilization + delta_u))
    state.err_prev = err
    return state.utilization


def loop_costs(errors: Sequence[float], weights: Sequence[float]) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """J_i = |e_i| and J'_i = w_i J_i."""
    costs = tuple(abs(e) for e in errors)
    return costs, tuple(w * j for w, j in zip(weights, costs))


def allocate_periods(
    utilization: float,
    costs: Sequence[float],
    params: SchedulerParams,
    transmission_times: Sequence[float],
    weights: Optional[Sequence[float]] = None,
) -> tuple[float, ...]:
    """
    Split the utilization command into sampling periods.

    Each loop keeps c_i / h_max and receives a share of the free bandwidth
    U - u_floor: proportional to w_i J_i, or an even split when the weighted
    costs sum below epsilon (or to zero). A loop with zero share runs at h_max.
    Periods are then clamped into [h_min, h_max].

    Raises:
        AllocationError: utilization below u_floor
    """
    n = len(transmission_times)
    if n == 0:
        return ()
    weights = weights if weights is not None else (1.0,) * n

    u_floor = sum(c / params.h_max_s for c in transmission_times)
    if utilization < u_floor - BUDGET_TOLERANCE:
        raise AllocationError(f"utilization {utilization:.6f} below the h_max floor {u_floor:.6f}")
    free = max(0.0, utilization - u_floor)

    weighted = [w * j for w, j in zip(weights, costs)]
    total = sum(weighted)
    even_split = total < params.epsilon or total <= 0

    periods = []
    for c, share_weight in zip(transmission_times, weighted):
        share = 1.0 / n if even_split else share_weight / total
        if share == 0:
            h = params.h_max_s
        else:
            h = c / (c / params.h_max_s + free * share)
        periods.append(min(params.h_max_s, max(params.period_floor(c), h)))
    return tuple(periods)


def ifs_invoke(
    miss_ratio: float,
    loop_errors: Sequence[float],
    state: SchedulerState,
    params: SchedulerParams,
    transmission_times: Sequence[float],
    weights: Sequence[float],
    modify_priority: bool = True,
) -> tuple[tuple[float, ...], tuple[int, ...]]:
    """
    One scheduler step. Updates state in place.

    Returns:
        (periods, priority levels)
    """
    err = compute_err(miss_ratio, params.rho_r)
    utilization = update_utilization(state, err, params)
    costs, weighted_costs = loop_costs(loop_errors, weights)
    periods = allocate_periods(utilization, costs, params, transmission_times, weights)
    if modify_priority:
        priorities = modify_priorities(weighted_costs, state.priorities, params.delta)
    else:
        priorities = state.priorities

    state.costs = costs
    state.weighted_costs = weighted_costs
    state.periods = periods
    state.priorities = priorities
    state.invocations += 1
    return periods, priorities


class FeedbackScheduler(ABC):
    """Decides loop periods and priorities at scheduler invocation instants."""

    mode: SchedulingMode

    def __init__(self, state: SchedulerState, params: SchedulerParams):
        self.state = state
        self.params = params

    @property
    @abstractmethod
    def invokes_periodically(self) -> bool:
        """Whether the engine should schedule an invocation every T_FS."""
        pass

    def admit(self, loop_errors: Sequence[float]) -> Optional[tuple[float, ...]]:
        """Periods to start the run with, or None to keep the configured ones."""
        return None

    @abstractmethod
    def invoke(self, time: float, miss_ratio: float, loop_errors: Sequence[float]) -> Optional[SchedulerRow]:
        """
        Run one scheduling step.

        Args:
            time: Invocation instant
            miss_ratio: rho of the window that just closed
            loop_errors: e_i of each loop's latest delivered sample

        Returns:
            The trace row, or None if the scheduler took no decision
        """
        pass


class IntegratedFeedbackScheduler(FeedbackScheduler):
    """
    Period adjustment plus, unless disabled, direct priority modification.

    Usage:
        scheduler = build_scheduler(config)
        row = scheduler.invoke(time, miss_ratio, errors)
        for loop, h in zip(loops, row.periods_s): ...
    """

    def __init__(
        self,
        state: SchedulerState,
        params: SchedulerParams,
        transmission_times: Sequence[float],
        weights: Sequence[float],
        modify_priority: bool = True,
    ):
        super().__init__(state, params)
        self.transmission_times = tuple(transmission_times)
        self.weights = tuple(weights)
        self.modify_priority = modify_priority
        self.mode = SchedulingMode.IFS if modify_priority else SchedulingMode.PERIOD_ONLY

    @property
    def invokes_periodically(self) -> bool:
        return True

    def admit(self, loop_errors: Sequence[float]) -> Optional[tuple[float, ...]]:
        """
        Re-split the starting budget when the configured periods request more
        than U(0), so the run starts within the utilization command.
        """
        state = self.state
        requested = sum(c / h for c, h in zip(self.transmission_times, state.periods))
        if requested <= state.utilization + BUDGET_TOLERANCE:
            return None
        costs, _ = loop_costs(loop_errors, self.weights)
        state.periods = allocate_periods(
            state.utilization, costs, self.params, self.transmission_times, self.weights
        )
        return state.periods

    def invoke(self, time: float, miss_ratio: float, loop_errors: Sequence[float]) -> SchedulerRow:
        err = compute_err(miss_ratio, self.params.rho_r)
        periods, priorities = ifs_invoke(
            miss_ratio,
            loop_errors,
            self.state,
            self.params,
            self.transmission_times,
            self.weights,
            modify_priority=self.modify_priority,
        )
        log_scheduler_invocation(time, miss_ratio, err, self.state.utilization, periods, priorities)
        return SchedulerRow(
            time_s=time,
            miss_ratio=miss_ratio,
            err=err,
            utilization=self.state.utilization,
            costs=self.state.costs,
            weighted_costs=self.state.weighted_costs,
            periods_s=periods,
            priority_levels=priorities,
        )


class FixedPeriodScheduler(FeedbackScheduler):
    """Baseline: configured periods and priorities for the whole run."""

    mode = SchedulingMode.NON_FS

    @property
    def invokes_periodically(self) -> bool:
        return False

    def invoke(self, time: float, miss_ratio: float, loop_errors: Sequence[float]) -> None:
        return None


def build_scheduler(config: ScenarioConfig) -> FeedbackScheduler:
    """Scheduler for a scenario's mode, starting from its initial periods and priorities."""
    state = SchedulerState.initial(
        config.transmission_times,
        config.initial_periods,
        [loop.priority for loop in config.loops],
        config.scheduler,
    )
    if config.mode == SchedulingMode.NON_FS:
        return FixedPeriodScheduler(state, config.scheduler)
    return IntegratedFeedbackScheduler(
        state,
        config.scheduler,
        config.transmission_times,
        [loop.weight for loop in config.loops],
        modify_priority=config.mode == SchedulingMode.IFS,
    )

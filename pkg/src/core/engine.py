"""
Simulation Engine

Discrete-event co-simulation of control loops closed over the shared bus.

Sensors are time-triggered (one sample per current period); controllers and
actuators are event-triggered by packet delivery with zero processing time.
The feedback scheduler runs every T_FS unless the mode keeps periods fixed.
It may also re-split an overloaded initial period set before the first sample.
Plants are propagated exactly between events under zero-order hold.

Same-instant events run in the order: transmission completions, sensor
samples, scheduler invocations, reference toggles, log ticks.
"""
import itertools
import math
import time as wallclock
from typing import Optional

import numpy as np

from src.control.loop import LoopRuntime
from src.control.plant import NumericalBlowUpError
from src.control.reference import toggle_time
from src.core.event_calendar import Event, EventCalendar, EventKind, quantize
from src.models.results import (
    SchedulerRow,
    SimulationResult,
    TIMESERIES_FIELDS,
    display_priority,
    timeseries_columns,
)
from src.models.scenario import ScenarioConfig
from src.network.base import PacketState, SamplePacket
from src.network.priority_bus import PriorityArbitratedBus
from src.services.feedback_scheduler import FeedbackScheduler, build_scheduler
from src.utils.metrics import MetricsRecord, requested_utilization
from src.utils.observability import log_simulation_event

TICK_EPSILON = 1e-9


class SimulationEngine:
    """
    One simulation instance. Owns all of its state and runs single-threaded;
    separate instances share nothing and can run in parallel.

    Usage:
        result = SimulationEngine(config).run()
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.calendar = EventCalendar()
        self.metrics = MetricsRecord(config.n_loops, config.scheduler.t_fs_s)
        self.bus = PriorityArbitratedBus(observer=self.metrics)
        self.scheduler: FeedbackScheduler = build_scheduler(config)

        transmission_times = config.transmission_times
        self.loops = [
            LoopRuntime(i, loop, transmission_times[i], config.scheduler.period_floor(transmission_times[i]))
            for i, loop in enumerate(config.loops)
        ]

        self._packet_ids = itertools.count()
        self._completion_events: dict[int, int] = {}
        self._trace: list[SchedulerRow] = []
        self._window = 0

        self._n_ticks = math.floor(config.duration_s / config.log_grid_s + TICK_EPSILON) + 1
        self._columns = timeseries_columns(config.n_loops)
        self._timeseries = np.zeros((self._n_ticks, len(self._columns)))
        self._tick = 0
        self._last_tick_time: Optional[float] = None
        self._events_processed = 0

    # ------------------------------------------------------------------
    # Run loop
    # ------------------------------------------------------------------

    def run(self) -> SimulationResult:
        config = self.config
        started = wallclock.perf_counter()
        log_simulation_event(
            "run_started",
            scenario=config.name,
            mode=str(config.mode),
            loops=config.n_loops,
            duration_s=config.duration_s,
        )

        self._schedule_initial_events()
        try:
            while True:
                next_time = self.calendar.peek_time()
                if next_time is None or next_time > config.duration_s:
                    break
                self._dispatch(self.calendar.pop_next())
                self._events_processed += 1
        except NumericalBlowUpError as e:
            log_simulation_event(
                "numerical_abort",
                scenario=config.name,
                mode=str(config.mode),
                loop=e.loop_id + 1,
                time_s=e.time,
            )
            raise

        result = self._finish()
        log_simulation_event(
            "run_finished",
            scenario=config.name,
            mode=str(config.mode),
            events=self._events_processed,
            total_iae=round(result.total_iae, 6),
            wall_ms=round((wallclock.perf_counter() - started) * 1000, 1),
        )
        return result

    def _schedule_initial_events(self) -> None:
        admitted = self.scheduler.admit([loop.e_last for loop in self.loops])
        if admitted is not None:
            for loop, h in zip(self.loops, admitted):
                self._redesign(loop, h, 0.0)

        for loop in self.loops:
            self._schedule_sample(loop, 0.0)
            self.calendar.schedule_event(
                quantize(toggle_time(1, loop.config.reference.period_s)),
                EventKind.REFERENCE_TOGGLE,
                loop_id=loop.loop_id,
            )
        if self.scheduler.invokes_periodically:
            self.calendar.schedule_event(quantize(self.config.scheduler.t_fs_s), EventKind.SCHEDULER_INVOKE)
        self.calendar.schedule_event(0.0, EventKind.LOG_TICK)

    def _dispatch(self, event: Event) -> None:
        if event.kind == EventKind.TRANSMISSION_COMPLETE:
            self._on_transmission_complete(event)
        elif event.kind == EventKind.SENSOR_SAMPLE:
            self._on_sensor_sample(event)
        elif event.kind == EventKind.SCHEDULER_INVOKE:
            self._on_scheduler_invoke(event)
        elif event.kind == EventKind.REFERENCE_TOGGLE:
            self._on_reference_toggle(event)
        else:
            self._on_log_tick(event)

    # ------------------------------------------------------------------
    # Event handlers
    # ------------------------------------------------------------------

    def _on_transmission_complete(self, event: Event) -> None:
        t = event.time
        self._completion_events.pop(event.packet_id, None)
        packet = self.bus.complete(event.packet_id, t)
        if packet.state == PacketState.DELIVERED:
            self.loops[packet.loop_id].apply_sample(packet, t)
        self._start_transmission(self.bus.arbitrate(t))

    def _on_sensor_sample(self, event: Event) -> None:
        t = event.time
        loop = self.loops[event.loop_id]
        loop.advance_to(t)
        loop.next_sample_event = None
        loop.next_sample_time = None
        loop.reference_at(t)

        self.bus.supersede_or_drop(loop.loop_id, t)
        packet = SamplePacket(
            packet_id=next(self._packet_ids),
            loop_id=loop.loop_id,
            priority=loop.priority,
            release_time=t,
            deadline=quantize(t + loop.h),
            transmission_time=loop.transmission_time,
            state_sample=loop.x,
            reference=loop.reference,
        )
        self.metrics.record_generated(loop.loop_id)
        transition = self.bus.submit(packet, t)
        if transition.displaced is not None:
            self.calendar.cancel(self._completion_events.pop(transition.displaced.packet_id))
        self._start_transmission(transition.started)

        loop.last_sample_time = t
        self._schedule_sample(loop, quantize(t + loop.h))

    def _on_scheduler_invoke(self, event: Event) -> None:
        t = event.time
        self._window += 1
        self.bus.expire_overdue(t)
        miss_ratio = self.metrics.miss_ratio(self._window)
        row = self.scheduler.invoke(t, miss_ratio, [loop.e_last for loop in self.loops])

        if row is not None:
            self._trace.append(row)
            for loop, h, level in zip(self.loops, row.periods_s, row.priority_levels):
                loop.priority = level
                if self._redesign(loop, h, t):
                    self._reschedule_sample(loop, t)

        self.calendar.schedule_event(
            quantize((self._window + 1) * self.config.scheduler.t_fs_s),
            EventKind.SCHEDULER_INVOKE,
        )

    def _on_reference_toggle(self, event: Event) -> None:
        loop = self.loops[event.loop_id]
        loop.toggle_reference(event.time)
        self.calendar.schedule_event(
            quantize(toggle_time(loop.toggles + 1, loop.config.reference.period_s)),
            EventKind.REFERENCE_TOGGLE,
            loop_id=loop.loop_id,
        )

    def _on_log_tick(self, event: Event) -> None:
        t = event.time
        dt = 0.0 if self._last_tick_time is None else t - self._last_tick_time
        n = len(self.loops)
        row = self._timeseries[self._tick]
        row[0] = t
        for loop in self.loops:
            loop.advance_to(t)
            y = loop.output
            self.metrics.iae_step(loop.loop_id, abs(loop.reference - y), dt)
            offset = 1 + loop.loop_id * len(TIMESERIES_FIELDS)
            row[offset:offset + 5] = (
                loop.reference,
                y,
                loop.u,
                loop.h * 1000,
                display_priority(loop.priority, n),
            )
        self.metrics.record_utilization(
            t, requested_utilization([loop.h for loop in self.loops], [loop.transmission_time for loop in self.loops])
        )

        self._last_tick_time = t
        self._tick += 1
        if self._tick < self._n_ticks:
            self.calendar.schedule_event(quantize(self._tick * self.config.log_grid_s), EventKind.LOG_TICK)

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _start_transmission(self, packet: Optional[SamplePacket]) -> None:
        if packet is None:
            return
        completion = quantize(packet.started_at + packet.transmission_time)
        self._completion_events[packet.packet_id] = self.calendar.schedule_event(
            completion, EventKind.TRANSMISSION_COMPLETE, packet_id=packet.packet_id
        )

    def _redesign(self, loop: LoopRuntime, h: float, t: float) -> bool:
        if not loop.set_period(h):
            return False
        log_simulation_event(
            "period_redesign",
            scenario=self.config.name,
            loop=loop.loop_id + 1,
            time_s=t,
            h_ms=round(h * 1000, 6),
        )
        return True

    def _schedule_sample(self, loop: LoopRuntime, t: float) -> None:
        loop.next_sample_time = t
        loop.next_sample_event = self.calendar.schedule_event(t, EventKind.SENSOR_SAMPLE, loop_id=loop.loop_id)

    def _reschedule_sample(self, loop: LoopRuntime, now: float) -> None:
        """Move the pending sample to last sample + new period, never before now."""
        target = quantize(max(now, loop.last_sample_time + loop.h))
        if target == loop.next_sample_time:
            return
        if loop.next_sample_event is not None:
            self.calendar.cancel(loop.next_sample_event)
        self._schedule_sample(loop, target)

    def _finish(self) -> SimulationResult:
        duration = self.config.duration_s
        self.bus.expire_overdue(duration)

        in_flight = [0] * len(self.loops)
        for packet in self.bus.pending_packets():
            in_flight[packet.loop_id] += 1
        if self.bus.current is not None:
            in_flight[self.bus.current.loop_id] += 1

        summary = self.metrics.snapshot(duration, self.bus.busy_time(duration), in_flight)
        return SimulationResult(
            scenario=self.config.name,
            mode=self.config.mode,
            n_loops=self.config.n_loops,
            columns=self._columns,
            timeseries=self._timeseries[:self._tick],
            scheduler_trace=self._trace,
            summary=summary,
            utilization_trace=self.metrics.utilization_trace(),
        )


def run(config: ScenarioConfig) -> SimulationResult:
    """Simulate [0, config.duration_s] and return the collected result."""
    return SimulationEngine(config).run()

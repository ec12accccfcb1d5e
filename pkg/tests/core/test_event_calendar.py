"""
Tests for the Event Calendar

Validates deterministic ordering, causality checks and cancellation.
"""

import math

import pytest

from src.core.event_calendar import CausalityError, EventCalendar, EventKind, quantize


class TestScheduling:
    """Tests for schedule_event / pop_next."""

    @pytest.fixture
    def calendar(self):
        return EventCalendar()

    def test_empty_calendar_pops_none(self, calendar):
        assert calendar.pop_next() is None
        assert len(calendar) == 0

    def test_single_event_round_trip(self, calendar):
        calendar.schedule_event(0.01, EventKind.LOG_TICK)

        event = calendar.pop_next()

        assert event.time == 0.01
        assert event.kind == EventKind.LOG_TICK
        assert calendar.now == 0.01

    def test_earlier_time_pops_first(self, calendar):
        calendar.schedule_event(2.0, EventKind.LOG_TICK)
        calendar.schedule_event(1.0, EventKind.LOG_TICK)

        assert calendar.pop_next().time == 1.0
        assert calendar.pop_next().time == 2.0

    def test_transmission_complete_precedes_sensor_sample(self, calendar):
        calendar.schedule_event(0.5, EventKind.SENSOR_SAMPLE, loop_id=0)
        calendar.schedule_event(0.5, EventKind.TRANSMISSION_COMPLETE, packet_id=7)

        first = calendar.pop_next()

        assert first.kind == EventKind.TRANSMISSION_COMPLETE
        assert first.packet_id == 7

    def test_same_kind_same_time_uses_insertion_order(self, calendar):
        calendar.schedule_event(0.5, EventKind.SENSOR_SAMPLE, loop_id=2)
        calendar.schedule_event(0.5, EventKind.SENSOR_SAMPLE, loop_id=1)

        assert calendar.pop_next().loop_id == 2
        assert calendar.pop_next().loop_id == 1

    def test_full_precedence_order(self, calendar):
        for kind in reversed(list(EventKind)):
            calendar.schedule_event(1.0, kind)

        kinds = [calendar.pop_next().kind for _ in range(len(EventKind))]

        assert kinds == [
            EventKind.TRANSMISSION_COMPLETE,
            EventKind.SENSOR_SAMPLE,
            EventKind.SCHEDULER_INVOKE,
            EventKind.REFERENCE_TOGGLE,
            EventKind.LOG_TICK,
        ]

    def test_event_ids_are_unique(self, calendar):
        ids = {calendar.schedule_event(0.1, EventKind.LOG_TICK) for _ in range(50)}
        assert len(ids) == 50

    def test_scheduling_at_current_time_is_allowed(self, calendar):
        calendar.schedule_event(1.0, EventKind.SCHEDULER_INVOKE)
        calendar.pop_next()

        calendar.schedule_event(1.0, EventKind.SENSOR_SAMPLE, loop_id=0)

        assert calendar.pop_next().kind == EventKind.SENSOR_SAMPLE


class TestCausality:
    """Tests for rejected event times."""

    def test_event_before_clock_rejected(self):
        calendar = EventCalendar()
        calendar.schedule_event(1.0, EventKind.LOG_TICK)
        calendar.pop_next()

        with pytest.raises(CausalityError):
            calendar.schedule_event(1.0 - 1e-6, EventKind.LOG_TICK)

    @pytest.mark.parametrize("time", [-0.1, math.inf, math.nan])
    def test_invalid_times_rejected(self, time):
        with pytest.raises(CausalityError):
            EventCalendar().schedule_event(time, EventKind.LOG_TICK)

    def test_clock_never_moves_backwards(self):
        calendar = EventCalendar()
        for t in (0.3, 0.1, 0.2, 0.1, 0.0):
            calendar.schedule_event(t, EventKind.LOG_TICK)

        times = []
        while (event := calendar.pop_next()) is not None:
            times.append(event.time)

        assert times == sorted(times)


class TestCancellation:
    """Tests for lazy cancellation."""

    def test_cancelled_event_is_skipped(self):
        calendar = EventCalendar()
        cancelled = calendar.schedule_event(0.1, EventKind.SENSOR_SAMPLE, loop_id=0)
        calendar.schedule_event(0.2, EventKind.SENSOR_SAMPLE, loop_id=1)

        assert calendar.cancel(cancelled) is True
        assert len(calendar) == 1
        assert calendar.peek_time() == 0.2
        assert calendar.pop_next().loop_id == 1
        assert calendar.pop_next() is None

    def test_cancel_twice_or_after_firing(self):
        calendar = EventCalendar()
        fired = calendar.schedule_event(0.1, EventKind.LOG_TICK)
        calendar.pop_next()

        assert calendar.cancel(fired) is False


class TestQuantize:
    def test_float_paths_compare_equal(self):
        assert 0.1 + 0.2 != 0.3
        assert quantize(0.1 + 0.2) == quantize(0.3)

    def test_calendar_quantizes_times(self):
        calendar = EventCalendar()
        calendar.schedule_event(0.1 + 0.2, EventKind.LOG_TICK)
        assert calendar.pop_next().time == quantize(0.3)

"""
Event Calendar

Deterministic future-event list for the discrete-event kernel.

Events are totally ordered by (time, kind precedence, insertion sequence).
Cancelled events are deleted lazily when they reach the top of the heap.
"""
import heapq
import itertools
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from src.config import get_settings
from src.core.errors import SimulationError


class CausalityError(SimulationError):
    """An event was scheduled before the current simulation clock."""
    pass


class EventKind(IntEnum):
    """Event kinds; the integer value is the same-instant precedence (lower pops first)."""
    TRANSMISSION_COMPLETE = 0
    SENSOR_SAMPLE = 1
    SCHEDULER_INVOKE = 2
    REFERENCE_TOGGLE = 3
    LOG_TICK = 4


@dataclass(frozen=True, slots=True)
class Event:
    time: float
    kind: EventKind
    sequence: int
    loop_id: Optional[int] = None
    packet_id: Optional[int] = None

    @property
    def sort_key(self) -> tuple[float, int, int]:
        return (self.time, int(self.kind), self.sequence)


def quantize(time: float, decimals: Optional[int] = None) -> float:
    """Round a simulation instant so instants reached along different float paths compare equal."""
    return round(time, get_settings().time_decimals if decimals is None else decimals)


class EventCalendar:
    """
    Future-event list with a monotone clock.

    The clock advances to each popped event's time. Scheduling before the
    clock raises CausalityError.
    """

    def __init__(self, decimals: Optional[int] = None):
        self._decimals = get_settings().time_decimals if decimals is None else decimals
        self._heap: list[tuple[float, int, int, Event]] = []
        self._sequence = itertools.count()
        self._pending: set[int] = set()
        self._now = 0.0

    @property
    def now(self) -> float:
        return self._now

    def __len__(self) -> int:
        return len(self._pending)

    def schedule_event(
        self,
        time: float,
        kind: EventKind,
        *,
        loop_id: Optional[int] = None,
        packet_id: Optional[int] = None,
    ) -> int:
        """
        Insert an event and return its id (the insertion sequence number).

        Raises:
            CausalityError: time is negative, non-finite, or earlier than the clock
        """
        if not math.isfinite(time) or time < 0:
            raise CausalityError(f"event time must be finite and non-negative, got {time!r} ({kind.name})")
        time = round(time, self._decimals)
        if time < self._now:
            raise CausalityError(
                f"{kind.name} scheduled at t={time!r} before current clock t={self._now!r}"
            )

        sequence = next(self._sequence)
        event = Event(time=time, kind=kind, sequence=sequence, loop_id=loop_id, packet_id=packet_id)
        heapq.heappush(self._heap, (time, int(kind), sequence, event))
        self._pending.add(sequence)
        return sequence

    def cancel(self, event_id: int) -> bool:
        """Cancel a pending event. Returns False if it already fired or was cancelled."""
        if event_id in self._pending:
            self._pending.discard(event_id)
            return True
        return False

    def peek_time(self) -> Optional[float]:
        self._discard_cancelled()
        return self._heap[0][0] if self._heap else None

    def pop_next(self) -> Optional[Event]:
        """Remove and return the least pending event, advancing the clock to its time."""
        self._discard_cancelled()
        if not self._heap:
            return None
        _, _, sequence, event = heapq.heappop(self._heap)
        self._pending.discard(sequence)
        self._now = event.time
        return event

    def _discard_cancelled(self) -> None:
        while self._heap and self._heap[0][2] not in self._pending:
            heapq.heappop(self._heap)

"""
Priority-Arbitrated Bus

CAN-style shared medium: non-preemptive, highest priority level wins whenever
the medium goes idle, fixed per-loop frame time, no transmission errors.

Deadline accounting (d = h):
- a queued packet whose deadline passes, or that a fresher sample replaces, is dropped
- a transmitting packet always finishes, but is discarded if it completes after its
  deadline or was replaced by a fresher sample meanwhile
- frames that become ready at the same instant contend together, so a frame released
  at the instant a lower-priority frame started takes the medium from it
"""

from typing import Optional

from src.core.event_calendar import quantize
from src.network.base import (
    BusInvariantError,
    BusMetrics,
    BusTransition,
    ControlNetwork,
    PacketObserver,
    PacketOutcome,
    PacketState,
    SamplePacket,
    SupersedeOutcome,
)


def _arbitration_key(packet: SamplePacket) -> tuple[int, float, int]:
    # Levels can coincide right after a priority change (old frame vs new frame);
    # the older frame wins then.
    return (packet.priority, -packet.release_time, -packet.packet_id)


class PriorityArbitratedBus(ControlNetwork):
    """
    Single-medium priority bus owned by one simulation instance.

    Not thread-safe; a run drives it from one thread.
    """

    def __init__(self, observer: Optional[PacketObserver] = None):
        self._observer = observer
        self._pending: dict[int, SamplePacket] = {}
        self._live_by_loop: dict[int, SamplePacket] = {}
        self._current: Optional[SamplePacket] = None
        self._busy_time = 0.0
        self._delivered = 0
        self._dropped = 0
        self._discarded = 0

    @property
    def current(self) -> Optional[SamplePacket]:
        return self._current

    @property
    def is_idle(self) -> bool:
        return self._current is None

    @property
    def busy_until(self) -> Optional[float]:
        if self._current is None:
            return None
        return quantize(self._current.started_at + self._current.transmission_time)

    def pending_packets(self) -> list[SamplePacket]:
        return sorted(self._pending.values(), key=_arbitration_key, reverse=True)

    def live_packet(self, loop_id: int) -> Optional[SamplePacket]:
        return self._live_by_loop.get(loop_id)

    # ------------------------------------------------------------------
    # Protocol
    # ------------------------------------------------------------------

    def submit(self, packet: SamplePacket, time: float) -> BusTransition:
        if packet.loop_id in self._live_by_loop:
            raise BusInvariantError(
                f"loop {packet.loop_id} already has live packet "
                f"{self._live_by_loop[packet.loop_id].packet_id} at t={time}"
            )
        if packet.release_time != time:
            raise BusInvariantError(
                f"packet {packet.packet_id} released at {packet.release_time} submitted at {time}"
            )

        packet.state = PacketState.QUEUED
        self._pending[packet.packet_id] = packet
        self._live_by_loop[packet.loop_id] = packet

        if self._current is None:
            return BusTransition(started=self.arbitrate(time))

        current = self._current
        if current.started_at == time and _arbitration_key(packet) > _arbitration_key(current):
            current.state = PacketState.QUEUED
            current.started_at = None
            self._pending[current.packet_id] = current
            self._current = None
            if current.superseded:
                self._drop(current, time)
            started = self.arbitrate(time)
            return BusTransition(started=started, displaced=current)

        return BusTransition()

    def arbitrate(self, time: float) -> Optional[SamplePacket]:
        if self._current is not None:
            raise BusInvariantError(
                f"arbitration at t={time} while packet {self._current.packet_id} is transmitting"
            )

        # A frame whose deadline has already arrived cannot complete in time.
        for packet in [p for p in self._pending.values() if p.deadline <= time]:
            self._drop(packet, time)

        if not self._pending:
            return None

        winner = max(self._pending.values(), key=_arbitration_key)
        del self._pending[winner.packet_id]
        winner.state = PacketState.TRANSMITTING
        winner.started_at = time
        self._current = winner
        return winner

    def complete(self, packet_id: int, time: float) -> SamplePacket:
        packet = self._current
        if packet is None or packet.packet_id != packet_id:
            raise BusInvariantError(
                f"completion of packet {packet_id} at t={time} but "
                f"{'nothing' if packet is None else packet.packet_id} is transmitting"
            )

        self._current = None
        self._busy_time += packet.transmission_time
        packet.completed_at = time
        if self._live_by_loop.get(packet.loop_id) is packet:
            del self._live_by_loop[packet.loop_id]

        if packet.superseded or packet.resolved or time > packet.deadline:
            packet.state = PacketState.DISCARDED
            self._discarded += 1
            self._resolve(packet, PacketOutcome.MISSED, time)
        else:
            packet.state = PacketState.DELIVERED
            self._delivered += 1
            self._resolve(packet, PacketOutcome.MET, time)
        self._terminate(packet, time)
        return packet

    def supersede_or_drop(self, loop_id: int, time: float) -> SupersedeOutcome:
        packet = self._live_by_loop.get(loop_id)
        if packet is None:
            return SupersedeOutcome.NO_LIVE_PACKET

        if packet.state == PacketState.QUEUED:
            self._drop(packet, time)
            return SupersedeOutcome.DROPPED

        # On the wire: the frame finishes, its payload is already stale.
        packet.superseded = True
        del self._live_by_loop[loop_id]
        self._resolve(packet, PacketOutcome.MISSED, time)
        return SupersedeOutcome.DISCARD_ON_COMPLETION

    def expire_overdue(self, time: float) -> int:
        resolved = 0
        for packet in [p for p in self._pending.values() if p.deadline <= time]:
            self._drop(packet, time)
            resolved += 1
        current = self._current
        if current is not None and not current.resolved and current.deadline <= time:
            self._resolve(current, PacketOutcome.MISSED, time)
            resolved += 1
        return resolved

    def get_metrics(self, time: float) -> BusMetrics:
        return BusMetrics(
            pending=len(self._pending),
            transmitting=0 if self._current is None else 1,
            delivered=self._delivered,
            dropped=self._dropped,
            discarded=self._discarded,
            busy_time_s=self.busy_time(time),
        )

    def busy_time(self, time: float) -> float:
        """Accumulated transmitting time up to ``time``, including the partial frame."""
        if self._current is None:
            return self._busy_time
        return self._busy_time + max(0.0, time - self._current.started_at)

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    def _drop(self, packet: SamplePacket, time: float) -> None:
        del self._pending[packet.packet_id]
        if self._live_by_loop.get(packet.loop_id) is packet:
            del self._live_by_loop[packet.loop_id]
        packet.state = PacketState.DROPPED
        self._dropped += 1
        self._resolve(packet, PacketOutcome.MISSED, time)
        self._terminate(packet, time)

    def _resolve(self, packet: SamplePacket, outcome: PacketOutcome, time: float) -> None:
        if packet.resolved:
            return
        packet.resolved = True
        if self._observer is not None:
            self._observer.on_resolved(packet, outcome, time)

    def _terminate(self, packet: SamplePacket, time: float) -> None:
        if self._observer is not None:
            self._observer.on_terminated(packet, time)

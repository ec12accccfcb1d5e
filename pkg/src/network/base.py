"""
Base Network Interface

Abstract interface for the shared control network carrying sensor samples,
plus the packet record and observer hooks used for deadline accounting.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import StrEnum
from typing import Optional

import numpy as np
from pydantic import BaseModel

from src.core.errors import SimulationError


class BusInvariantError(SimulationError):
    """The engine drove the bus into a state the protocol forbids."""
    pass


class PacketState(StrEnum):
    """Packet lifecycle."""
    QUEUED = "queued"
    TRANSMITTING = "transmitting"
    DELIVERED = "delivered"
    DROPPED = "dropped"        # removed while still queued
    DISCARDED = "discarded"    # finished transmitting but too late or superseded


class PacketOutcome(StrEnum):
    MET = "met"
    MISSED = "missed"


class SupersedeOutcome(StrEnum):
    NO_LIVE_PACKET = "no_live_packet"
    DROPPED = "dropped"
    DISCARD_ON_COMPLETION = "discard_on_completion"


@dataclass(slots=True, eq=False)
class SamplePacket:
    """
    One sensor sample travelling over the bus.

    Attributes:
        packet_id: Unique id within a run
        loop_id: Zero-based loop index
        priority: Arbitration level at release (greater wins)
        release_time: Sampling instant
        deadline: release_time + period at release
        transmission_time: Frame time c
        state_sample: Sampled plant state (full state vector)
        reference: Reference value at release
        superseded: A fresher sample of the same loop replaced this one mid-transmission
        resolved: Met/missed already reported to the observer
    """
    packet_id: int
    loop_id: int
    priority: int
    release_time: float
    deadline: float
    transmission_time: float
    state_sample: np.ndarray
    reference: float
    state: PacketState = PacketState.QUEUED
    started_at: Optional[float] = None
    completed_at: Optional[float] = None
    superseded: bool = False
    resolved: bool = False

    @property
    def is_live(self) -> bool:
        return self.state in (PacketState.QUEUED, PacketState.TRANSMITTING)


@dataclass(frozen=True, slots=True)
class BusTransition:
    """Result of a submission: the packet that started transmitting, and one it displaced."""
    started: Optional[SamplePacket] = None
    displaced: Optional[SamplePacket] = None


class BusMetrics(BaseModel):
    """
    Bus statistics.

    Attributes:
        pending: Packets waiting for arbitration
        transmitting: 1 while a frame is on the wire
        delivered: Frames delivered in time and used
        dropped: Frames removed while queued
        discarded: Frames that finished too late or superseded
        busy_time_s: Accumulated transmitting time
    """
    pending: int = 0
    transmitting: int = 0
    delivered: int = 0
    dropped: int = 0
    discarded: int = 0
    busy_time_s: float = 0.0


class PacketObserver(ABC):
    """Receives packet outcomes as the bus resolves them."""

    @abstractmethod
    def on_resolved(self, packet: SamplePacket, outcome: PacketOutcome, time: float) -> None:
        """Called exactly once per packet when met/missed is known."""
        pass

    @abstractmethod
    def on_terminated(self, packet: SamplePacket, time: float) -> None:
        """Called exactly once per packet when it reaches delivered, dropped or discarded."""
        pass


class ControlNetwork(ABC):
    """
    Abstract control network interface.

    Implementations must provide:
    - Submit: Release a sample packet onto the network
    - Arbitrate: Pick the next frame when the medium is idle
    - Complete: Finish the frame on the wire
    - Supersede: Retire a loop's previous packet when a fresher sample exists
    - Expire: Resolve every packet whose deadline has passed
    - Metrics: Current bus statistics
    """

    @abstractmethod
    def submit(self, packet: SamplePacket, time: float) -> BusTransition:
        """
        Release a packet at its sampling instant.

        Args:
            packet: Packet with release_time == time
            time: Current instant

        Returns:
            Which packet (if any) started transmitting, and which it displaced
        """
        pass

    @abstractmethod
    def arbitrate(self, time: float) -> Optional[SamplePacket]:
        """
        Start the highest-priority pending packet on an idle medium.

        Returns:
            The packet now transmitting, or None if nothing is pending
        """
        pass

    @abstractmethod
    def complete(self, packet_id: int, time: float) -> SamplePacket:
        """
        Finish the transmitting frame.

        Returns:
            The finished packet in state DELIVERED or DISCARDED
        """
        pass

    @abstractmethod
    def supersede_or_drop(self, loop_id: int, time: float) -> SupersedeOutcome:
        """
        Retire the loop's live packet at a new sampling instant.

        Args:
            loop_id: Loop about to release a fresh sample
            time: Current instant
        """
        pass

    @abstractmethod
    def expire_overdue(self, time: float) -> int:
        """
        Resolve every live packet with deadline <= time as missed.

        Returns:
            Number of packets newly resolved
        """
        pass

    @abstractmethod
    def get_metrics(self, time: float) -> BusMetrics:
        """
        Get current bus statistics.

        Args:
            time: Current instant (counts the partial frame on the wire)
        """
        pass

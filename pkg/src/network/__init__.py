"""
Control Network

Shared-medium model for sensor-to-controller traffic:
- Abstract network interface and packet records
- Priority-arbitrated, non-preemptive bus with deadline accounting
"""

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
from src.network.priority_bus import PriorityArbitratedBus

__all__ = [
    "BusInvariantError",
    "BusMetrics",
    "BusTransition",
    "ControlNetwork",
    "PacketObserver",
    "PacketOutcome",
    "PacketState",
    "SamplePacket",
    "SupersedeOutcome",
    "PriorityArbitratedBus",
]

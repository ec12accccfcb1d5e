"""
Loop Runtime

Live state of one control loop: true plant state, held actuator value,
current period and priority, active controller gains and reference.

The plant is advanced lazily: callers bring it up to an instant with
advance_to() before reading or changing the held input.
"""
from typing import Optional

import numpy as np

from src.control.design import ControllerGains, control_output, design_controller
from src.control.plant import NumericalBlowUpError, ZohPropagator
from src.control.reference import reference_value
from src.models.scenario import LoopConfig
from src.network.base import SamplePacket


class LoopRuntime:
    """
    Attributes:
        loop_id: Zero-based loop index
        x: True plant state at x_time
        u: Actuator value held since the last delivery
        h: Current sampling period
        priority: Level stamped on future packets (greater wins)
        gains: Controller used for the next delivered sample
        reference: Current reference value
        e_last: r - y of the most recent delivered sample
    """

    def __init__(self, loop_id: int, config: LoopConfig, transmission_time: float, h_floor: float):
        self.loop_id = loop_id
        self.config = config
        self.transmission_time = transmission_time
        self.h_floor = h_floor

        self._propagator = ZohPropagator(config.plant)
        _, _, self._c = config.plant.matrices()
        self._poles = config.desired_poles

        self.x = config.initial_state_vector()
        self.x_time = 0.0
        self.u = 0.0

        self.h = config.h_initial_s
        self.priority = config.priority
        self.gains: ControllerGains = design_controller(config.plant, self._poles, self.h, loop_id)
        self._next_gains: Optional[ControllerGains] = None

        self.toggles = 0
        self.reference = reference_value(0.0, config.reference.period_s, config.reference.amplitude)
        self.e_last = self.reference - self.output

        self.last_sample_time: Optional[float] = None
        self.next_sample_time: Optional[float] = None
        self.next_sample_event: Optional[int] = None
        self.designed_periods: set[float] = {self.h}

    @property
    def output(self) -> float:
        return float(self._c @ self.x)

    def sample_output(self, x_sample: np.ndarray) -> float:
        return float(self._c @ x_sample)

    def advance_to(self, t: float) -> None:
        """Propagate the plant under the held input up to t."""
        dt = t - self.x_time
        if dt <= 0:
            return
        x = self._propagator.advance(self.x, self.u, dt)
        if not np.all(np.isfinite(x)):
            raise NumericalBlowUpError(self.loop_id, t)
        self.x = x
        self.x_time = t

    def reference_at(self, t: float) -> float:
        """Set the live reference to the square wave's value at t."""
        reference = self.config.reference
        self.reference = reference_value(t, reference.period_s, reference.amplitude)
        return self.reference

    def toggle_reference(self, t: float) -> float:
        self.toggles += 1
        return self.reference_at(t)

    def set_period(self, h: float) -> bool:
        """
        Adopt a new sampling period. The redesigned controller takes over at
        the next delivered sample.

        Returns:
            True if the period changed
        """
        if h == self.h:
            return False
        self.h = h
        self._next_gains = design_controller(self.config.plant, self._poles, h, self.loop_id)
        self.designed_periods.add(h)
        return True

    def apply_sample(self, packet: SamplePacket, t: float) -> float:
        """
        Run the controller on a delivered sample and update the actuator at t.

        Returns:
            The new held input u
        """
        self.advance_to(t)
        if self._next_gains is not None:
            self.gains = self._next_gains
            self._next_gains = None
        self.u = control_output(self.gains, packet.state_sample, packet.reference)
        if not np.isfinite(self.u):
            raise NumericalBlowUpError(self.loop_id, t, "control output became non-finite")
        self.e_last = packet.reference - self.sample_output(packet.state_sample)
        return self.u


def plant_advance(runtime: LoopRuntime, dt: float) -> np.ndarray:
    """Advance a loop's plant by dt under its held input and return the new state."""
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt!r}")
    runtime.advance_to(runtime.x_time + dt)
    return runtime.x

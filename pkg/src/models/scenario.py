"""
Scenario Models

Everything a simulation run needs: plants, controller targets, references,
network parameters and the feedback-scheduler tuning.

Priority levels follow the arbitration convention: a GREATER level wins the bus.
"""
import cmath
import math
from collections import Counter
from enum import StrEnum
from typing import Annotated, Any, Optional

import numpy as np
from pydantic import Field, field_validator, model_validator

from src.config import get_settings
from src.models.base import SimBaseModel


PositiveSeconds = Annotated[float, Field(gt=0, allow_inf_nan=False)]


class SchedulingMode(StrEnum):
    IFS = "ifs"                    # period adjustment + priority modification
    NON_FS = "nonfs"               # fixed periods and priorities
    PERIOD_ONLY = "period-only"    # period adjustment, priorities frozen


class PlantModel(SimBaseModel):
    """Continuous-time single-input single-output LTI plant: x' = A x + B u, y = C x."""

    a: tuple[tuple[float, ...], ...]
    b: tuple[float, ...]
    c: tuple[float, ...]

    @model_validator(mode="after")
    def check_shapes(self) -> "PlantModel":
        n = len(self.a)
        if n < 1:
            raise ValueError("state dimension must be at least 1")
        if any(len(row) != n for row in self.a):
            raise ValueError(f"a must be square, got rows of lengths {[len(r) for r in self.a]}")
        if len(self.b) != n or len(self.c) != n:
            raise ValueError(f"b and c must have length {n}")
        values = [v for row in self.a for v in row] + list(self.b) + list(self.c)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("plant matrices must be finite")
        return self

    @property
    def n(self) -> int:
        return len(self.a)

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Fresh (A, B, C) arrays with shapes (n, n), (n,), (n,)."""
        return (
            np.array(self.a, dtype=float),
            np.array(self.b, dtype=float),
            np.array(self.c, dtype=float),
        )

    @classmethod
    def dc_motor(cls) -> "PlantModel":
        """Velocity/position DC motor model: x1' = -x1 + u, x2' = x1, y = x2."""
        return cls(a=((-1.0, 0.0), (1.0, 0.0)), b=(1.0, 0.0), c=(0.0, 1.0))


class ReferenceConfig(SimBaseModel):
    """Square-wave reference, +amplitude for the first half of each period."""

    period_s: PositiveSeconds
    amplitude: float = Field(default=1.0, allow_inf_nan=False)


class LoopConfig(SimBaseModel):
    plant: PlantModel = Field(default_factory=PlantModel.dc_motor)
    # Desired closed-loop poles on the z-plane as (real, imag) pairs.
    poles: tuple[tuple[float, float], ...] = ((0.8, 0.3), (0.8, -0.3))
    h_initial_s: PositiveSeconds
    priority: int = Field(..., ge=1, description="Initial arbitration level (greater wins)")
    reference: ReferenceConfig
    weight: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    packet_bytes: int = Field(default=10, gt=0)
    initial_state: Optional[tuple[float, ...]] = None

    @field_validator("poles")
    @classmethod
    def check_conjugate_pairs(cls, poles: tuple[tuple[float, float], ...]) -> tuple[tuple[float, float], ...]:
        values = [complex(re, im) for re, im in poles]
        if not all(cmath.isfinite(p) for p in values):
            raise ValueError("poles must be finite")
        if Counter(values) != Counter(p.conjugate() for p in values):
            raise ValueError("complex poles must come in conjugate pairs")
        return poles

    @model_validator(mode="after")
    def check_dimensions(self) -> "LoopConfig":
        n = self.plant.n
        if len(self.poles) != n:
            raise ValueError(f"expected {n} poles for a plant of order {n}, got {len(self.poles)}")
        if self.initial_state is not None and len(self.initial_state) != n:
            raise ValueError(f"initial_state must have length {n}")
        return self

    @property
    def desired_poles(self) -> tuple[complex, ...]:
        return tuple(complex(re, im) for re, im in self.poles)

    def initial_state_vector(self) -> np.ndarray:
        if self.initial_state is None:
            return np.zeros(self.plant.n)
        return np.array(self.initial_state, dtype=float)


class SchedulerParams(SimBaseModel):
    """Feedback-scheduler tuning. Defaults reproduce the published parameter table."""

    t_fs_s: PositiveSeconds = 0.5
    rho_r: float = Field(default=0.05, gt=0, lt=1)
    k_p: float = Field(default=0.3, allow_inf_nan=False)
    k_i: float = Field(default=0.8, allow_inf_nan=False)
    h_max_s: PositiveSeconds = 0.02
    # None means per-loop floor equal to that loop's transmission time.
    h_min_s: Optional[PositiveSeconds] = None
    epsilon: float = Field(default=0.2, ge=0)
    delta: float = Field(default=0.2, ge=0)

    @model_validator(mode="after")
    def check_period_bounds(self) -> "SchedulerParams":
        if self.h_min_s is not None and self.h_min_s > self.h_max_s:
            raise ValueError(f"h_min_s ({self.h_min_s}) exceeds h_max_s ({self.h_max_s})")
        return self

    def period_floor(self, transmission_time: float) -> float:
        return self.h_min_s if self.h_min_s is not None else transmission_time


class ScenarioConfig(SimBaseModel):
    name: str = "custom"
    data_rate_bps: PositiveSeconds = 25_000.0
    loops: tuple[LoopConfig, ...] = ()
    mode: SchedulingMode = SchedulingMode.IFS
    scheduler: SchedulerParams = Field(default_factory=SchedulerParams)
    duration_s: PositiveSeconds = Field(default_factory=lambda: get_settings().default_duration_s)
    log_grid_s: PositiveSeconds = Field(default_factory=lambda: get_settings().default_log_grid_s)

    @model_validator(mode="after")
    def check_scenario(self) -> "ScenarioConfig":
        levels = sorted(loop.priority for loop in self.loops)
        if levels != list(range(1, len(self.loops) + 1)):
            raise ValueError(
                f"loop priorities must be a permutation of 1..{len(self.loops)}, got "
                f"{[loop.priority for loop in self.loops]}"
            )
        for index, (loop, c) in enumerate(zip(self.loops, self.transmission_times)):
            floor = self.scheduler.period_floor(c)
            if not floor <= loop.h_initial_s <= self.scheduler.h_max_s:
                raise ValueError(
                    f"loops.{index}.h_initial_s={loop.h_initial_s} outside "
                    f"[{floor}, {self.scheduler.h_max_s}]"
                )
        u_floor = sum(c / self.scheduler.h_max_s for c in self.transmission_times)
        if self.mode != SchedulingMode.NON_FS and u_floor > 1.0:
            raise ValueError(
                f"loops need utilization {u_floor:.4f} > 1 even at h_max; "
                "period adjustment has no feasible operating point"
            )
        if self.log_grid_s > self.duration_s:
            raise ValueError("log_grid_s must not exceed duration_s")
        return self

    @property
    def n_loops(self) -> int:
        return len(self.loops)

    @property
    def transmission_times(self) -> tuple[float, ...]:
        """Per-loop frame time c_i = bytes * 8 / data rate, in seconds."""
        return tuple(loop.packet_bytes * 8 / self.data_rate_bps for loop in self.loops)

    @property
    def initial_periods(self) -> tuple[float, ...]:
        return tuple(loop.h_initial_s for loop in self.loops)

    def with_overrides(self, **updates: Any) -> "ScenarioConfig":
        """Copy with top-level fields replaced; the result is re-validated."""
        data = self.model_dump()
        data.update({k: v for k, v in updates.items() if v is not None})
        return ScenarioConfig.model_validate(data)

"""
Controller Design

Discrete state-feedback design by pole placement (Ackermann), feedforward
gain for unit DC gain, and the control law u = -K x + Nff r.

Designs are pure functions of (plant, poles, h) and are memoised, so a loop
that returns to an earlier period reuses bit-identical gains.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from src.control.plant import discretize
from src.core.errors import SimulationError
from src.models.scenario import PlantModel

CONTROLLABILITY_TOLERANCE = 1e-10
POLE_TOLERANCE = 1e-9


class ControllerDesignError(SimulationError):
    """Pole placement or feedforward design failed for a loop."""

    def __init__(self, message: str, loop_id: Optional[int] = None):
        self.loop_id = loop_id
        prefix = f"loop {loop_id + 1}: " if loop_id is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ControllerGains:
    """
    Attributes:
        k: Feedback gain row, shape (n,)
        nff: Feedforward gain on the reference
        h: Design period (s)
        phi: Discrete state matrix at h
        gamma: Discrete input vector at h
    """
    k: np.ndarray
    nff: float
    h: float
    phi: np.ndarray
    gamma: np.ndarray

    @property
    def closed_loop(self) -> np.ndarray:
        return self.phi - np.outer(self.gamma, self.k)


def controllability_matrix(phi: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    n = phi.shape[0]
    columns = [gamma]
    for _ in range(1, n):
        columns.append(phi @ columns[-1])
    return np.column_stack(columns)


def place_gains(
    phi: np.ndarray,
    gamma: np.ndarray,
    poles: Sequence[complex],
    loop_id: Optional[int] = None,
) -> np.ndarray:
    """
    Ackermann pole placement: K = e_n^T Wc^{-1} p(Phi).

    Args:
        phi: Discrete state matrix (n, n)
        gamma: Discrete input vector (n,)
        poles: Desired closed-loop eigenvalues (conjugate-closed multiset)
        loop_id: Reported in errors

    Returns:
        K with shape (n,)

    Raises:
        ControllerDesignError: (phi, gamma) not controllable, or the post-check fails
    """
    n = phi.shape[0]
    if len(poles) != n:
        raise ControllerDesignError(f"need {n} poles, got {len(poles)}", loop_id)

    wc = controllability_matrix(phi, gamma)
    singular_values = np.linalg.svd(wc, compute_uv=False)
    if singular_values[0] == 0 or singular_values[-1] / singular_values[0] < CONTROLLABILITY_TOLERANCE:
        raise ControllerDesignError("(Phi, Gamma) is not controllable; pole placement invalid", loop_id)

    desired = np.real(np.poly(np.asarray(poles, dtype=complex)))

    # p(Phi) by Horner's rule
    p_phi = np.zeros_like(phi)
    for coefficient in desired:
        p_phi = p_phi @ phi + coefficient * np.eye(n)

    k = np.linalg.solve(wc, p_phi)[-1, :]
    if not np.all(np.isfinite(k)):
        raise ControllerDesignError("pole placement produced non-finite gains", loop_id)

    # Coefficient comparison stays well-conditioned for repeated poles.
    achieved = np.real(np.poly(phi - np.outer(gamma, k)))
    if np.max(np.abs(achieved - desired)) > POLE_TOLERANCE:
        raise ControllerDesignError(
            f"closed-loop characteristic polynomial {achieved.tolist()} "
            f"differs from desired {desired.tolist()}",
            loop_id,
        )
    return k


def feedforward_gain(
    phi: np.ndarray,
    gamma: np.ndarray,
    k: np.ndarray,
    c: np.ndarray,
    loop_id: Optional[int] = None,
) -> float:
    """Nff = 1 / (C (I - Phi + Gamma K)^{-1} Gamma), giving unit closed-loop DC gain."""
    n = phi.shape[0]
    m = np.eye(n) - phi + np.outer(gamma, k)
    try:
        dc_direction = np.linalg.solve(m, gamma)
    except np.linalg.LinAlgError as e:
        raise ControllerDesignError(f"I - Phi + Gamma K is singular: {e}", loop_id) from e

    denominator = float(c @ dc_direction)
    if not np.isfinite(denominator) or abs(denominator) < 1e-14:
        raise ControllerDesignError("zero closed-loop DC gain; loop cannot track a reference", loop_id)
    return 1.0 / denominator


@lru_cache(maxsize=1024)
def _design(plant: PlantModel, poles: tuple[complex, ...], h: float) -> ControllerGains:
    phi, gamma = discretize(plant, h)
    k = place_gains(phi, gamma, poles)
    _, _, c = plant.matrices()
    nff = feedforward_gain(phi, gamma, k, c)
    for array in (k, phi, gamma):
        array.setflags(write=False)
    return ControllerGains(k=k, nff=nff, h=h, phi=phi, gamma=gamma)


def design_controller(
    plant: PlantModel,
    poles: Sequence[complex],
    h: float,
    loop_id: Optional[int] = None,
) -> ControllerGains:
    """Discretize at h and design (K, Nff). Errors name the loop when loop_id is given."""
    try:
        return _design(plant, tuple(complex(p) for p in poles), h)
    except ControllerDesignError as e:
        if loop_id is None or e.loop_id is not None:
            raise
        raise ControllerDesignError(f"{e} (h={h * 1000:.4f} ms)", loop_id) from e


def control_output(gains: ControllerGains, x_sample: np.ndarray, r: float) -> float:
    """u = -K x + Nff r."""
    return float(-(gains.k @ x_sample) + gains.nff * r)

"""
Plant Propagation

Exact zero-order-hold discretization of continuous LTI plants and a cached
propagator used to advance plant state between control updates.
"""
import numpy as np
from scipy.linalg import expm

from src.config import get_settings
from src.core.errors import SimulationError
from src.models.scenario import PlantModel


class DiscretizationError(SimulationError):
    """exp(A h) produced non-finite entries."""
    pass


class NumericalBlowUpError(SimulationError):
    """Plant state became non-finite during a run."""

    def __init__(self, loop_id: int, time: float, message: str = "plant state became non-finite"):
        self.loop_id = loop_id
        self.time = time
        super().__init__(f"loop {loop_id + 1}: {message} at t={time:.6f}s")


def discretize_ab(a: np.ndarray, b: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Discretize (A, B) under zero-order hold with period h.

    Uses the exponential of the augmented matrix
        M = [A  B]
            [0  0]
    whose top blocks are exp(A h) and the integral of exp(A s) ds * B.

    Returns:
        (Phi, Gamma) with shapes (n, n) and (n,)
    """
    if not h > 0:
        raise DiscretizationError(f"sampling period must be positive, got {h!r}")

    n = a.shape[0]
    augmented = np.zeros((n + 1, n + 1))
    augmented[:n, :n] = a
    augmented[:n, n] = b
    m = expm(augmented * h)

    phi = m[:n, :n]
    gamma = m[:n, n]
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(gamma))):
        raise DiscretizationError(f"non-finite ZOH matrices for h={h!r}")
    return phi, gamma


def discretize(model: PlantModel, h: float) -> tuple[np.ndarray, np.ndarray]:
    a, b, _ = model.matrices()
    return discretize_ab(a, b, h)


class ZohPropagator:
    """
    Advances x under constant input over arbitrary step lengths.

    (Phi, Gamma) pairs are cached per distinct step length. Step lengths are
    rounded to the simulation time resolution before lookup; the cache is
    flushed once it holds propagator_cache_size entries.
    """

    def __init__(self, model: PlantModel, cache_size: int | None = None):
        settings = get_settings()
        self._a, self._b, _ = model.matrices()
        self._decimals = settings.time_decimals
        self._cache_size = cache_size or settings.propagator_cache_size
        self._cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def matrices(self, dt: float) -> tuple[np.ndarray, np.ndarray]:
        key = round(dt, self._decimals)
        cached = self._cache.get(key)
        if cached is None:
            if len(self._cache) >= self._cache_size:
                self._cache.clear()
            cached = discretize_ab(self._a, self._b, key)
            self._cache[key] = cached
        return cached

    def advance(self, x: np.ndarray, u: float, dt: float) -> np.ndarray:
        """x(t + dt) = Phi(dt) x(t) + Gamma(dt) u. dt = 0 returns x unchanged."""
        if dt < 0:
            raise DiscretizationError(f"cannot advance by negative dt={dt!r}")
        if round(dt, self._decimals) == 0.0:
            return x
        phi, gamma = self.matrices(dt)
        return phi @ x + gamma * u

"""Square-wave reference signals."""
import math

# Instants within this many half-periods of a toggle count as past it.
TOGGLE_EPSILON = 1e-9


def reference_value(t: float, period: float, amplitude: float = 1.0) -> float:
    """+amplitude on [k*period, (k+1/2)*period), -amplitude on the other half."""
    if not period > 0:
        raise ValueError(f"reference period must be positive, got {period!r}")
    toggles = math.floor(t / (period / 2) + TOGGLE_EPSILON)
    return amplitude if toggles % 2 == 0 else -amplitude


def toggle_time(index: int, period: float) -> float:
    """Instant of the index-th sign change (index >= 1)."""
    return index * period / 2

"""
Simulation Errors

Base exception for everything the simulator raises on purpose.
Specific subclasses live next to the code that raises them.
"""


class SimulationError(Exception):
    """Base class for simulator failures (configuration, numerics, invariants)."""
    pass

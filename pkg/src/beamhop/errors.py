"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """A requested configuration violates a structural constraint."""


class DegenerateGeometry(ValueError):
    """Coincident points or another geometric degeneracy."""


class RoutingInfeasible(RuntimeError):
    """A route could not be built (an intermediate cell holds no node)."""

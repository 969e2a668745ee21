from __future__ import annotations

__all__ = [
    "ConfigError",
    "ConsistencyError",
    "DegenerateError",
    "DimensionError",
    "DomainError",
    "ResolutionError",
    "WindowError",
]


class DomainError(ValueError):
    """Argument outside the physical domain (depth, frequency, range)."""


class ConfigError(ValueError):
    """Invalid experiment configuration or environment parameters."""


class DimensionError(ValueError):
    """Array lengths or axes that do not line up."""


class DegenerateError(ValueError):
    """Input for which the requested quantity is undefined (zero energy, k_r <= 0)."""


class ResolutionError(RuntimeError):
    """Depth grid too coarse for the requested frequency."""


class WindowError(RuntimeError):
    """Pulse energy reaches the edges of the synthesis time window."""


class ConsistencyError(RuntimeError):
    """Internal numerical check failed."""

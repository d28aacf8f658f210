"""
Exception types raised by the verification services.
"""


class RigidityError(ValueError):
    """Base class for every input or geometry error raised by the toolkit."""


class ConfigError(RigidityError):
    """Malformed run configuration or inconsistent option."""


class DimensionError(RigidityError):
    """Dimension or array shape outside what an operation supports."""


class GeometryError(RigidityError):
    """Degenerate metric, frame, normal or edge point."""


class DomainError(RigidityError):
    """Point or segment outside the sampled region, or unsupported shape."""


class EigenspaceError(RigidityError):
    """Vector not in the required eigenspace, or a projection annihilated it."""

"""Exception hierarchy shared across the pipeline.

The CLI maps these onto process exit codes, so new error conditions
should subclass one of the four roots below rather than raising bare
ValueError.
"""


class Rdh3dError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(Rdh3dError):
    """Invalid parameter choice (m or n out of range, wrong key role)."""


class MeshParseError(Rdh3dError):
    """Input mesh file is syntactically or semantically invalid.

    ``line`` is the 1-based line number the problem was detected on,
    or None when the error is not tied to a single line.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MalformedHeaderError(MeshParseError):
    pass


class CoordinateSyntaxError(MeshParseError):
    """Non-numeric or missing coordinate value."""


class FaceIndexError(MeshParseError):
    """Face references a vertex index outside [1, N]."""


class NonTriangleFaceError(MeshParseError):
    """Face with more or fewer than 3 vertices (no fan triangulation)."""


class DomainError(Rdh3dError):
    """Mesh content violates a pipeline precondition (e.g. |coord| >= 1)."""


class CapacityError(Rdh3dError):
    """Payload does not fit the embeddable capacity."""

    def __init__(self, message, capacity_bits=None):
        super().__init__(message)
        self.capacity_bits = capacity_bits


class ContainerError(Rdh3dError):
    """Corrupt, truncated, or incompatible .rdh3d container."""

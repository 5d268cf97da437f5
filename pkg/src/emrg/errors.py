"""Exception types shared across the package."""


class EmrgError(Exception):
    """Base class for all package errors."""


class CycleError(EmrgError):
    """The relevant induced subgraph contains a directed cycle."""


class ShapeMismatch(EmrgError):
    """A profile / filter list / batch does not match the network shape."""


class LengthMismatch(EmrgError):
    """Two per-layer sequences have different lengths."""


class UnknownEdge(EmrgError):
    """An edge id was referenced that is not part of the quiver."""


class Underflow(EmrgError):
    """A nonnegative count would be decremented below zero."""


class InvalidShape(EmrgError):
    """A layer description violates its invariants (e.g. zero-width layer)."""


class DomainError(EmrgError):
    """A numeric argument is outside the mathematical domain of the operation."""


class FormatError(EmrgError):
    """A binary or text container is malformed.

    ``offset`` carries the byte offset at which parsing failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class VersionError(FormatError):
    """A container has an unsupported format version."""


class ParseError(EmrgError):
    """A text spec/config failed validation; message carries field diagnostics."""


class IoError(EmrgError):
    """Filesystem-level failure wrapped with context."""

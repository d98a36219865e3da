"""Exception types shared across the package."""


class ShapeError(ValueError):
    """An array's shape violates an operation's contract."""


class PgmError(ValueError):
    """A PGM file could not be parsed or written."""


class ModelFileError(ValueError):
    """A model file is malformed (bad magic, version, shape chain, or truncation)."""


class StreamError(ValueError):
    """A frame directory violates the frame_%06d.pgm contiguous-numbering contract."""

class FigsError(Exception):
    """Base class for figure-rendering failures."""


class MissingColumn(FigsError):
    """A required CSV column header is absent."""

    def __init__(self, column: str, path: str):
        super().__init__(f"column {column!r} missing from {path}")
        self.column = column
        self.path = path

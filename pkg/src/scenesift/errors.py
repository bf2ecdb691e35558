"""Exception types shared across the package."""

from __future__ import annotations


class SceneSiftError(Exception):
    """Base class for every error raised by this package."""


class MissingFile(SceneSiftError):
    """A required CSV file is absent from the data directory."""


class MalformedRow(SceneSiftError):
    """A CSV cell could not be parsed, or a required column is missing.

    Carries the file, 1-based row number and column name when known so that
    broken source data can be located directly.
    """

    def __init__(self, message: str, *, path=None, row: int | None = None,
                 column: str | None = None):
        parts = [message]
        if path is not None:
            parts.append(f"file={path}")
        if row is not None:
            parts.append(f"row={row}")
        if column is not None:
            parts.append(f"column={column}")
        super().__init__("; ".join(parts))
        self.path = path
        self.row = row
        self.column = column


class InconsistentMeta(SceneSiftError):
    """Cross-file or semantic validation of a recording failed."""


class InvalidConfig(SceneSiftError):
    """A synthetic-recording configuration violates its constraints."""


class UnknownScene(SceneSiftError):
    """A (recording, vehicle, frame) triple does not resolve in the data."""


class EmptyContext(SceneSiftError):
    """A scene has no surrounding vehicles and no ego point was requested."""


class UnclassifiableLane(SceneSiftError):
    """A lane id falls outside the range derived from the lane markings."""


class LambdaMismatch(SceneSiftError):
    """Two context sets with different lateral scaling cannot be compared."""


class EmptySet(SceneSiftError):
    """Set distance is undefined for empty point sets."""


class NoCandidates(SceneSiftError):
    """A search matched no candidate scenes at all."""


class DegenerateSample(SceneSiftError):
    """A sample has zero spread, so the density bandwidth would be zero."""


class SchemaMismatch(SceneSiftError):
    """A structured input file does not match the expected schema version."""

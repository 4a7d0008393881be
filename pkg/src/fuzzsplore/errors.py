"""Exception types shared across the package."""

from __future__ import annotations


class FuzzsploreError(Exception):
    """Base class for every error raised by this package."""


# --- queue metadata parsing ---


class QueueNameError(FuzzsploreError):
    """A queue filename could not be interpreted as testcase metadata."""


class MissingId(QueueNameError):
    """The filename carries no ``id:`` segment, so it is not a queue entry."""


class MalformedField(QueueNameError):
    """A recognized metadata key carries an unparsable value."""


class ParentNotSmaller(FuzzsploreError):
    """A testcase references a parent whose id is not strictly smaller."""


class EmptyQueue(FuzzsploreError):
    """No testcase records could be ingested from a queue directory."""


class DuplicateId(FuzzsploreError):
    """Two queue entries share the same testcase id."""


class SchemaError(FuzzsploreError):
    """A JSON document does not match its published schema."""


class ValidationError(FuzzsploreError):
    """A well-formed value violates a semantic invariant."""


# --- execution and coverage collection ---


class ExecutorFailure(FuzzsploreError):
    """The target command could not be spawned or its workspace is unusable."""


class CoverageMissing(FuzzsploreError):
    """No coverage output exists for an execution that should have produced one."""


class CoverageMalformed(FuzzsploreError):
    """A coverage file contains a line that does not parse."""


class IndexOutOfRange(FuzzsploreError):
    """A coverage entry names an edge index outside the configured map."""


class MapSizeMismatch(FuzzsploreError):
    """Two hitcount vectors with different map sizes were combined."""


# --- analysis ---


class ExecutorThresholdExceeded(FuzzsploreError):
    """Too large a fraction of a queue failed to execute; analysis aborted."""


class OutOfRange(FuzzsploreError):
    """A time filter lies outside the artifact's [0, horizon] window."""


# --- embedding ---


class DegenerateInput(FuzzsploreError):
    """The embedding input is too small to process."""


class NonFiniteGradient(FuzzsploreError):
    """The optimizer produced a non-finite gradient."""


# --- genealogy ---


class CycleDetected(FuzzsploreError):
    """A generations graph would contain a cycle (defensive check)."""


class UnknownFuzzer(FuzzsploreError):
    """A fuzzer id is not valid in the requested context."""

"""Hitcount vectors and the primitive operations the analysis fold is built from.

A hitcount vector maps control-flow edge indices to execution counts
(mod 256, so stored counts live in [1, 255]; an absent index means 0).
Coverage is collected through pluggable executors:

* ``command`` executors run an external program with ``@@`` replaced by the
  testcase path and the environment variable ``COV_OUT`` naming the file the
  program must write its coverage to (the afl-showmap style contract).
* ``replay`` executors read pre-recorded coverage from
  ``<coverage_dir>/<fuzzer_id>/<tc_id>.cov``.

The wire format for coverage files (both kinds) is UTF-8 text with one
``edge_index:count`` pair per line, decimal, counts in [1, 255]. Blank lines
are ignored and ``#`` starts a comment line. Indices may appear in any order;
if an index repeats, the last occurrence wins.
"""

from __future__ import annotations

import logging
import os
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import (
    CoverageMalformed,
    CoverageMissing,
    ExecutorFailure,
    IndexOutOfRange,
    MapSizeMismatch,
    ValidationError,
)

if TYPE_CHECKING:
    from .campaign import TestcaseRecord

logger = logging.getLogger(__name__)

DEFAULT_MAP_SIZE = 65536
DEFAULT_TIMEOUT_MS = 5000

COMMAND = "command"
REPLAY = "replay"

AFL_BUCKETS = "afl_buckets"
RAW = "raw"

PLACEHOLDER = "@@"
COV_OUT_ENV = "COV_OUT"


def _build_bucket_lookup() -> tuple[int, ...]:
    # Power-of-two count classes: 1, 2, 4, 8, 16, 32, 64, 128. Boundaries are
    # upper-inclusive at the class value itself so every bucket value maps to
    # itself and classification is idempotent.
    lut = [0] * 256
    for count in range(1, 256):
        if count == 1:
            lut[count] = 1
        elif count == 2:
            lut[count] = 2
        elif count <= 4:
            lut[count] = 4
        elif count <= 8:
            lut[count] = 8
        elif count <= 16:
            lut[count] = 16
        elif count <= 32:
            lut[count] = 32
        elif count <= 127:
            lut[count] = 64
        else:
            lut[count] = 128
    return tuple(lut)


BUCKET_LOOKUP = _build_bucket_lookup()


@dataclass(frozen=True)
class HitcountVector:
    """Sparse edge-index to hitcount map over a fixed-width coverage map.

    Stored counts are always in [1, 255]; a count of 0 is represented by
    absence. Instances are immutable and validated on construction.
    """

    map_size: int
    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.map_size < 1:
            raise ValidationError(f"map_size must be positive, got {self.map_size}")
        for index, count in self.counts.items():
            if not 0 <= index < self.map_size:
                raise IndexOutOfRange(
                    f"edge index {index} outside map of size {self.map_size}"
                )
            if not 1 <= count <= 255:
                raise ValidationError(f"stored count {count} at index {index} not in [1, 255]")

    @classmethod
    def empty(cls, map_size: int) -> "HitcountVector":
        return cls(map_size, {})

    def get(self, index: int) -> int:
        return self.counts.get(index, 0)

    def to_pairs(self) -> list[tuple[int, int]]:
        """Sorted ``(edge_index, count)`` pairs, the serialized form."""
        return sorted(self.counts.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HitcountVector):
            return NotImplemented
        return self.map_size == other.map_size and dict(self.counts) == dict(other.counts)


@dataclass(frozen=True)
class ExecutorSpec:
    """How to obtain coverage for a testcase: run a command or read a recording."""

    kind: str
    argv_template: tuple[str, ...] = ()
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    coverage_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.kind == COMMAND:
            if not self.argv_template:
                raise ValidationError("command executor needs a non-empty argv template")
            placeholders = sum(arg.count(PLACEHOLDER) for arg in self.argv_template)
            if placeholders != 1:
                raise ValidationError(
                    f"command template must contain {PLACEHOLDER!r} exactly once, "
                    f"found {placeholders}"
                )
            if self.timeout_ms <= 0:
                raise ValidationError(f"timeout_ms must be positive, got {self.timeout_ms}")
        elif self.kind == REPLAY:
            if self.coverage_dir is None:
                raise ValidationError("replay executor needs a coverage_dir")
        else:
            raise ValidationError(f"unknown executor kind {self.kind!r}")

    def to_json_dict(self) -> dict:
        if self.kind == COMMAND:
            return {
                "kind": COMMAND,
                "argv": list(self.argv_template),
                "timeout_ms": self.timeout_ms,
            }
        return {"kind": REPLAY, "coverage_dir": str(self.coverage_dir)}


@dataclass(frozen=True)
class ExecutionOutcome:
    vector: HitcountVector
    crashed: bool = False
    timed_out: bool = False


def parse_coverage_text(text: str, map_size: int, *, source: str = "<coverage>") -> HitcountVector:
    """Parse the ``edge_index:count`` wire format into a vector."""
    counts: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        index_s, sep, count_s = line.partition(":")
        if not sep:
            raise CoverageMalformed(f"{source}:{lineno}: missing ':' in {line!r}")
        try:
            index = int(index_s)
            count = int(count_s)
        except ValueError:
            raise CoverageMalformed(f"{source}:{lineno}: non-decimal pair {line!r}") from None
        if index < 0:
            raise CoverageMalformed(f"{source}:{lineno}: negative edge index {index}")
        if index >= map_size:
            raise IndexOutOfRange(
                f"{source}:{lineno}: edge index {index} outside map of size {map_size}"
            )
        if not 1 <= count <= 255:
            raise CoverageMalformed(f"{source}:{lineno}: count {count} not in [1, 255]")
        counts[index] = count
    return HitcountVector(map_size, counts)


def classify_counts(vector: HitcountVector, mode: str) -> HitcountVector:
    """Quantize raw hitcounts into power-of-two classes, or pass them through.

    ``afl_buckets`` maps each count through 1->1, 2->2, 3..4->4, 5..8->8,
    9..16->16, 17..32->32, 33..127->64, 128..255->128, so bucket values are
    fixed points. ``raw`` is the identity. Classification happens once,
    before any merge.
    """
    if mode == RAW:
        return vector
    if mode != AFL_BUCKETS:
        raise ValidationError(f"unknown bucketing mode {mode!r}")
    return HitcountVector(
        vector.map_size,
        {index: BUCKET_LOOKUP[count] for index, count in vector.counts.items()},
    )


def merge_coverage(
    acc: HitcountVector, vector: HitcountVector
) -> tuple[HitcountVector, bool]:
    """Elementwise-max merge of a new vector into the accumulator.

    Returns the merged vector and whether the input was interesting, i.e.
    whether any entry of ``vector`` strictly exceeds the accumulated value.
    Both inputs must already be classified; merging never classifies.
    """
    if acc.map_size != vector.map_size:
        raise MapSizeMismatch(f"map sizes differ: {acc.map_size} vs {vector.map_size}")
    merged = dict(acc.counts)
    interesting = False
    for index, count in vector.counts.items():
        if count > merged.get(index, 0):
            merged[index] = count
            interesting = True
    if not interesting:
        return acc, False
    return HitcountVector(acc.map_size, merged), True


def count_not_zeros(vector: HitcountVector) -> int:
    """Number of edges with a nonzero count."""
    return len(vector.counts)


def _replay_path(spec: ExecutorSpec, tc: "TestcaseRecord") -> Path:
    assert spec.coverage_dir is not None
    return spec.coverage_dir / tc.fuzzer_id / f"{tc.tc_id}.cov"


def _execute_replay(spec: ExecutorSpec, tc: "TestcaseRecord", map_size: int) -> ExecutionOutcome:
    if not spec.coverage_dir.is_dir():  # type: ignore[union-attr]
        raise ExecutorFailure(f"replay coverage dir missing: {spec.coverage_dir}")
    path = _replay_path(spec, tc)
    if not path.is_file():
        raise CoverageMissing(f"no recorded coverage at {path}")
    text = path.read_text(encoding="utf-8")
    return ExecutionOutcome(parse_coverage_text(text, map_size, source=str(path)))


def _execute_command(spec: ExecutorSpec, tc: "TestcaseRecord", map_size: int) -> ExecutionOutcome:
    argv = [arg.replace(PLACEHOLDER, str(tc.input_path)) for arg in spec.argv_template]
    with tempfile.TemporaryDirectory(prefix="fuzzsplore-exec-") as workdir:
        cov_out = Path(workdir) / "coverage.out"
        env = dict(os.environ, **{COV_OUT_ENV: str(cov_out)})
        crashed = False
        timed_out = False
        try:
            proc = subprocess.run(
                argv,
                env=env,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
                timeout=spec.timeout_ms / 1000.0,
            )
        except subprocess.TimeoutExpired:
            timed_out = True
        except OSError as exc:
            raise ExecutorFailure(f"cannot spawn {argv[0]!r}: {exc}") from exc
        else:
            # Negative return code means the process died on a signal.
            crashed = proc.returncode < 0

        if not cov_out.is_file():
            if crashed or timed_out:
                return ExecutionOutcome(HitcountVector.empty(map_size), crashed, timed_out)
            raise CoverageMissing(f"command wrote no coverage to {COV_OUT_ENV}")
        text = cov_out.read_text(encoding="utf-8", errors="replace")
        try:
            vector = parse_coverage_text(text, map_size, source=str(cov_out))
        except CoverageMalformed:
            # A crashing or timed-out target may leave a half-written file.
            if crashed or timed_out:
                return ExecutionOutcome(HitcountVector.empty(map_size), crashed, timed_out)
            raise
        return ExecutionOutcome(vector, crashed, timed_out)


def execute(spec: ExecutorSpec, tc: "TestcaseRecord", map_size: int) -> ExecutionOutcome:
    """Obtain the hitcounts vector for one testcase under one executor.

    Command executors report ``crashed`` when the target dies on a signal and
    ``timed_out`` when it exceeds its timeout; coverage written before the
    abnormal end is still returned, else the empty vector. Replay executors
    never crash or time out.
    """
    if spec.kind == REPLAY:
        return _execute_replay(spec, tc, map_size)
    return _execute_command(spec, tc, map_size)


def fold_coverage(
    vectors: Iterable[HitcountVector], map_size: int
) -> HitcountVector:
    """Elementwise max over a sequence of vectors (zero accumulator start)."""
    acc = HitcountVector.empty(map_size)
    for vector in vectors:
        acc, _ = merge_coverage(acc, vector)
    return acc

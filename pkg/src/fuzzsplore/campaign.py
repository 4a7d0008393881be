"""Campaign definition and queue ingestion.

A campaign names two or more fuzzer configurations, each owning an on-disk
queue of saved testcases, plus the single edge-coverage executor used as the
common yardstick. Queue entries carry their metadata in the filename using
comma-separated ``key:value`` segments (the AFL++ convention)::

    id:000123,src:000045,time:12345,op:havoc

Recognized keys are ``id`` (required), ``src`` (up to two parent ids joined
by ``+``), ``time`` (non-negative, in the campaign's time unit) and ``op``.
Unrecognized keys are ignored. A queue directory may instead provide a
``manifest.json`` with the same fields in explicit JSON, for fuzzers that do
not follow the filename convention.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .coverage import (
    AFL_BUCKETS,
    DEFAULT_MAP_SIZE,
    DEFAULT_TIMEOUT_MS,
    COMMAND,
    REPLAY,
    RAW,
    ExecutorSpec,
)
from .errors import (
    DuplicateId,
    EmptyQueue,
    MalformedField,
    MissingId,
    ParentNotSmaller,
    SchemaError,
    ValidationError,
)
from .schemas import load_schema

logger = logging.getLogger(__name__)

FUZZER_ID_RE = re.compile(r"[A-Za-z0-9_-]+")
_DECIMAL_RE = re.compile(r"\d+")

SECONDS = "seconds"
MILLISECONDS = "milliseconds"

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class FuzzerConfig:
    """One fuzzer under comparison: its queue on disk and its executor."""

    fuzzer_id: str
    display_name: str
    queue_dir: Path
    executor: ExecutorSpec
    color_hint: str | None = None

    def __post_init__(self) -> None:
        if not FUZZER_ID_RE.fullmatch(self.fuzzer_id):
            raise ValidationError(
                f"fuzzer id {self.fuzzer_id!r} must match [A-Za-z0-9_-]+"
            )


@dataclass(frozen=True)
class CampaignConfig:
    """The full campaign: fuzzers, the edge executor, and shared settings."""

    fuzzers: tuple[FuzzerConfig, ...]
    edge_executor: ExecutorSpec
    map_size: int = DEFAULT_MAP_SIZE
    time_unit: str = MILLISECONDS
    bucketing: str = AFL_BUCKETS

    def __post_init__(self) -> None:
        if len(self.fuzzers) < 2:
            raise ValidationError(
                f"a campaign needs at least 2 fuzzers to compare, got {len(self.fuzzers)}"
            )
        ids = [cfg.fuzzer_id for cfg in self.fuzzers]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate fuzzer ids in campaign: {ids}")
        if self.map_size < 1:
            raise ValidationError(f"map_size must be positive, got {self.map_size}")
        if self.time_unit not in (SECONDS, MILLISECONDS):
            raise ValidationError(f"unknown time_unit {self.time_unit!r}")
        if self.bucketing not in (AFL_BUCKETS, RAW):
            raise ValidationError(f"unknown bucketing {self.bucketing!r}")

    def fuzzer_ids(self) -> list[str]:
        return [cfg.fuzzer_id for cfg in self.fuzzers]

    def to_json_dict(self) -> dict:
        """Canonical dict form, used for fingerprinting and round-trips."""
        return {
            "map_size": self.map_size,
            "time_unit": self.time_unit,
            "bucketing": self.bucketing,
            "edge_executor": self.edge_executor.to_json_dict(),
            "fuzzers": [
                {
                    "id": cfg.fuzzer_id,
                    "name": cfg.display_name,
                    "queue_dir": str(cfg.queue_dir),
                    "executor": cfg.executor.to_json_dict(),
                    "color": cfg.color_hint,
                }
                for cfg in self.fuzzers
            ],
        }


@dataclass(frozen=True)
class TestcaseRecord:
    """One saved queue entry, as ingested from disk."""

    tc_id: int
    fuzzer_id: str
    discovery_time_s: float
    parent_ids: tuple[int, ...]
    mutation_op: str | None
    input_path: Path


@dataclass(frozen=True)
class ParsedName:
    """Raw metadata fields parsed out of a queue filename."""

    tc_id: int
    parent_ids: tuple[int, ...] = ()
    raw_time: int | float = 0
    mutation_op: str | None = None


def parse_queue_filename(name: str) -> ParsedName:
    """Parse ``key:value`` segments of a bare queue filename.

    Raises MissingId when no ``id:`` segment exists (the file is not a queue
    entry) and MalformedField when a recognized key's value does not parse.
    Repeated keys keep the last occurrence.
    """
    if "/" in name or "\\" in name:
        raise MalformedField(f"not a bare filename: {name!r}")
    segments: dict[str, str] = {}
    for segment in name.split(","):
        key, sep, value = segment.partition(":")
        if sep:
            segments[key] = value
    if "id" not in segments:
        raise MissingId(f"no id segment in {name!r}")

    id_value = segments["id"]
    if not _DECIMAL_RE.fullmatch(id_value):
        raise MalformedField(f"bad id value {id_value!r} in {name!r}")
    tc_id = int(id_value)

    parents: tuple[int, ...] = ()
    if "src" in segments and segments["src"]:
        parts = segments["src"].split("+")
        if len(parts) > 2:
            raise MalformedField(f"more than 2 parents in {name!r}")
        if not all(_DECIMAL_RE.fullmatch(part) for part in parts):
            raise MalformedField(f"bad src value {segments['src']!r} in {name!r}")
        parents = tuple(int(part) for part in parts)

    raw_time: int | float = 0
    if "time" in segments:
        time_value = segments["time"]
        if _DECIMAL_RE.fullmatch(time_value):
            raw_time = int(time_value)
        else:
            try:
                raw_time = float(time_value)
            except ValueError:
                raise MalformedField(f"bad time value {time_value!r} in {name!r}") from None
            if not raw_time >= 0 or raw_time != raw_time or raw_time == float("inf"):
                raise MalformedField(f"bad time value {time_value!r} in {name!r}")

    return ParsedName(
        tc_id=tc_id,
        parent_ids=parents,
        raw_time=raw_time,
        mutation_op=segments.get("op"),
    )


def format_queue_filename(parsed: ParsedName) -> str:
    """Inverse of :func:`parse_queue_filename` (zero-padded, AFL style)."""
    pieces = [f"id:{parsed.tc_id:06d}"]
    if parsed.parent_ids:
        pieces.append("src:" + "+".join(f"{p:06d}" for p in parsed.parent_ids))
    pieces.append(f"time:{parsed.raw_time}")
    if parsed.mutation_op is not None:
        pieces.append(f"op:{parsed.mutation_op}")
    return ",".join(pieces)


def _to_seconds(raw_time: int | float, time_unit: str) -> float:
    if time_unit == MILLISECONDS:
        return raw_time / 1000.0
    return float(raw_time)


def _records_from_directory(cfg: FuzzerConfig, time_unit: str) -> list[TestcaseRecord]:
    records = []
    for entry in sorted(cfg.queue_dir.iterdir()):
        if entry.name.startswith(".") or not entry.is_file():
            continue
        try:
            parsed = parse_queue_filename(entry.name)
        except MissingId:
            logger.warning("skipping %s: no id segment", entry)
            continue
        except MalformedField as exc:
            raise MalformedField(f"{entry}: {exc}") from exc
        records.append(
            TestcaseRecord(
                tc_id=parsed.tc_id,
                fuzzer_id=cfg.fuzzer_id,
                discovery_time_s=_to_seconds(parsed.raw_time, time_unit),
                parent_ids=parsed.parent_ids,
                mutation_op=parsed.mutation_op,
                input_path=entry,
            )
        )
    return records


def _records_from_manifest(
    cfg: FuzzerConfig, manifest_path: Path, time_unit: str
) -> list[TestcaseRecord]:
    try:
        document = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{manifest_path}: not valid JSON: {exc}") from exc
    entries = document.get("testcases") if isinstance(document, dict) else None
    if not isinstance(entries, list):
        raise SchemaError(f"{manifest_path}: expected an object with a 'testcases' array")

    records = []
    for position, entry in enumerate(entries):
        where = f"{manifest_path}: testcases[{position}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: expected an object")
        if not isinstance(entry.get("id"), int) or entry["id"] < 0:
            raise SchemaError(f"{where}: 'id' must be a non-negative integer")
        if not isinstance(entry.get("file"), str):
            raise SchemaError(f"{where}: 'file' must be a string")
        raw_time = entry.get("time", 0)
        if not isinstance(raw_time, (int, float)) or raw_time < 0:
            raise SchemaError(f"{where}: 'time' must be a non-negative number")
        parents = entry.get("src", [])
        if not (isinstance(parents, list) and all(isinstance(p, int) for p in parents)):
            raise SchemaError(f"{where}: 'src' must be an array of integers")
        if len(parents) > 2:
            raise SchemaError(f"{where}: at most 2 parents allowed")
        op = entry.get("op")
        if op is not None and not isinstance(op, str):
            raise SchemaError(f"{where}: 'op' must be a string or absent")
        input_path = cfg.queue_dir / entry["file"]
        if not input_path.is_file():
            raise ValidationError(f"{where}: input file {input_path} does not exist")
        records.append(
            TestcaseRecord(
                tc_id=entry["id"],
                fuzzer_id=cfg.fuzzer_id,
                discovery_time_s=_to_seconds(raw_time, time_unit),
                parent_ids=tuple(parents),
                mutation_op=op,
                input_path=input_path,
            )
        )
    return records


def ingest_queue(cfg: FuzzerConfig, campaign: CampaignConfig) -> list[TestcaseRecord]:
    """Read one fuzzer's queue directory into validated, ordered records.

    The output is sorted ascending by ``(discovery_time_s, tc_id)``; this is
    the replay order every downstream fold relies on. Parents referencing
    ids that were never ingested are dropped with a warning (such nodes
    become genealogy roots); a parent id >= its child's id is an error.
    """
    if not cfg.queue_dir.is_dir():
        raise ValidationError(f"queue_dir does not exist: {cfg.queue_dir}")

    manifest_path = cfg.queue_dir / MANIFEST_NAME
    if manifest_path.is_file():
        records = _records_from_manifest(cfg, manifest_path, campaign.time_unit)
    else:
        records = _records_from_directory(cfg, campaign.time_unit)

    if not records:
        raise EmptyQueue(f"no testcase records in {cfg.queue_dir}")

    seen: dict[int, Path] = {}
    for record in records:
        if record.tc_id in seen:
            raise DuplicateId(
                f"tc id {record.tc_id} appears in both {seen[record.tc_id]} "
                f"and {record.input_path}"
            )
        seen[record.tc_id] = record.input_path

    known = set(seen)
    validated = []
    for record in records:
        kept = []
        for parent in record.parent_ids:
            if parent not in known:
                logger.warning(
                    "%s/%d: dropping dangling parent %d",
                    cfg.fuzzer_id,
                    record.tc_id,
                    parent,
                )
                continue
            if parent >= record.tc_id:
                raise ParentNotSmaller(
                    f"{cfg.fuzzer_id}/{record.tc_id}: parent {parent} is not smaller"
                )
            kept.append(parent)
        if tuple(kept) != record.parent_ids:
            record = TestcaseRecord(
                tc_id=record.tc_id,
                fuzzer_id=record.fuzzer_id,
                discovery_time_s=record.discovery_time_s,
                parent_ids=tuple(kept),
                mutation_op=record.mutation_op,
                input_path=record.input_path,
            )
        validated.append(record)

    validated.sort(key=lambda r: (r.discovery_time_s, r.tc_id))
    return validated


def _executor_from_json(raw: dict, base_dir: Path) -> ExecutorSpec:
    if raw["kind"] == COMMAND:
        return ExecutorSpec(
            kind=COMMAND,
            argv_template=tuple(raw["argv"]),
            timeout_ms=raw.get("timeout_ms", DEFAULT_TIMEOUT_MS),
        )
    return ExecutorSpec(kind=REPLAY, coverage_dir=_resolve(base_dir, raw["coverage_dir"]))


def _resolve(base_dir: Path, path_str: str) -> Path:
    path = Path(path_str)
    return path if path.is_absolute() else base_dir / path


def campaign_from_json_dict(document: dict, base_dir: Path) -> CampaignConfig:
    """Build a validated CampaignConfig from an already-parsed JSON document.

    Relative paths are resolved against ``base_dir`` (the config file's
    directory). Schema violations raise SchemaError with a JSON-pointer
    location; semantic breaches raise ValidationError.
    """
    schema = load_schema("campaign")
    validator = jsonschema.Draft202012Validator(schema)
    error = jsonschema.exceptions.best_match(validator.iter_errors(document))
    if error is not None:
        raise SchemaError(f"{error.json_path}: {error.message}")

    fuzzers = tuple(
        FuzzerConfig(
            fuzzer_id=raw["id"],
            display_name=raw.get("name", raw["id"]),
            queue_dir=_resolve(base_dir, raw["queue_dir"]),
            executor=_executor_from_json(raw["executor"], base_dir),
            color_hint=raw.get("color"),
        )
        for raw in document["fuzzers"]
    )
    return CampaignConfig(
        fuzzers=fuzzers,
        edge_executor=_executor_from_json(document["edge_executor"], base_dir),
        map_size=document.get("map_size", DEFAULT_MAP_SIZE),
        time_unit=document.get("time_unit", MILLISECONDS),
        bucketing=document.get("bucketing", AFL_BUCKETS),
    )


def load_campaign(path: Path | str) -> CampaignConfig:
    """Load and validate a campaign config JSON document from disk."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return campaign_from_json_dict(document, path.resolve().parent)

"""The campaign analysis engine and its serialized artifact.

For every fuzzer the ingested queue is replayed in discovery order under the
shared edge executor, classified, and folded through the coverage merge with
a zero accumulator. Interesting steps yield the coverage growth curve; the
classified vectors stack up into that fuzzer's coverage matrix. Each queue is
then replayed under every *other* fuzzer's executor (fresh accumulator per
pair) to learn which foreign testcases each fuzzer would have kept, the
cross-fuzzer interestingness map.

The computed artifact is immutable and serializes to a single JSON document
(schema ``fuzzsplore-analysis/1``) that the CLI writes, the HTTP service
loads, and the dashboard consumes. Time filtering is a pure function over
the artifact, so no replay is ever needed to look at a shorter horizon.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import jsonschema

from .campaign import CampaignConfig, TestcaseRecord
from .coverage import (
    ExecutorSpec,
    ExecutionOutcome,
    HitcountVector,
    classify_counts,
    count_not_zeros,
    execute,
    merge_coverage,
)
from .embedding import EmbeddingPoint, TsneParams
from .errors import (
    ExecutorThresholdExceeded,
    FuzzsploreError,
    OutOfRange,
    SchemaError,
)
from .genealogy import GenerationsGraph, GraphNode, filter_graph
from .schemas import load_schema

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "fuzzsplore-analysis/1"
DEFAULT_ERROR_THRESHOLD = 0.5


@dataclass(frozen=True)
class FuzzerMeta:
    fuzzer_id: str
    display_name: str
    color: str | None = None


@dataclass(frozen=True)
class TestcaseMeta:
    """Per-testcase metadata and execution flags, in replay order."""

    tc_id: int
    discovery_time_s: float
    parent_ids: tuple[int, ...]
    mutation_op: str | None
    crashed: bool = False
    timed_out: bool = False
    replay_flaky: bool = False
    exec_error: str | None = None


@dataclass(frozen=True)
class InterestingnessMap:
    """For each owning fuzzer, which other fuzzers keep each testcase.

    Owners never appear in their own sets; the owner is implicitly
    interested in everything it saved.
    """

    fuzzer_ids: tuple[str, ...]
    by_owner: Mapping[str, Mapping[int, frozenset[str]]]

    def for_owner(self, fuzzer_id: str) -> Mapping[int, frozenset[str]]:
        return self.by_owner[fuzzer_id]


@dataclass(frozen=True)
class EmbeddingResult:
    params: TsneParams
    points: tuple[EmbeddingPoint, ...]


@dataclass(frozen=True)
class AnalysisArtifact:
    """Everything the dashboard needs, computed once per observation."""

    fingerprint: dict
    horizon_s: float
    map_size: int
    bucketing: str
    fuzzers: tuple[FuzzerMeta, ...]
    testcases: Mapping[str, tuple[TestcaseMeta, ...]]
    curves: Mapping[str, tuple[tuple[float, int], ...]]
    histogram: Mapping[str, Mapping[int, int]]
    interestingness: InterestingnessMap
    matrices: Mapping[str, tuple[tuple[int, HitcountVector], ...]]
    graphs: Mapping[str, GenerationsGraph]
    embedding: EmbeddingResult | None

    def fuzzer_ids(self) -> list[str]:
        return [meta.fuzzer_id for meta in self.fuzzers]


class _CapturedError:
    """Stands in for an outcome when a single execution failed."""

    __slots__ = ("error",)

    def __init__(self, error: FuzzsploreError):
        self.error = error


def _run_queue(
    spec: ExecutorSpec,
    queue: Sequence[TestcaseRecord],
    map_size: int,
    jobs: int,
    error_threshold: float,
    evaluator_id: str,
) -> list[ExecutionOutcome | _CapturedError]:
    """Execute a whole queue under one executor, in replay order.

    Individual execution failures are captured (the testcase contributes
    empty coverage); the run aborts only when the failed fraction exceeds
    the threshold.
    """

    def one(record: TestcaseRecord) -> ExecutionOutcome | _CapturedError:
        try:
            return execute(spec, record, map_size)
        except FuzzsploreError as exc:
            return _CapturedError(exc)

    if not queue:
        return []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, queue))
    else:
        results = [one(record) for record in queue]

    failures = [
        (record, result)
        for record, result in zip(queue, results)
        if isinstance(result, _CapturedError)
    ]
    for record, result in failures:
        logger.warning(
            "execution failed under %s for %s/%d: %s",
            evaluator_id,
            record.fuzzer_id,
            record.tc_id,
            result.error,
        )
    if len(failures) / len(queue) > error_threshold:
        first_record, first_result = failures[0]
        raise ExecutorThresholdExceeded(
            f"{len(failures)}/{len(queue)} executions failed under {evaluator_id} "
            f"for queue {first_record.fuzzer_id}; first failure at "
            f"({first_record.fuzzer_id}, {first_record.tc_id}): {first_result.error}"
        )
    return results


def _fold_curve(
    queue: Sequence[TestcaseRecord],
    classified: Sequence[HitcountVector],
    map_size: int,
) -> tuple[list[tuple[float, int]], list[bool]]:
    """Fold one queue through the merge, extracting curve change points.

    The curve stores only steps where the discovered-edge count actually
    grows (a count-only increase is interesting but adds no edges); two
    growth events at the same timestamp keep the later, larger value. This
    makes curves strictly increasing in both time and edges while describing
    the same step function.
    """
    acc = HitcountVector.empty(map_size)
    points: list[tuple[float, int]] = []
    interesting_flags: list[bool] = []
    last_edges = 0
    for record, vector in zip(queue, classified):
        acc, interesting = merge_coverage(acc, vector)
        interesting_flags.append(interesting)
        if not interesting:
            continue
        edges = count_not_zeros(acc)
        if edges > last_edges:
            if points and points[-1][0] == record.discovery_time_s:
                points[-1] = (record.discovery_time_s, edges)
            else:
                points.append((record.discovery_time_s, edges))
            last_edges = edges
    return points, interesting_flags


def _config_fingerprint(campaign: CampaignConfig, queues: Mapping[str, Sequence[TestcaseRecord]]) -> dict:
    canonical = json.dumps(campaign.to_json_dict(), sort_keys=True, separators=(",", ":"))
    return {
        "config_sha256": hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
        "queue_sizes": {fuzzer_id: len(queue) for fuzzer_id, queue in queues.items()},
    }


def compute_analysis(
    campaign: CampaignConfig,
    queues: Mapping[str, Sequence[TestcaseRecord]],
    *,
    error_threshold: float = DEFAULT_ERROR_THRESHOLD,
    jobs: int = 1,
) -> AnalysisArtifact:
    """Replay every queue under the edge executor and every other fuzzer.

    Executions within one (queue, executor) pair may run in parallel, but
    the merge fold always consumes outcomes in replay order. Graphs and the
    embedding are attached separately by the caller.
    """
    map_size = campaign.map_size
    fuzzer_ids = campaign.fuzzer_ids()

    testcases: dict[str, tuple[TestcaseMeta, ...]] = {}
    curves: dict[str, tuple[tuple[float, int], ...]] = {}
    histogram: dict[str, dict[int, int]] = {}
    matrices: dict[str, tuple[tuple[int, HitcountVector], ...]] = {}
    by_owner: dict[str, dict[int, set[str]]] = {}

    for cfg in campaign.fuzzers:
        queue = queues[cfg.fuzzer_id]
        outcomes = _run_queue(
            campaign.edge_executor, queue, map_size, jobs, error_threshold, "edge"
        )
        classified: list[HitcountVector] = []
        flags: list[tuple[bool, bool, str | None]] = []
        for outcome in outcomes:
            if isinstance(outcome, _CapturedError):
                classified.append(HitcountVector.empty(map_size))
                flags.append((False, False, str(outcome.error)))
            else:
                classified.append(classify_counts(outcome.vector, campaign.bucketing))
                flags.append((outcome.crashed, outcome.timed_out, None))

        points, interesting_flags = _fold_curve(queue, classified, map_size)
        curves[cfg.fuzzer_id] = tuple(points)
        matrices[cfg.fuzzer_id] = tuple(
            (record.tc_id, vector) for record, vector in zip(queue, classified)
        )
        testcases[cfg.fuzzer_id] = tuple(
            TestcaseMeta(
                tc_id=record.tc_id,
                discovery_time_s=record.discovery_time_s,
                parent_ids=record.parent_ids,
                mutation_op=record.mutation_op,
                crashed=crashed,
                timed_out=timed_out,
                replay_flaky=not interesting,
                exec_error=error,
            )
            for record, (crashed, timed_out, error), interesting in zip(
                queue, flags, interesting_flags
            )
        )
        histogram[cfg.fuzzer_id] = dict(
            Counter(int(math.floor(record.discovery_time_s)) for record in queue)
        )
        by_owner[cfg.fuzzer_id] = {record.tc_id: set() for record in queue}

        for other in campaign.fuzzers:
            if other.fuzzer_id == cfg.fuzzer_id:
                continue
            cross = _run_queue(
                other.executor, queue, map_size, jobs, error_threshold, other.fuzzer_id
            )
            acc = HitcountVector.empty(map_size)
            for record, outcome in zip(queue, cross):
                if isinstance(outcome, _CapturedError):
                    vector = HitcountVector.empty(map_size)
                else:
                    vector = classify_counts(outcome.vector, campaign.bucketing)
                acc, interesting = merge_coverage(acc, vector)
                if interesting:
                    by_owner[cfg.fuzzer_id][record.tc_id].add(other.fuzzer_id)

    horizon = max(
        (record.discovery_time_s for queue in queues.values() for record in queue),
        default=0.0,
    )
    interestingness = InterestingnessMap(
        fuzzer_ids=tuple(fuzzer_ids),
        by_owner={
            owner: {tc_id: frozenset(found) for tc_id, found in owner_map.items()}
            for owner, owner_map in by_owner.items()
        },
    )
    return AnalysisArtifact(
        fingerprint=_config_fingerprint(campaign, queues),
        horizon_s=horizon,
        map_size=map_size,
        bucketing=campaign.bucketing,
        fuzzers=tuple(
            FuzzerMeta(cfg.fuzzer_id, cfg.display_name, cfg.color_hint)
            for cfg in campaign.fuzzers
        ),
        testcases=testcases,
        curves=curves,
        histogram=histogram,
        interestingness=interestingness,
        matrices=matrices,
        graphs={},
        embedding=None,
    )


def with_graphs(
    artifact: AnalysisArtifact, graphs: Mapping[str, GenerationsGraph]
) -> AnalysisArtifact:
    return replace(artifact, graphs=dict(graphs))


def with_embedding(
    artifact: AnalysisArtifact, params: TsneParams, points: Sequence[EmbeddingPoint]
) -> AnalysisArtifact:
    return replace(artifact, embedding=EmbeddingResult(params, tuple(points)))


def filter_artifact(artifact: AnalysisArtifact, t_prime: float) -> AnalysisArtifact:
    """Restrict the artifact to testcases discovered at or before ``t_prime``.

    Pure view construction: curves, matrices, interestingness, histograms,
    graphs and embedding points are all truncated consistently with what a
    fresh analysis of the truncated queues would produce. The input artifact
    is untouched.
    """
    if not 0 <= t_prime <= artifact.horizon_s:
        raise OutOfRange(
            f"t' = {t_prime} outside [0, {artifact.horizon_s}]"
        )

    testcases: dict[str, tuple[TestcaseMeta, ...]] = {}
    curves: dict[str, tuple[tuple[float, int], ...]] = {}
    histogram: dict[str, dict[int, int]] = {}
    matrices: dict[str, tuple[tuple[int, HitcountVector], ...]] = {}
    by_owner: dict[str, dict[int, frozenset[str]]] = {}
    surviving: dict[str, set[int]] = {}

    for fuzzer_id in artifact.testcases:
        metas = artifact.testcases[fuzzer_id]
        kept = tuple(meta for meta in metas if meta.discovery_time_s <= t_prime)
        testcases[fuzzer_id] = kept
        surviving[fuzzer_id] = {meta.tc_id for meta in kept}
        # Replay order sorts by time, so time filtering keeps a prefix.
        matrices[fuzzer_id] = artifact.matrices[fuzzer_id][: len(kept)]
        curves[fuzzer_id] = tuple(
            point for point in artifact.curves[fuzzer_id] if point[0] <= t_prime
        )
        histogram[fuzzer_id] = dict(
            Counter(int(math.floor(meta.discovery_time_s)) for meta in kept)
        )
        by_owner[fuzzer_id] = {
            tc_id: found
            for tc_id, found in artifact.interestingness.for_owner(fuzzer_id).items()
            if tc_id in surviving[fuzzer_id]
        }

    graphs = {
        fuzzer_id: filter_graph(graph, t_prime)
        for fuzzer_id, graph in artifact.graphs.items()
    }
    embedding = artifact.embedding
    if embedding is not None:
        embedding = EmbeddingResult(
            embedding.params,
            tuple(
                point
                for point in embedding.points
                if point.tc_id in surviving.get(point.fuzzer_id, set())
            ),
        )

    return replace(
        artifact,
        horizon_s=t_prime,
        testcases=testcases,
        curves=curves,
        histogram=histogram,
        interestingness=InterestingnessMap(
            artifact.interestingness.fuzzer_ids, by_owner
        ),
        matrices=matrices,
        graphs=graphs,
        embedding=embedding,
    )


# --- serialization ---


def artifact_to_json_dict(artifact: AnalysisArtifact) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "fingerprint": artifact.fingerprint,
        "horizon_s": artifact.horizon_s,
        "map_size": artifact.map_size,
        "bucketing": artifact.bucketing,
        "fuzzers": [
            {"id": meta.fuzzer_id, "name": meta.display_name, "color": meta.color}
            for meta in artifact.fuzzers
        ],
        "testcases": {
            fuzzer_id: [
                {
                    "id": meta.tc_id,
                    "time": meta.discovery_time_s,
                    "parents": list(meta.parent_ids),
                    "op": meta.mutation_op,
                    "crashed": meta.crashed,
                    "timed_out": meta.timed_out,
                    "flaky": meta.replay_flaky,
                    "exec_error": meta.exec_error,
                }
                for meta in metas
            ]
            for fuzzer_id, metas in artifact.testcases.items()
        },
        "curves": {
            fuzzer_id: [[time_s, edges] for time_s, edges in points]
            for fuzzer_id, points in artifact.curves.items()
        },
        "histogram": {
            fuzzer_id: {str(second): count for second, count in sorted(buckets.items())}
            for fuzzer_id, buckets in artifact.histogram.items()
        },
        "interestingness": {
            owner: {
                str(tc_id): sorted(found)
                for tc_id, found in sorted(owner_map.items())
            }
            for owner, owner_map in artifact.interestingness.by_owner.items()
        },
        "matrices": {
            fuzzer_id: [
                {"id": tc_id, "cov": [list(pair) for pair in vector.to_pairs()]}
                for tc_id, vector in rows
            ]
            for fuzzer_id, rows in artifact.matrices.items()
        },
        "graphs": {
            fuzzer_id: graph.to_json_dict()
            for fuzzer_id, graph in artifact.graphs.items()
        },
        "embedding": None
        if artifact.embedding is None
        else {
            "params": artifact.embedding.params.to_json_dict(),
            "points": [
                {"fuzzer": point.fuzzer_id, "id": point.tc_id, "x": point.x, "y": point.y}
                for point in artifact.embedding.points
            ],
        },
    }


def artifact_from_json_dict(document: dict) -> AnalysisArtifact:
    schema = load_schema("artifact")
    validator = jsonschema.Draft202012Validator(schema)
    error = jsonschema.exceptions.best_match(validator.iter_errors(document))
    if error is not None:
        raise SchemaError(f"{error.json_path}: {error.message}")
    if document["schema"] != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported artifact schema {document['schema']!r}, "
            f"expected {SCHEMA_VERSION!r}"
        )

    map_size = document["map_size"]
    embedding = None
    if document["embedding"] is not None:
        embedding = EmbeddingResult(
            params=TsneParams(**document["embedding"]["params"]),
            points=tuple(
                EmbeddingPoint(raw["fuzzer"], raw["id"], raw["x"], raw["y"])
                for raw in document["embedding"]["points"]
            ),
        )
    return AnalysisArtifact(
        fingerprint=document["fingerprint"],
        horizon_s=document["horizon_s"],
        map_size=map_size,
        bucketing=document["bucketing"],
        fuzzers=tuple(
            FuzzerMeta(raw["id"], raw["name"], raw.get("color"))
            for raw in document["fuzzers"]
        ),
        testcases={
            fuzzer_id: tuple(
                TestcaseMeta(
                    tc_id=raw["id"],
                    discovery_time_s=raw["time"],
                    parent_ids=tuple(raw["parents"]),
                    mutation_op=raw["op"],
                    crashed=raw["crashed"],
                    timed_out=raw["timed_out"],
                    replay_flaky=raw["flaky"],
                    exec_error=raw["exec_error"],
                )
                for raw in metas
            )
            for fuzzer_id, metas in document["testcases"].items()
        },
        curves={
            fuzzer_id: tuple((point[0], point[1]) for point in points)
            for fuzzer_id, points in document["curves"].items()
        },
        histogram={
            fuzzer_id: {int(second): count for second, count in buckets.items()}
            for fuzzer_id, buckets in document["histogram"].items()
        },
        interestingness=InterestingnessMap(
            fuzzer_ids=tuple(raw["id"] for raw in document["fuzzers"]),
            by_owner={
                owner: {
                    int(tc_id): frozenset(found) for tc_id, found in owner_map.items()
                }
                for owner, owner_map in document["interestingness"].items()
            },
        ),
        matrices={
            fuzzer_id: tuple(
                (
                    raw["id"],
                    HitcountVector(map_size, {pair[0]: pair[1] for pair in raw["cov"]}),
                )
                for raw in rows
            )
            for fuzzer_id, rows in document["matrices"].items()
        },
        graphs={
            fuzzer_id: GenerationsGraph(
                fuzzer_id=fuzzer_id,
                nodes={
                    raw["id"]: GraphNode(raw["time"], raw["op"], raw["level"])
                    for raw in graph["nodes"]
                },
                edges=tuple((edge[0], edge[1]) for edge in graph["edges"]),
            )
            for fuzzer_id, graph in document["graphs"].items()
        },
        embedding=embedding,
    )


def save_artifact(artifact: AnalysisArtifact, path: Path | str) -> None:
    document = artifact_to_json_dict(artifact)
    Path(path).write_text(
        json.dumps(document, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def load_artifact(path: Path | str) -> AnalysisArtifact:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return artifact_from_json_dict(document)

"""Read-only HTTP service over a computed analysis artifact.

Every response is a deterministic function of (artifact, path, query):
identical requests yield identical bytes. The ``until`` query parameter
restricts any data route to testcases discovered at or before that time
(defaulting to the artifact horizon) by delegating to the pure artifact
filter, so the dashboard never recomputes the analysis. Unknown query keys
are ignored.

Routes::

    GET /api/meta
    GET /api/analysis?until=T
    GET /api/coverage?until=T
    GET /api/embedding?until=T
    GET /api/graph/<fuzzer>?until=T&compare=<other>
    GET /api/testcase/<fuzzer>/<id>

Errors use HTTP codes 400 (malformed query), 404 (unknown fuzzer, testcase,
or route), 422 (``until`` outside [0, horizon]) with a JSON body.
"""

from __future__ import annotations

import json
import logging
import math
import mimetypes
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .analysis import (
    AnalysisArtifact,
    SCHEMA_VERSION,
    artifact_to_json_dict,
    filter_artifact,
)
from .errors import UnknownFuzzer
from .genealogy import overlay_interestingness

logger = logging.getLogger(__name__)

JSON_CONTENT_TYPE = "application/json"


@dataclass(frozen=True)
class ApiResponse:
    status: int
    body: bytes
    content_type: str = JSON_CONTENT_TYPE


class _HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _encode(payload: object) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _json_response(status: int, payload: object) -> ApiResponse:
    return ApiResponse(status, _encode(payload))


def _error_response(status: int, message: str) -> ApiResponse:
    return _json_response(status, {"error": {"code": status, "message": message}})


def _parse_until(artifact: AnalysisArtifact, query: dict[str, str]) -> float:
    raw = query.get("until")
    if raw is None:
        return artifact.horizon_s
    try:
        until = float(raw)
    except ValueError:
        raise _HttpError(400, f"until={raw!r} is not a number") from None
    if math.isnan(until) or math.isinf(until):
        raise _HttpError(400, f"until={raw!r} is not finite")
    if not 0 <= until <= artifact.horizon_s:
        raise _HttpError(
            422, f"until={until} outside [0, {artifact.horizon_s}]"
        )
    return until


def _view(artifact: AnalysisArtifact, until: float) -> AnalysisArtifact:
    if until == artifact.horizon_s:
        return artifact
    return filter_artifact(artifact, until)


def _meta_payload(artifact: AnalysisArtifact) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "fuzzers": [
            {"id": meta.fuzzer_id, "name": meta.display_name, "color": meta.color}
            for meta in artifact.fuzzers
        ],
        "horizon_s": artifact.horizon_s,
        "map_size": artifact.map_size,
        "bucketing": artifact.bucketing,
        "fingerprint": artifact.fingerprint,
        "has_embedding": artifact.embedding is not None,
    }


def _analysis_payload(artifact: AnalysisArtifact, until: float) -> dict:
    document = artifact_to_json_dict(_view(artifact, until))
    return {
        "until": until,
        "horizon_s": artifact.horizon_s,
        "curves": document["curves"],
        "histogram": document["histogram"],
        "interestingness": document["interestingness"],
        "testcases": document["testcases"],
    }


def _coverage_payload(artifact: AnalysisArtifact, until: float) -> dict:
    document = artifact_to_json_dict(_view(artifact, until))
    return {"until": until, "curves": document["curves"]}


def _embedding_payload(artifact: AnalysisArtifact, until: float) -> dict:
    view = _view(artifact, until)
    if view.embedding is None:
        return {"until": until, "params": None, "points": []}
    return {
        "until": until,
        "params": view.embedding.params.to_json_dict(),
        "points": [
            {"fuzzer": point.fuzzer_id, "id": point.tc_id, "x": point.x, "y": point.y}
            for point in view.embedding.points
        ],
    }


def _graph_payload(
    artifact: AnalysisArtifact, fuzzer_id: str, until: float, compare: str | None
) -> dict:
    if fuzzer_id not in artifact.graphs:
        raise _HttpError(404, f"no graph for fuzzer {fuzzer_id!r}")
    view = _view(artifact, until)
    graph = view.graphs[fuzzer_id]
    highlighted: list[int] = []
    if compare is not None:
        try:
            highlighted = sorted(
                overlay_interestingness(graph, view.interestingness, compare)
            )
        except UnknownFuzzer as exc:
            raise _HttpError(404, str(exc)) from None
    payload = graph.to_json_dict()
    payload.update(
        {
            "fuzzer": fuzzer_id,
            "until": until,
            "compare": compare,
            "highlighted": highlighted,
        }
    )
    return payload


def _testcase_payload(artifact: AnalysisArtifact, fuzzer_id: str, tc_raw: str) -> dict:
    if fuzzer_id not in artifact.testcases:
        raise _HttpError(404, f"unknown fuzzer {fuzzer_id!r}")
    try:
        tc_id = int(tc_raw)
    except ValueError:
        raise _HttpError(400, f"testcase id {tc_raw!r} is not an integer") from None
    for meta in artifact.testcases[fuzzer_id]:
        if meta.tc_id == tc_id:
            interesting_to = artifact.interestingness.for_owner(fuzzer_id).get(
                tc_id, frozenset()
            )
            return {
                "fuzzer": fuzzer_id,
                "id": meta.tc_id,
                "time": meta.discovery_time_s,
                "parents": list(meta.parent_ids),
                "op": meta.mutation_op,
                "crashed": meta.crashed,
                "timed_out": meta.timed_out,
                "flaky": meta.replay_flaky,
                "exec_error": meta.exec_error,
                "interesting_to": sorted(interesting_to),
            }
    raise _HttpError(404, f"no testcase {tc_id} for fuzzer {fuzzer_id!r}")


def handle_api(artifact: AnalysisArtifact, path: str, query: dict[str, str]) -> ApiResponse:
    """Dispatch one API request against an immutable artifact."""
    try:
        parts = [part for part in path.split("/") if part]
        if parts[:1] != ["api"]:
            raise _HttpError(404, f"unknown route {path!r}")
        if parts[1:] == ["meta"]:
            return _json_response(200, _meta_payload(artifact))
        if parts[1:] == ["analysis"]:
            until = _parse_until(artifact, query)
            return _json_response(200, _analysis_payload(artifact, until))
        if parts[1:] == ["coverage"]:
            until = _parse_until(artifact, query)
            return _json_response(200, _coverage_payload(artifact, until))
        if parts[1:] == ["embedding"]:
            until = _parse_until(artifact, query)
            return _json_response(200, _embedding_payload(artifact, until))
        if len(parts) == 3 and parts[1] == "graph":
            until = _parse_until(artifact, query)
            return _json_response(
                200, _graph_payload(artifact, parts[2], until, query.get("compare"))
            )
        if len(parts) == 4 and parts[1] == "testcase":
            return _json_response(200, _testcase_payload(artifact, parts[2], parts[3]))
        raise _HttpError(404, f"unknown route {path!r}")
    except _HttpError as exc:
        return _error_response(exc.status, exc.message)


def _serve_static(static_dir: Path, path: str) -> ApiResponse:
    relative = path.lstrip("/") or "index.html"
    target = (static_dir / relative).resolve()
    if not str(target).startswith(str(static_dir.resolve())):
        return _error_response(404, "not found")
    if target.is_dir():
        target = target / "index.html"
    if not target.is_file():
        return _error_response(404, f"no such file: {path}")
    content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
    return ApiResponse(200, target.read_bytes(), content_type)


def make_handler(artifact: AnalysisArtifact, static_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        def _respond(self, include_body: bool) -> None:
            parsed = urlparse(self.path)
            query = {
                key: values[-1]
                for key, values in parse_qs(parsed.query, keep_blank_values=True).items()
            }
            if parsed.path.startswith("/api/") or parsed.path == "/api":
                response = handle_api(artifact, parsed.path, query)
            elif static_dir is not None:
                response = _serve_static(static_dir, parsed.path)
            else:
                response = _error_response(404, f"unknown route {parsed.path!r}")
            self.send_response(response.status)
            self.send_header("Content-Type", response.content_type)
            self.send_header("Content-Length", str(len(response.body)))
            self.send_header("Cache-Control", "no-store")
            self.end_headers()
            if include_body:
                self.wfile.write(response.body)

        def do_GET(self) -> None:  # noqa: N802 (http.server naming)
            self._respond(include_body=True)

        def do_HEAD(self) -> None:  # noqa: N802
            self._respond(include_body=False)

        def log_message(self, format: str, *args) -> None:
            logger.debug("%s %s", self.address_string(), format % args)

    return Handler


def make_server(
    artifact: AnalysisArtifact,
    bind_address: str = "127.0.0.1:8080",
    static_dir: Path | None = None,
) -> ThreadingHTTPServer:
    host, _, port_s = bind_address.rpartition(":")
    if not host or not port_s.isdigit():
        raise ValueError(f"bind address must be host:port, got {bind_address!r}")
    handler = make_handler(artifact, static_dir)
    return ThreadingHTTPServer((host, int(port_s)), handler)

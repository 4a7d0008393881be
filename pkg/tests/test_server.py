"""HTTP API contract: routes, errors, filtering, and determinism."""

from __future__ import annotations

import json
import threading
import urllib.request

import jsonschema
import pytest

import support
from conftest import run_pipeline
from fuzzsplore.analysis import filter_artifact, with_embedding
from fuzzsplore.embedding import TsneParams, run_tsne
from fuzzsplore.genealogy import filter_graph, overlay_interestingness
from fuzzsplore.schemas import load_schema
from fuzzsplore.server import handle_api, make_server


@pytest.fixture(scope="module")
def artifact(tmp_path_factory):
    root = tmp_path_factory.mktemp("campaign")
    config = support.make_replay_campaign(
        root, n_fuzzers=2, n_testcases=10, seed=21, map_size=4096
    )
    campaign, _, artifact = run_pipeline(config)
    params = TsneParams(
        perplexity=2.0, iterations=80, early_exaggeration_iters=20, metric="hamming_binary"
    )
    rows = [
        (fuzzer_id, tc_id, vector)
        for fuzzer_id in artifact.fuzzer_ids()
        for tc_id, vector in artifact.matrices[fuzzer_id]
    ]
    return with_embedding(artifact, params, run_tsne(rows, params))


def get(artifact, path, query=None):
    response = handle_api(artifact, path, query or {})
    return response.status, json.loads(response.body)


class TestMeta:
    def test_echoes_artifact_header(self, artifact):
        status, payload = get(artifact, "/api/meta")
        assert status == 200
        assert payload["schema"] == "fuzzsplore-analysis/1"
        assert [f["id"] for f in payload["fuzzers"]] == ["fuzz0", "fuzz1"]
        assert payload["horizon_s"] == artifact.horizon_s
        jsonschema.validate(payload, load_schema("api_meta"))


class TestAnalysisRoute:
    def test_default_until_is_horizon(self, artifact):
        status, payload = get(artifact, "/api/analysis")
        assert status == 200
        assert payload["until"] == artifact.horizon_s
        assert set(payload["curves"]) == {"fuzz0", "fuzz1"}
        jsonschema.validate(payload, load_schema("api_analysis"))

    def test_until_filters(self, artifact):
        mid = artifact.horizon_s / 2
        status, payload = get(artifact, "/api/analysis", {"until": str(mid)})
        assert status == 200
        view = filter_artifact(artifact, mid)
        assert payload["curves"]["fuzz0"] == [
            [t, e] for t, e in view.curves["fuzz0"]
        ]
        for metas in payload["testcases"].values():
            assert all(meta["time"] <= mid for meta in metas)

    def test_unknown_query_keys_ignored(self, artifact):
        status, _ = get(artifact, "/api/analysis", {"frobnicate": "1"})
        assert status == 200

    @pytest.mark.parametrize("raw", ["-1", "1e99"])
    def test_until_out_of_range(self, artifact, raw):
        status, payload = get(artifact, "/api/analysis", {"until": raw})
        assert status == 422
        jsonschema.validate(payload, load_schema("api_error"))

    @pytest.mark.parametrize("raw", ["abc", "nan", "inf", ""])
    def test_until_malformed(self, artifact, raw):
        status, payload = get(artifact, "/api/analysis", {"until": raw})
        assert status == 400
        jsonschema.validate(payload, load_schema("api_error"))


class TestCoverageRoute:
    def test_curves_only(self, artifact):
        status, payload = get(artifact, "/api/coverage")
        assert status == 200
        assert set(payload) == {"until", "curves"}
        jsonschema.validate(payload, load_schema("api_coverage"))


class TestEmbeddingRoute:
    def test_one_point_per_testcase(self, artifact):
        status, payload = get(artifact, "/api/embedding")
        assert status == 200
        total = sum(len(m) for m in artifact.testcases.values())
        assert len(payload["points"]) == total
        jsonschema.validate(payload, load_schema("api_embedding"))

    def test_until_filters_points(self, artifact):
        mid = artifact.horizon_s / 2
        _, payload = get(artifact, "/api/embedding", {"until": str(mid)})
        view = filter_artifact(artifact, mid)
        expected = sum(len(m) for m in view.testcases.values())
        assert len(payload["points"]) == expected

    def test_absent_embedding_serves_placeholder(self, artifact):
        import dataclasses

        bare = dataclasses.replace(artifact, embedding=None)
        status, payload = get(bare, "/api/embedding")
        assert status == 200
        assert payload["params"] is None and payload["points"] == []
        jsonschema.validate(payload, load_schema("api_embedding"))


class TestGraphRoute:
    def test_unknown_fuzzer_404(self, artifact):
        status, payload = get(artifact, "/api/graph/unknown")
        assert status == 404
        jsonschema.validate(payload, load_schema("api_error"))

    def test_graph_with_overlay_matches_composition(self, artifact):
        mid = artifact.horizon_s / 2
        status, payload = get(
            artifact, "/api/graph/fuzz0", {"until": str(mid), "compare": "fuzz1"}
        )
        assert status == 200
        jsonschema.validate(payload, load_schema("api_graph"))
        view_graph = filter_graph(artifact.graphs["fuzz0"], mid)
        view = filter_artifact(artifact, mid)
        expected = sorted(
            overlay_interestingness(view_graph, view.interestingness, "fuzz1")
        )
        assert payload["highlighted"] == expected
        assert {node["id"] for node in payload["nodes"]} == set(view_graph.nodes)

    def test_compare_with_owner_404(self, artifact):
        status, _ = get(artifact, "/api/graph/fuzz0", {"compare": "fuzz0"})
        assert status == 404

    def test_no_compare_means_no_highlight(self, artifact):
        status, payload = get(artifact, "/api/graph/fuzz0")
        assert status == 200
        assert payload["highlighted"] == []
        assert payload["compare"] is None


class TestTestcaseRoute:
    def test_metadata_with_interestingness_row(self, artifact):
        meta = artifact.testcases["fuzz0"][0]
        status, payload = get(artifact, f"/api/testcase/fuzz0/{meta.tc_id}")
        assert status == 200
        assert payload["id"] == meta.tc_id
        assert payload["time"] == meta.discovery_time_s
        assert payload["interesting_to"] == sorted(
            artifact.interestingness.for_owner("fuzz0").get(meta.tc_id, frozenset())
        )
        jsonschema.validate(payload, load_schema("api_testcase"))

    def test_unknown_testcase_404(self, artifact):
        status, _ = get(artifact, "/api/testcase/fuzz0/99999")
        assert status == 404

    def test_unknown_fuzzer_404(self, artifact):
        status, _ = get(artifact, "/api/testcase/nope/0")
        assert status == 404

    def test_non_integer_id_400(self, artifact):
        status, _ = get(artifact, "/api/testcase/fuzz0/xyz")
        assert status == 400


class TestDeterminism:
    def test_identical_requests_identical_bytes(self, artifact):
        for path, query in [
            ("/api/meta", {}),
            ("/api/analysis", {"until": "3.5"}),
            ("/api/embedding", {}),
            ("/api/graph/fuzz1", {"compare": "fuzz0"}),
        ]:
            first = handle_api(artifact, path, dict(query))
            second = handle_api(artifact, path, dict(query))
            assert first.body == second.body

    def test_unknown_route_404(self, artifact):
        status, _ = get(artifact, "/api/nope")
        assert status == 404
        status, _ = get(artifact, "/somewhere/else")
        assert status == 404


class TestLiveServer:
    @pytest.fixture()
    def server(self, artifact, tmp_path):
        static = tmp_path / "static"
        static.mkdir()
        (static / "index.html").write_text("<html>dashboard</html>")
        (static / "app.js").write_text("console.log('ok')")
        srv = make_server(artifact, "127.0.0.1:0", static_dir=static)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        yield f"http://127.0.0.1:{srv.server_address[1]}"
        srv.shutdown()
        srv.server_close()

    def test_api_over_socket(self, server):
        with urllib.request.urlopen(f"{server}/api/meta") as response:
            assert response.status == 200
            assert response.headers["Content-Type"] == "application/json"
            payload = json.loads(response.read())
        assert payload["schema"] == "fuzzsplore-analysis/1"

    def test_static_files(self, server):
        with urllib.request.urlopen(f"{server}/") as response:
            assert b"dashboard" in response.read()
        with urllib.request.urlopen(f"{server}/app.js") as response:
            assert response.status == 200

    def test_traversal_blocked(self, server):
        request = urllib.request.Request(f"{server}/..%2F..%2Fetc%2Fpasswd")
        with pytest.raises(urllib.error.HTTPError) as excinfo:
            urllib.request.urlopen(request)
        assert excinfo.value.code == 404

    def test_error_status_over_socket(self, server):
        with pytest.raises(urllib.error.HTTPError) as excinfo:
            urllib.request.urlopen(f"{server}/api/analysis?until=-1")
        assert excinfo.value.code == 422

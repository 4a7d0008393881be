"""End-to-end CLI behavior and exit codes."""

from __future__ import annotations

import json
import threading
import urllib.request

import pytest

import support
from fuzzsplore.analysis import load_artifact
from fuzzsplore.cli import main
from fuzzsplore.server import make_server


@pytest.fixture()
def campaign_config(tmp_path):
    return support.make_replay_campaign(
        tmp_path, n_fuzzers=2, n_testcases=6, seed=5, map_size=4096
    )


class TestAnalyze:
    def test_success_writes_artifact_with_curves(self, campaign_config, tmp_path, capsys):
        out = tmp_path / "artifact.json"
        code = main(["analyze", "--campaign", str(campaign_config), "--out", str(out)])
        assert code == 0
        artifact = load_artifact(out)
        assert set(artifact.curves) == {"fuzz0", "fuzz1"}
        assert all(artifact.curves.values())
        assert artifact.graphs["fuzz0"].nodes
        printed = capsys.readouterr().out
        assert "fuzz0" in printed and "fuzz1" in printed
        assert "queue" in printed and "flaky" in printed

    def test_perplexity_default_echoed(self, campaign_config, tmp_path):
        out = tmp_path / "artifact.json"
        assert main(["analyze", "--campaign", str(campaign_config), "--out", str(out)]) == 0
        document = json.loads(out.read_text())
        assert document["embedding"]["params"]["perplexity"] == 30.0
        assert document["embedding"]["params"]["rng_seed"] == 0

    def test_embedding_flags(self, campaign_config, tmp_path):
        out = tmp_path / "artifact.json"
        code = main(
            [
                "analyze",
                "--campaign",
                str(campaign_config),
                "--out",
                str(out),
                "--seed",
                "7",
                "--perplexity",
                "5",
                "--metric",
                "hamming_binary",
            ]
        )
        assert code == 0
        params = json.loads(out.read_text())["embedding"]["params"]
        assert params["rng_seed"] == 7
        assert params["perplexity"] == 5.0
        assert params["metric"] == "hamming_binary"

    def test_no_embedding(self, campaign_config, tmp_path):
        out = tmp_path / "artifact.json"
        code = main(
            ["analyze", "--campaign", str(campaign_config), "--out", str(out), "--no-embedding"]
        )
        assert code == 0
        assert json.loads(out.read_text())["embedding"] is None

    def test_embedding_has_one_point_per_testcase(self, campaign_config, tmp_path):
        out = tmp_path / "artifact.json"
        assert main(["analyze", "--campaign", str(campaign_config), "--out", str(out)]) == 0
        document = json.loads(out.read_text())
        total = sum(len(m) for m in document["testcases"].values())
        assert len(document["embedding"]["points"]) == total

    def test_jobs_flag_gives_same_artifact(self, campaign_config, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["analyze", "--campaign", str(campaign_config), "--out", str(a)]) == 0
        assert (
            main(["analyze", "--campaign", str(campaign_config), "--out", str(b), "--jobs", "4"])
            == 0
        )
        assert a.read_bytes() == b.read_bytes()

    def test_missing_campaign_file_exits_2(self, tmp_path):
        code = main(
            ["analyze", "--campaign", str(tmp_path / "gone.json"), "--out", str(tmp_path / "o")]
        )
        assert code == 2

    def test_invalid_campaign_exits_2(self, tmp_path):
        config = tmp_path / "c.json"
        config.write_text(json.dumps({"fuzzers": []}))
        code = main(["analyze", "--campaign", str(config), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_executor_threshold_exits_3(self, campaign_config, tmp_path):
        import shutil

        shutil.rmtree(campaign_config.parent / "cov_edge")
        (campaign_config.parent / "cov_edge").mkdir()
        code = main(
            ["analyze", "--campaign", str(campaign_config), "--out", str(tmp_path / "o.json")]
        )
        assert code == 3

    def test_unwritable_output_exits_4(self, campaign_config, tmp_path):
        out = tmp_path / "missing-dir" / "artifact.json"
        code = main(["analyze", "--campaign", str(campaign_config), "--out", str(out)])
        assert code == 4


class TestServe:
    def test_rejects_bad_artifact(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{}")
        assert main(["serve", "--data", str(path)]) == 2

    def test_rejects_missing_artifact(self, tmp_path):
        assert main(["serve", "--data", str(tmp_path / "gone.json")]) == 2

    def test_served_artifact_round_trips(self, campaign_config, tmp_path):
        out = tmp_path / "artifact.json"
        assert main(["analyze", "--campaign", str(campaign_config), "--out", str(out)]) == 0
        artifact = load_artifact(out)
        server = make_server(artifact, "127.0.0.1:0")
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            port = server.server_address[1]
            with urllib.request.urlopen(f"http://127.0.0.1:{port}/api/meta") as response:
                payload = json.loads(response.read())
            assert payload["horizon_s"] == artifact.horizon_s
        finally:
            server.shutdown()
            server.server_close()

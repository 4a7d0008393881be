"""Shared fixtures: small synthetic campaigns and the full pipeline."""

from __future__ import annotations

from pathlib import Path

import pytest

import support
from fuzzsplore.analysis import compute_analysis, with_graphs
from fuzzsplore.campaign import ingest_queue, load_campaign
from fuzzsplore.genealogy import build_graph


def run_pipeline(config_path: Path, **kwargs):
    """load -> ingest -> analyze -> graphs, without the embedding step."""
    campaign = load_campaign(config_path)
    queues = {cfg.fuzzer_id: ingest_queue(cfg, campaign) for cfg in campaign.fuzzers}
    artifact = compute_analysis(campaign, queues, **kwargs)
    graphs = {fuzzer_id: build_graph(queue, fuzzer_id) for fuzzer_id, queue in queues.items()}
    return campaign, queues, with_graphs(artifact, graphs)


@pytest.fixture
def small_campaign(tmp_path: Path) -> Path:
    return support.make_replay_campaign(
        tmp_path, n_fuzzers=2, n_testcases=8, seed=7, map_size=4096
    )


@pytest.fixture
def small_artifact(small_campaign: Path):
    _, _, artifact = run_pipeline(small_campaign)
    return artifact

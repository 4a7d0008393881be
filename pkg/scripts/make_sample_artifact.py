#!/usr/bin/env python3
"""Regenerate the bundled sample artifact and the API golden files.

Maintainer tool: run from the repo root after intentional contract changes,
then commit the refreshed files under tests/data/. Tests never invoke this.
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

import support  # noqa: E402

from fuzzsplore.analysis import load_artifact  # noqa: E402
from fuzzsplore.cli import main  # noqa: E402
from fuzzsplore.server import handle_api  # noqa: E402

DATA = REPO / "tests" / "data"
CAMPAIGN_DIR = DATA / "sample_campaign"
ARTIFACT = DATA / "sample_artifact.json"
GOLDEN = DATA / "golden"

GOLDEN_REQUESTS = [
    ("meta", "/api/meta", {}),
    ("analysis", "/api/analysis", {}),
    ("analysis_until", "/api/analysis", {"until": "9.0"}),
    ("coverage", "/api/coverage", {}),
    ("embedding", "/api/embedding", {}),
    ("graph_plain", "/api/graph/fuzz0", {}),
    ("graph_overlay", "/api/graph/fuzz0", {"until": "9.0", "compare": "fuzz1"}),
    ("testcase", "/api/testcase/fuzz1/2", {}),
]


def main_script() -> None:
    if CAMPAIGN_DIR.exists():
        shutil.rmtree(CAMPAIGN_DIR)
    CAMPAIGN_DIR.mkdir(parents=True)
    config = support.make_replay_campaign(
        CAMPAIGN_DIR, n_fuzzers=2, n_testcases=6, seed=42, map_size=65536
    )
    code = main(
        ["analyze", "--campaign", str(config), "--out", str(ARTIFACT), "--seed", "0"]
    )
    if code != 0:
        raise SystemExit(f"analyze failed with exit code {code}")

    artifact = load_artifact(ARTIFACT)
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    GOLDEN.mkdir(parents=True)
    manifest = []
    for name, path, query in GOLDEN_REQUESTS:
        response = handle_api(artifact, path, dict(query))
        if response.status != 200:
            raise SystemExit(f"{path} returned {response.status}")
        (GOLDEN / f"{name}.json").write_bytes(response.body)
        manifest.append({"name": name, "path": path, "query": query})
    (GOLDEN / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {ARTIFACT} and {len(manifest)} golden responses")


if __name__ == "__main__":
    main_script()

"""Synthetic replay campaigns for tests: queue dirs, coverage dirs, config."""

from __future__ import annotations

import json
import random
from pathlib import Path

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"]


def write_coverage_file(path: Path, counts: dict[int, int], rng: random.Random) -> None:
    lines = [f"{index}:{count}" for index, count in counts.items()]
    rng.shuffle(lines)
    if rng.random() < 0.15:
        lines.insert(0, "# replayed coverage")
    if rng.random() < 0.15:
        lines.append("")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def random_counts(rng: random.Random, pool: list[int], max_edges: int = 10) -> dict[int, int]:
    support = rng.sample(pool, rng.randint(1, min(max_edges, len(pool))))
    return {index: rng.randint(1, 255) for index in support}


def make_replay_campaign(
    root: Path,
    *,
    n_fuzzers: int = 3,
    n_testcases: int = 40,
    seed: int = 0,
    map_size: int = 65536,
    bucketing: str = "afl_buckets",
) -> Path:
    """Build a deterministic on-disk replay campaign and return its config path.

    Coverage is drawn from per-fuzzer edge pools plus a shared pool, so the
    folds naturally produce new-edge events, count-only interesting events,
    and entirely redundant testcases. Cross-executor coverage is drawn from
    the evaluator's own pool.
    """
    rng = random.Random(seed)
    root = Path(root)
    fuzzer_ids = [f"fuzz{i}" for i in range(n_fuzzers)]

    region = max(1, (map_size - 1000) // max(n_fuzzers, 1))
    shared_lo = max(0, map_size - 900)
    shared = rng.sample(range(shared_lo, map_size), min(24, map_size - shared_lo))
    pools = {}
    for i, fuzzer_id in enumerate(fuzzer_ids):
        start = min(i * region, max(0, map_size - 50))
        own = rng.sample(range(start, min(start + region, map_size)), min(40, region))
        pools[fuzzer_id] = own + shared

    for fuzzer_id in fuzzer_ids:
        queue_dir = root / "queues" / fuzzer_id
        queue_dir.mkdir(parents=True)
        time_ms = 0
        for k in range(n_testcases):
            if rng.random() < 0.25:
                time_ms += 0  # same-millisecond sibling
            else:
                time_ms += rng.randint(1, 2500)
            src = ""
            if k > 0 and rng.random() > 0.15:
                if k >= 2 and rng.random() < 0.2:
                    a, b = sorted(rng.sample(range(k), 2))
                    src = f",src:{a:06d}+{b:06d}"
                else:
                    src = f",src:{rng.randrange(k):06d}"
            op = rng.choice(["havoc", "splice", "arith", ""])
            name = f"id:{k:06d}{src},time:{time_ms}" + (f",op:{op}" if op else "")
            (queue_dir / name).write_bytes(rng.randbytes(rng.randint(1, 16)))

            cov = random_counts(rng, pools[fuzzer_id])
            if rng.random() < 0.12:
                cov = {}  # empty coverage file: never interesting
            write_coverage_file(root / "cov_edge" / fuzzer_id / f"{k}.cov", cov, rng)
            for other_id in fuzzer_ids:
                if other_id == fuzzer_id:
                    continue
                cross = random_counts(rng, pools[other_id], max_edges=6)
                if rng.random() < 0.2:
                    cross = {}
                write_coverage_file(
                    root / f"cov_{other_id}" / fuzzer_id / f"{k}.cov", cross, rng
                )

    config = {
        "map_size": map_size,
        "time_unit": "milliseconds",
        "bucketing": bucketing,
        "edge_executor": {"kind": "replay", "coverage_dir": "cov_edge"},
        "fuzzers": [
            {
                "id": fuzzer_id,
                "name": fuzzer_id.upper(),
                "queue_dir": f"queues/{fuzzer_id}",
                "executor": {"kind": "replay", "coverage_dir": f"cov_{fuzzer_id}"},
                "color": PALETTE[i % len(PALETTE)],
            }
            for i, fuzzer_id in enumerate(fuzzer_ids)
        ],
    }
    config_path = root / "campaign.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return config_path


def write_queue_with_coverage(
    root: Path,
    fuzzer_id: str,
    entries: list[tuple[str, dict[int, int]]],
    *,
    cross: dict[str, list[dict[int, int]]] | None = None,
) -> None:
    """Lay out explicit queue files plus per-executor coverage for hand examples.

    ``entries`` pairs each queue filename with its edge coverage; ``cross``
    optionally maps an evaluator fuzzer id to per-testcase coverage in the
    same order.
    """
    queue_dir = root / "queues" / fuzzer_id
    queue_dir.mkdir(parents=True, exist_ok=True)
    for position, (name, edge_cov) in enumerate(entries):
        (queue_dir / name).write_bytes(b"x")
        tc_id = int(name.split(",")[0].split(":")[1])
        lines = "".join(f"{i}:{c}\n" for i, c in edge_cov.items())
        edge_path = root / "cov_edge" / fuzzer_id / f"{tc_id}.cov"
        edge_path.parent.mkdir(parents=True, exist_ok=True)
        edge_path.write_text(lines, encoding="utf-8")
        for evaluator, coverages in (cross or {}).items():
            path = root / f"cov_{evaluator}" / fuzzer_id / f"{tc_id}.cov"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(
                "".join(f"{i}:{c}\n" for i, c in coverages[position].items()),
                encoding="utf-8",
            )


def minimal_config(root: Path, fuzzer_ids: list[str], **overrides) -> Path:
    """Write a replay campaign config for queues laid out by the helpers above."""
    config = {
        "edge_executor": {"kind": "replay", "coverage_dir": "cov_edge"},
        "fuzzers": [
            {
                "id": fuzzer_id,
                "queue_dir": f"queues/{fuzzer_id}",
                "executor": {"kind": "replay", "coverage_dir": f"cov_{fuzzer_id}"},
            }
            for fuzzer_id in fuzzer_ids
        ],
    }
    config.update(overrides)
    config_path = root / "campaign.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    return config_path

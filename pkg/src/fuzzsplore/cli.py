"""Command-line entry points: batch analysis and the dashboard service.

The heavy replay step (``analyze``) and exploration (``serve``) are separate
subcommands so a campaign can be observed repeatedly without re-running the
replays. Exit codes: 0 success, 2 configuration or input data error,
3 executor failure threshold exceeded, 4 output I/O error.

The ``FUZZSPLORE_LOG`` environment variable selects the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .analysis import (
    compute_analysis,
    load_artifact,
    save_artifact,
    with_embedding,
    with_graphs,
)
from .campaign import ingest_queue, load_campaign
from .embedding import METRICS, TsneParams, run_tsne
from .errors import ExecutorThresholdExceeded, FuzzsploreError
from .genealogy import build_graph
from .server import make_server

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EXECUTOR = 3
EXIT_IO = 4


def _setup_logging() -> None:
    level = os.environ.get("FUZZSPLORE_LOG", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzsplore",
        description="Replay fuzzer queues, analyze them, and serve the dashboard data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="replay queues and write the analysis artifact")
    analyze.add_argument("--campaign", required=True, type=Path, help="campaign config JSON")
    analyze.add_argument("--out", required=True, type=Path, help="artifact JSON to write")
    analyze.add_argument("--seed", type=int, default=0, help="embedding RNG seed")
    analyze.add_argument("--perplexity", type=float, default=30.0, help="t-SNE perplexity")
    analyze.add_argument(
        "--metric", choices=METRICS, default=METRICS[0], help="embedding distance metric"
    )
    analyze.add_argument("--jobs", type=int, default=1, help="parallel executions per queue")
    analyze.add_argument(
        "--no-embedding", action="store_true", help="skip the t-SNE embedding step"
    )
    analyze.add_argument(
        "--error-threshold",
        type=float,
        default=0.5,
        help="abort when this fraction of a queue fails to execute",
    )

    serve = sub.add_parser("serve", help="serve a computed artifact over HTTP")
    serve.add_argument("--data", required=True, type=Path, help="artifact JSON to serve")
    serve.add_argument("--bind", default="127.0.0.1:8080", help="host:port to listen on")
    serve.add_argument("--static", type=Path, default=None, help="built UI assets to serve")
    return parser


def _print_summary(artifact) -> None:
    print(f"{'fuzzer':<16} {'queue':>6} {'edges':>7} {'crashes':>8} {'flaky':>6}")
    for meta in artifact.fuzzers:
        fuzzer_id = meta.fuzzer_id
        metas = artifact.testcases[fuzzer_id]
        curve = artifact.curves[fuzzer_id]
        edges = curve[-1][1] if curve else 0
        crashes = sum(1 for m in metas if m.crashed)
        flaky = sum(1 for m in metas if m.replay_flaky)
        print(f"{fuzzer_id:<16} {len(metas):>6} {edges:>7} {crashes:>8} {flaky:>6}")


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        campaign = load_campaign(args.campaign)
        queues = {
            cfg.fuzzer_id: ingest_queue(cfg, campaign) for cfg in campaign.fuzzers
        }
    except OSError as exc:
        logger.error("cannot read campaign: %s", exc)
        return EXIT_CONFIG
    except ExecutorThresholdExceeded:
        raise
    except FuzzsploreError as exc:
        logger.error("invalid campaign: %s", exc)
        return EXIT_CONFIG

    try:
        artifact = compute_analysis(
            campaign, queues, error_threshold=args.error_threshold, jobs=args.jobs
        )
    except ExecutorThresholdExceeded as exc:
        logger.error("%s", exc)
        return EXIT_EXECUTOR

    graphs = {
        fuzzer_id: build_graph(queue, fuzzer_id) for fuzzer_id, queue in queues.items()
    }
    artifact = with_graphs(artifact, graphs)

    if not args.no_embedding:
        params = TsneParams(
            perplexity=args.perplexity, rng_seed=args.seed, metric=args.metric
        )
        rows = [
            (cfg.fuzzer_id, tc_id, vector)
            for cfg in campaign.fuzzers
            for tc_id, vector in artifact.matrices[cfg.fuzzer_id]
        ]
        logger.info("embedding %d coverage vectors", len(rows))
        artifact = with_embedding(artifact, params, run_tsne(rows, params))

    try:
        save_artifact(artifact, args.out)
    except OSError as exc:
        logger.error("cannot write artifact: %s", exc)
        return EXIT_IO

    _print_summary(artifact)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        artifact = load_artifact(args.data)
    except OSError as exc:
        logger.error("cannot read artifact: %s", exc)
        return EXIT_CONFIG
    except FuzzsploreError as exc:
        logger.error("invalid artifact: %s", exc)
        return EXIT_CONFIG

    try:
        server = make_server(artifact, args.bind, args.static)
    except (OSError, ValueError) as exc:
        logger.error("cannot bind %s: %s", args.bind, exc)
        return EXIT_CONFIG
    host, port = server.server_address[:2]
    print(f"serving {args.data} on http://{host}:{port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    if args.command == "analyze":
        return cmd_analyze(args)
    return cmd_serve(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

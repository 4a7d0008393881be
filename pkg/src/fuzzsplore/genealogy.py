"""Generations graphs: how each fuzzer's queue evolved by mutation.

Each saved testcase links to the testcase(s) it was mutated from, giving a
DAG per fuzzer (splice mutations have two parents). The node level is the
generation depth: 0 for roots, otherwise one more than the deepest parent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CycleDetected, UnknownFuzzer

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .analysis import InterestingnessMap
    from .campaign import TestcaseRecord


@dataclass(frozen=True)
class GraphNode:
    discovery_time_s: float
    mutation_op: str | None
    level: int


@dataclass(frozen=True)
class GenerationsGraph:
    fuzzer_id: str
    nodes: dict[int, GraphNode]
    edges: tuple[tuple[int, int], ...]

    def to_json_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "id": tc_id,
                    "time": node.discovery_time_s,
                    "op": node.mutation_op,
                    "level": node.level,
                }
                for tc_id, node in sorted(self.nodes.items())
            ],
            "edges": [list(edge) for edge in self.edges],
        }


def _compute_levels(
    node_parents: dict[int, Iterable[int]]
) -> dict[int, int]:
    # Parents always have smaller ids, so ascending id order is topological.
    levels: dict[int, int] = {}
    for tc_id in sorted(node_parents):
        parents = list(node_parents[tc_id])
        levels[tc_id] = 1 + max(levels[p] for p in parents) if parents else 0
    return levels


def build_graph(
    queue: Sequence["TestcaseRecord"], fuzzer_id: str | None = None
) -> GenerationsGraph:
    """Build the generations graph for one ingested queue.

    Dangling parents were already dropped at ingestion, so every surviving
    parent reference becomes an edge. The parent < child check is repeated
    here as a defensive cycle guard.
    """
    if fuzzer_id is None:
        fuzzer_id = queue[0].fuzzer_id if queue else ""

    node_parents: dict[int, tuple[int, ...]] = {}
    times: dict[int, tuple[float, str | None]] = {}
    edges: set[tuple[int, int]] = set()
    for record in queue:
        node_parents[record.tc_id] = record.parent_ids
        times[record.tc_id] = (record.discovery_time_s, record.mutation_op)
        for parent in record.parent_ids:
            if parent >= record.tc_id:
                raise CycleDetected(
                    f"{fuzzer_id}: edge {parent} -> {record.tc_id} is not forward"
                )
            edges.add((parent, record.tc_id))

    levels = _compute_levels(node_parents)
    nodes = {
        tc_id: GraphNode(times[tc_id][0], times[tc_id][1], levels[tc_id])
        for tc_id in node_parents
    }
    return GenerationsGraph(fuzzer_id, nodes, tuple(sorted(edges)))


def overlay_interestingness(
    graph: GenerationsGraph, interestingness: "InterestingnessMap", other: str
) -> set[int]:
    """Nodes of ``graph`` whose testcase the fuzzer ``other`` finds interesting."""
    if other == graph.fuzzer_id:
        raise UnknownFuzzer(
            f"{other!r} owns this graph; owners never appear in their own overlay"
        )
    if other not in interestingness.fuzzer_ids:
        raise UnknownFuzzer(f"no fuzzer {other!r} in this campaign")
    owner_map = interestingness.for_owner(graph.fuzzer_id)
    return {tc_id for tc_id in graph.nodes if other in owner_map.get(tc_id, frozenset())}


def filter_graph(graph: GenerationsGraph, t_prime: float) -> GenerationsGraph:
    """Induced subgraph on nodes discovered at or before ``t_prime``.

    Levels are recomputed for the view: a surviving child whose parents were
    all filtered out becomes a level-0 root.
    """
    surviving = {
        tc_id for tc_id, node in graph.nodes.items() if node.discovery_time_s <= t_prime
    }
    edges = tuple(
        edge for edge in graph.edges if edge[0] in surviving and edge[1] in surviving
    )
    node_parents: dict[int, list[int]] = {tc_id: [] for tc_id in surviving}
    for parent, child in edges:
        node_parents[child].append(parent)
    levels = _compute_levels(node_parents)
    nodes = {
        tc_id: GraphNode(
            graph.nodes[tc_id].discovery_time_s,
            graph.nodes[tc_id].mutation_op,
            levels[tc_id],
        )
        for tc_id in surviving
    }
    return GenerationsGraph(graph.fuzzer_id, nodes, edges)

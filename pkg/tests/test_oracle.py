from itertools import combinations, permutations

import networkx as nx
import numpy as np
import pytest

from shared.utils import ValidationError
from skills.dynamic_graph import Edge, EventKind, GraphState, TopologyEvent
from skills.oracle import (
    History,
    canonical_cycle,
    cycle_edges,
    enumerate_cliques,
    enumerate_cycles,
    enumerate_triangles,
    hop_edges,
    robust_2hop,
    robust_3hop,
    temporal_T2,
    to_networkx,
)


def build_history(n, batches):
    """batches: list of lists of (a, b) inserts, one list per round"""
    graph = GraphState(n)
    hist = History(n)
    for r, batch in enumerate(batches, start=1):
        events = [TopologyEvent(r, Edge(a, b), EventKind.INSERT) for a, b in batch]
        graph.apply_events(events, r)
        hist.record(graph, events)
    return hist


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    draws = rng.random((n, n))
    edges = [(a, b) for a, b in combinations(range(n), 2) if draws[a, b] < p]
    return build_history(n, [edges]).graph_at(1)


def test_history_starts_with_empty_graph():
    hist = build_history(3, [[(0, 1)]])
    assert hist.graph_at(0).present == set()
    assert hist.graph_at(1).present == {Edge(0, 1)}
    assert hist.last_round == 1
    with pytest.raises(ValidationError):
        hist.graph_at(2)


def test_hop_edges_on_a_path():
    graph = build_history(5, [[(0, 1), (1, 2), (2, 3), (3, 4)]]).graph_at(1)
    assert hop_edges(graph, 0, 1) == {Edge(0, 1)}
    assert hop_edges(graph, 0, 2) == {Edge(0, 1), Edge(1, 2)}
    assert hop_edges(graph, 0, 3) == {Edge(0, 1), Edge(1, 2), Edge(2, 3)}
    with pytest.raises(ValidationError):
        hop_edges(graph, 0, 4)


def test_hop_edges_include_edges_between_neighbors():
    graph = build_history(4, [[(0, 1), (0, 2), (1, 2), (2, 3)]]).graph_at(1)
    assert hop_edges(graph, 0, 2) == {Edge(0, 1), Edge(0, 2), Edge(1, 2), Edge(2, 3)}


def test_robust_2hop_depends_on_insertion_order():
    older_far = build_history(3, [[(1, 2)], [(0, 1)]])
    assert robust_2hop(older_far, 0, 2) == {Edge(0, 1)}
    newer_far = build_history(3, [[(0, 1)], [(1, 2)]])
    assert robust_2hop(newer_far, 0, 2) == {Edge(0, 1), Edge(1, 2)}


def test_same_round_insertions_are_robust():
    hist = build_history(3, [[(0, 1), (1, 2)]])
    assert robust_2hop(hist, 0, 1) == {Edge(0, 1), Edge(1, 2)}


def test_temporal_T2_adds_old_triangle_closure():
    hist = build_history(3, [[(1, 2)], [(0, 1)], [(0, 2)]])
    assert robust_2hop(hist, 0, 3) == {Edge(0, 1), Edge(0, 2)}
    assert temporal_T2(hist, 0, 3) == {Edge(0, 1), Edge(0, 2), Edge(1, 2)}


def test_robust_3hop_requires_newest_far_edge():
    forward = build_history(4, [[(0, 1)], [(1, 2)], [(2, 3)]])
    assert robust_3hop(forward, 0, 3) == {Edge(0, 1), Edge(1, 2), Edge(2, 3)}
    backward = build_history(4, [[(2, 3)], [(1, 2)], [(0, 1)]])
    assert robust_3hop(backward, 0, 3) == {Edge(0, 1)}


def test_robust_sets_nest():
    hist = build_history(8, [
        [(0, 1), (2, 3)], [(1, 2), (3, 4)], [(0, 5), (5, 6)], [(6, 7), (1, 6)],
    ])
    for v in range(8):
        r2 = robust_2hop(hist, v, 4)
        graph = hist.graph_at(4)
        assert r2 <= temporal_T2(hist, v, 4) <= hop_edges(graph, v, 2)
        assert r2 <= robust_3hop(hist, v, 4) <= hop_edges(graph, v, 3)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_triangles_match_networkx(seed):
    graph = random_graph(12, 0.35, seed)
    expected = sum(nx.triangles(to_networkx(graph)).values()) // 3
    assert len(enumerate_triangles(graph)) == expected


@pytest.mark.parametrize("k", [4, 5])
def test_cliques_match_networkx(k):
    graph = random_graph(10, 0.6, 3)
    expected = {frozenset(c) for c in nx.enumerate_all_cliques(to_networkx(graph)) if len(c) == k}
    assert enumerate_cliques(graph, k) == expected


@pytest.mark.parametrize("k", [4, 5])
def test_cycles_match_brute_force(k):
    graph = random_graph(8, 0.45, 4)
    expected = set()
    for nodes in combinations(range(graph.n), k):
        for order in permutations(nodes):
            if all(graph.edge_exists(e) for e in cycle_edges(order)):
                expected.add(canonical_cycle(order))
    assert enumerate_cycles(graph, k) == expected


def test_canonical_cycle_picks_smallest_rotation_or_reflection():
    assert canonical_cycle((2, 0, 1, 3)) == (0, 1, 3, 2)
    assert canonical_cycle((3, 1, 0, 2)) == (0, 1, 3, 2)
    assert cycle_edges((0, 1, 2, 3)) == [Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(0, 3)]


def test_enumerators_reject_unsupported_sizes():
    graph = GraphState(4)
    with pytest.raises(ValidationError):
        enumerate_cliques(graph, 7)
    with pytest.raises(ValidationError):
        enumerate_cycles(graph, 6)

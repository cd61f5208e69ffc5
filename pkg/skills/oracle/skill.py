"""
Oracle Skill

Brute-force reference computations over the full event history. Used only by
the verifier and the tests; nothing here is visible to node algorithms.

Features:
- Per-round snapshots G_0, G_1, ... reproducible by replay
- r-hop edge sets E^{v,r}
- Robust 2-hop / 3-hop sets and the triangle temporal-pattern set
- Triangle, k-clique and 4/5-cycle enumeration with canonical cycle form
"""

import logging
import sys
from itertools import combinations
from pathlib import Path
from typing import FrozenSet, Iterable, List, Set, Tuple

import networkx as nx

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import ValidationError
from skills.dynamic_graph import Edge, GraphState, TopologyEvent

logger = logging.getLogger(__name__)

Cycle = Tuple[int, ...]


class History:
    """
    Snapshots of G_i for every simulated round.

    Index 0 is the empty graph; index i is the graph after round i's events.
    """

    def __init__(self, n: int):
        self.n = n
        self._snapshots: List[GraphState] = [GraphState(n)]
        self._batches: List[List[TopologyEvent]] = [[]]

    def record(self, graph: GraphState, events: Iterable[TopologyEvent] = ()) -> int:
        """Store a copy of `graph` as the next round's snapshot; returns its index"""
        self._snapshots.append(graph.copy())
        self._batches.append(list(events))
        return len(self._snapshots) - 1

    def graph_at(self, i: int) -> GraphState:
        if not 0 <= i < len(self._snapshots):
            raise ValidationError(f"Round {i} outside recorded history [0, {len(self)})")
        return self._snapshots[i]

    def events_at(self, i: int) -> List[TopologyEvent]:
        return list(self._batches[i])

    @property
    def last_round(self) -> int:
        return len(self._snapshots) - 1

    def __len__(self) -> int:
        return len(self._snapshots)


def to_networkx(graph: GraphState) -> nx.Graph:
    """Present edges as a networkx graph on all n nodes, with t as an edge attribute"""
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    for edge in graph.present:
        g.add_edge(edge.a, edge.b, t=graph.insertion_time(edge))
    return g


def incident_edges(graph: GraphState, v: int) -> Set[Edge]:
    return {Edge(v, u) for u in graph.neighbors(v)}


def hop_edges(graph: GraphState, v: int, r: int) -> Set[Edge]:
    """
    E^{v,r}: every present edge with an endpoint at distance at most r-1 from v.

    Both endpoints of such an edge lie within distance r. For r=1 this is the
    incident edge set.
    """
    if r not in (1, 2, 3):
        raise ValidationError(f"Hop radius must be 1, 2 or 3, got {r}")
    distances = nx.single_source_shortest_path_length(to_networkx(graph), v, cutoff=r - 1)
    inner = set(distances)
    return {edge for edge in graph.present if edge.a in inner or edge.b in inner}


def robust_2hop(hist: History, v: int, i: int) -> Set[Edge]:
    """R^{v,2}_i: incident edges plus {u,w} with t_{u,w} >= t_{v,u} for a present {v,u}"""
    graph = hist.graph_at(i)
    result = incident_edges(graph, v)
    for u in graph.neighbors(v):
        t_vu = graph.insertion_time(Edge(v, u))
        for w in graph.neighbors(u):
            if w == v:
                continue
            uw = Edge(u, w)
            if graph.insertion_time(uw) >= t_vu:
                result.add(uw)
    return result


def temporal_T2(hist: History, v: int, i: int) -> Set[Edge]:
    """
    T^{v,2}_i: R^{v,2}_i plus triangle closures {u,w} inserted strictly before
    both {v,u} and {v,w}.
    """
    graph = hist.graph_at(i)
    result = robust_2hop(hist, v, i)
    nbrs = graph.neighbors(v)
    for u, w in combinations(sorted(nbrs), 2):
        uw = Edge(u, w)
        if not graph.edge_exists(uw):
            continue
        t_uw = graph.insertion_time(uw)
        if t_uw < graph.insertion_time(Edge(v, u)) and t_uw < graph.insertion_time(Edge(v, w)):
            result.add(uw)
    return result


def robust_3hop(hist: History, v: int, i: int) -> Set[Edge]:
    """
    R^{v,3}_i: R^{v,2}_i plus every edge of a simple path v-u-w-x whose far
    edge is the newest, t_{w,x} >= t_{u,w} and t_{w,x} >= t_{v,u}.
    """
    graph = hist.graph_at(i)
    result = robust_2hop(hist, v, i)
    for u in graph.neighbors(v):
        vu = Edge(v, u)
        t_vu = graph.insertion_time(vu)
        for w in graph.neighbors(u):
            if w == v:
                continue
            uw = Edge(u, w)
            t_uw = graph.insertion_time(uw)
            for x in graph.neighbors(w):
                if x in (v, u):
                    continue
                wx = Edge(w, x)
                t_wx = graph.insertion_time(wx)
                if t_wx >= t_uw and t_wx >= t_vu:
                    result.update((vu, uw, wx))
    return result


def enumerate_triangles(graph: GraphState) -> Set[FrozenSet[int]]:
    return enumerate_cliques(graph, 3)


def enumerate_cliques(graph: GraphState, k: int) -> Set[FrozenSet[int]]:
    """All k-node sets inducing a clique, grown from each node's higher-id neighbors"""
    if not 3 <= k <= 6:
        raise ValidationError(f"Clique size must be within 3..6, got {k}")
    adj = graph.adjacency()
    found: Set[FrozenSet[int]] = set()

    def extend(members: Tuple[int, ...], candidates: Set[int]) -> None:
        if len(members) == k:
            found.add(frozenset(members))
            return
        for node in sorted(candidates):
            if node > members[-1]:
                extend(members + (node,), candidates & adj[node])

    for start in range(graph.n):
        extend((start,), {u for u in adj[start] if u > start})
    return found


def canonical_cycle(nodes: Iterable[int]) -> Cycle:
    """Lexicographically smallest sequence over all rotations and both directions"""
    seq = tuple(nodes)
    k = len(seq)
    candidates = []
    for order in (seq, tuple(reversed(seq))):
        for shift in range(k):
            candidates.append(order[shift:] + order[:shift])
    return min(candidates)


def cycle_edges(cycle: Iterable[int]) -> List[Edge]:
    seq = tuple(cycle)
    return [Edge(seq[j], seq[(j + 1) % len(seq)]) for j in range(len(seq))]


def enumerate_cycles(graph: GraphState, k: int) -> Set[Cycle]:
    """All simple k-cycles (k = 4 or 5) in canonical form, via DFS from each minimal node"""
    if k not in (4, 5):
        raise ValidationError(f"Cycle length must be 4 or 5, got {k}")
    adj = graph.adjacency()
    found: Set[Cycle] = set()

    def walk(path: List[int]) -> None:
        head = path[-1]
        if len(path) == k:
            if path[0] in adj[head]:
                found.add(canonical_cycle(path))
            return
        for nxt in adj[head]:
            if nxt > path[0] and nxt not in path:
                path.append(nxt)
                walk(path)
                path.pop()

    for start in range(graph.n):
        walk([start])
    return found

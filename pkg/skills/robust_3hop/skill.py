"""
Robust 3-Hop Skill

Per-node data structure that learns edges on 2- and 3-paths from the node
whose farthest edge is the newest, keeping for each edge the set of paths it
was learned on. At consistent rounds the listed edges are sandwiched between
the robust 3-hop set and the 3-hop neighborhood of the previous round, which
is enough to answer 4-cycle and 5-cycle listing queries.

Features:
- Path inserts forwarded once (1-edge -> 2-edge paths)
- Deletions forwarded with a hop counter and retracted per sender
- Two-round quiet rule with IsEmpty / AreNeighborsEmpty flags
- Edge and 4/5-cycle queries
"""

import logging
import sys
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Deque, Dict, List, Optional, Sequence, Set, Tuple, Union

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import MalformedCycle, NotOwnQuery, OracleMismatch
from skills.dynamic_graph import Edge, NodeIndications
from skills.oracle import (
    History,
    canonical_cycle,
    cycle_edges,
    enumerate_cycles,
    hop_edges,
    robust_2hop,
    robust_3hop,
)
from skills.sim_engine import (
    EdgeDelete3,
    NodeAlgorithm,
    Packet,
    PathInsert,
    QueryResult,
    VerifyContext,
    WireItem,
)

logger = logging.getLogger(__name__)

NodePath = Tuple[int, ...]
MAX_PATH_EDGES = 3
MAX_FORWARD_EDGES = 2
CYCLE_LENGTHS = (4, 5)


@dataclass(frozen=True)
class InsertPathItem:
    """Own 1-edge path (stamped with its insertion round) or a 2-edge path to forward"""
    path: NodePath
    stamp: int = -1


@dataclass(frozen=True)
class DeleteItem:
    """Own deletion (hops 0, stamped with the old insertion round) or a relayed one"""
    edge: Edge
    hops: int
    stamp: int = -1
    via: Optional[int] = None


QueueEntry = Union[InsertPathItem, DeleteItem]


def rotate_to(cycle: Sequence[int], node: int) -> NodePath:
    seq = tuple(cycle)
    start = seq.index(node)
    return seq[start:] + seq[:start]


class Robust3HopNode(NodeAlgorithm):
    """Keeps P_e path sets; the listed edge set is every edge with a nonempty P_e"""

    name = "robust3hop"

    def __init__(self, node_id: int, n: int, config: Optional[Dict[str, Any]] = None):
        super().__init__(node_id, n, config)
        self.paths: Dict[NodePath, int] = {}
        self.by_edge: Dict[Edge, Set[NodePath]] = {}
        self.Q: Deque[QueueEntry] = deque()
        self._pre_nonempty = False
        self._neighbors_quiet = True
        self._disturbed_prev = False

    def _add_path(self, path: NodePath, epoch: int) -> None:
        self.paths[path] = epoch
        self.by_edge.setdefault(Edge(path[-2], path[-1]), set()).add(path)

    def _retract_prefix(self, prefix: NodePath, epoch: Optional[int] = None) -> int:
        if len(set(prefix)) != len(prefix):
            return 0
        size = len(prefix)
        doomed = [p for p, e in self.paths.items()
                  if p[:size] == prefix and (epoch is None or e == epoch)]
        for path in doomed:
            del self.paths[path]
            edge = Edge(path[-2], path[-1])
            owners = self.by_edge[edge]
            owners.discard(path)
            if not owners:
                del self.by_edge[edge]
        return len(doomed)

    def on_topology(self, indications: NodeIndications, round_no: int) -> None:
        deleted = []
        for edge in sorted(indications.deletions):
            t_old = self.t_incident.pop(edge.other(self.v))
            deleted.append(DeleteItem(edge, 0, stamp=t_old))
        inserted = []
        for edge in sorted(indications.insertions):
            u = edge.other(self.v)
            self.t_incident[u] = round_no
            inserted.append(InsertPathItem((self.v, u), stamp=round_no))
        self.Q.extend(deleted)
        self.Q.extend(inserted)

    def _dequeue(self, item: QueueEntry) -> WireItem:
        """Self-apply a dequeued item and return what is broadcast"""
        if isinstance(item, InsertPathItem):
            if len(item.path) == 2 and self.t_incident.get(item.path[1]) == item.stamp:
                self._add_path(item.path, item.stamp)
            return PathInsert(item.path)
        if item.hops == 0:
            self._retract_prefix((self.v, item.edge.other(self.v)), epoch=item.stamp)
            return EdgeDelete3(item.edge, 0)
        return EdgeDelete3(item.edge, item.hops, via=item.via)

    def select_outgoing(self, round_no: int) -> Dict[int, Packet]:
        self._pre_nonempty = bool(self.Q)
        wire = self._dequeue(self.Q.popleft()) if self.Q else None
        packet = Packet(wire, is_empty=not self._pre_nonempty,
                        are_neighbors_empty=self._neighbors_quiet)
        return {y: packet for y in self.neighbors()}

    def _learn(self, sender: int, path: NodePath) -> None:
        if self.v in path or len(path) > MAX_PATH_EDGES:
            return
        extended = (self.v,) + path
        epoch = self.t_incident[sender]
        for size in range(2, len(extended) + 1):
            self._add_path(extended[:size], epoch)
        if len(extended) - 1 <= MAX_FORWARD_EDGES:
            self.Q.append(InsertPathItem(extended))

    def _forget(self, sender: int, item: EdgeDelete3) -> None:
        if self.v in item.edge:
            return
        if item.hops == 0:
            self._retract_prefix((self.v, sender, item.edge.other(sender)))
            self.Q.append(DeleteItem(item.edge, 1, via=sender))
        elif item.hops == 1 and item.via in item.edge:
            self._retract_prefix((self.v, sender, item.via, item.edge.other(item.via)))

    def on_receive(self, inbox: Dict[int, Packet], round_no: int) -> None:
        busy_neighbor = False
        busy_two_hop = False
        for sender, packet in sorted(inbox.items()):
            busy_neighbor = busy_neighbor or not packet.is_empty
            busy_two_hop = busy_two_hop or not packet.are_neighbors_empty
            if isinstance(packet.item, PathInsert):
                self._learn(sender, packet.item.path)
            elif isinstance(packet.item, EdgeDelete3):
                self._forget(sender, packet.item)
        disturbed = self._pre_nonempty or bool(self.Q) or busy_neighbor or busy_two_hop
        self.C = not disturbed and not self._disturbed_prev
        self._disturbed_prev = disturbed
        self._neighbors_quiet = not busy_neighbor

    def query_edge(self, edge: Edge) -> QueryResult:
        if not self.C:
            return QueryResult.INCONSISTENT
        return QueryResult.of(edge in self.by_edge)

    def query_cycle(self, target: Sequence[int]) -> QueryResult:
        """
        True iff every edge of the cycle is listed.

        Raises:
            MalformedCycle: On repeated nodes or a length other than 4 or 5
            NotOwnQuery: If this node is not on the cycle
        """
        seq = tuple(int(node) for node in target)
        if len(seq) not in CYCLE_LENGTHS or len(set(seq)) != len(seq):
            raise MalformedCycle(f"Cycle query needs 4 or 5 distinct nodes, got {seq}")
        if self.v not in seq:
            raise NotOwnQuery(f"Node {self.v} is not on cycle {seq}")
        if not self.C:
            return QueryResult.INCONSISTENT
        return QueryResult.of(all(edge in self.by_edge for edge in cycle_edges(seq)))

    def query(self, target: Any) -> QueryResult:
        if isinstance(target, Edge):
            return self.query_edge(target)
        return self.query_cycle(target)

    def pending_items(self) -> int:
        # each queued item can trigger one relayed item per other node
        return len(self.Q) * self.n

    def edge_set(self) -> Set[Edge]:
        return set(self.by_edge)

    def hygiene_errors(self) -> List[str]:
        errors = []
        for path in self.paths:
            if path[0] != self.v:
                errors.append(f"{path} does not start at {self.v}")
            if len(set(path)) != len(path):
                errors.append(f"{path} is not simple")
            if not 1 <= len(path) - 1 <= MAX_PATH_EDGES:
                errors.append(f"{path} has {len(path) - 1} edges")
            if path not in self.by_edge.get(Edge(path[-2], path[-1]), ()):
                errors.append(f"{path} missing from its edge's path set")
        return errors


def _check_hygiene(node: Robust3HopNode, i: int) -> None:
    errors = node.hygiene_errors()
    if errors:
        raise OracleMismatch(f"Round {i}, node {node.v}: {errors[0]}", round_no=i, node=node.v)


def verify_sandwich(nodes: Sequence[Robust3HopNode], history: History,
                    i: int, ctx: VerifyContext) -> int:
    """
    R2_i + (R3_{i-1} - R2_{i-1})  <=  listed  <=  E2_i + (E3_{i-1} - E2_{i-1})

    Raises:
        OracleMismatch: When a consistent node falls outside the bounds
    """
    prev = max(0, i - 1)
    graph, prev_graph = history.graph_at(i), history.graph_at(prev)
    checks = 0
    for node in nodes:
        _check_hygiene(node, i)
        if not node.is_consistent():
            continue
        v = node.v
        lower = robust_2hop(history, v, i) | (robust_3hop(history, v, prev) - robust_2hop(history, v, prev))
        upper = hop_edges(graph, v, 2) | (hop_edges(prev_graph, v, 3) - hop_edges(prev_graph, v, 2))
        listed = node.edge_set()
        if not lower <= listed:
            missing = sorted(str(e) for e in lower - listed)
            raise OracleMismatch(f"Round {i}, node {v}: robust edges missing {missing}",
                                 round_no=i, node=v)
        if not listed <= upper:
            extra = sorted(str(e) for e in listed - upper)
            raise OracleMismatch(f"Round {i}, node {v}: edges outside 3-hop bound {extra}",
                                 round_no=i, node=v)
        checks += 1
    return checks


def _walk_candidate(node: Robust3HopNode, adj: Dict[int, Set[int]], k: int,
                    ctx: VerifyContext) -> Optional[NodePath]:
    """Random simple walk of k nodes from the queried node, or None if it gets stuck"""
    walk = [node.v]
    while len(walk) < k:
        options = sorted(adj[walk[-1]] - set(walk))
        if not options:
            return None
        walk.append(ctx.rng.choice(options))
    return tuple(walk)


def verify_listed_cycles(nodes: Sequence[Robust3HopNode], history: History,
                         i: int, ctx: VerifyContext) -> int:
    """
    Every 4/5-cycle of G_{i-1} with all members consistent is listed by some member.

    Raises:
        OracleMismatch: On a missed cycle
    """
    prev_graph = history.graph_at(max(0, i - 1))
    checks = 0
    for k in CYCLE_LENGTHS:
        for cycle in sorted(enumerate_cycles(prev_graph, k)):
            members = [nodes[u] for u in cycle]
            if not all(member.is_consistent() for member in members):
                continue
            if not any(member.query_cycle(rotate_to(cycle, member.v)) is QueryResult.TRUE
                       for member in members):
                raise OracleMismatch(f"Round {i}: {k}-cycle {list(cycle)} listed by no member",
                                     round_no=i)
            checks += 1
    return checks


def verify_non_cycles(nodes: Sequence[Robust3HopNode], history: History,
                      i: int, ctx: VerifyContext, samples: int = 8) -> int:
    """
    No consistent node answers true on a sampled non-cycle.

    Half the candidates are random walks in G_{i-1}, half random node sets.

    Raises:
        OracleMismatch: On a false positive
    """
    prev_graph = history.graph_at(max(0, i - 1))
    adj = prev_graph.adjacency()
    checks = 0
    for k in CYCLE_LENGTHS:
        cycles = enumerate_cycles(prev_graph, k)
        for node in nodes:
            if not node.is_consistent():
                continue
            others = [u for u in range(prev_graph.n) if u != node.v]
            if len(others) < k - 1:
                continue
            for attempt in range(samples):
                if attempt % 2 == 0:
                    candidate = _walk_candidate(node, adj, k, ctx)
                else:
                    candidate = (node.v,) + tuple(ctx.rng.sample(others, k - 1))
                if candidate is None or canonical_cycle(candidate) in cycles:
                    continue
                if node.query_cycle(candidate) is QueryResult.TRUE:
                    raise OracleMismatch(
                        f"Round {i}, node {node.v}: non-cycle {list(candidate)} answered true",
                        round_no=i, node=node.v)
                checks += 1
    return checks


def verify_cycles(nodes: Sequence[Robust3HopNode], history: History,
                  i: int, ctx: VerifyContext) -> int:
    return (verify_listed_cycles(nodes, history, i, ctx)
            + verify_non_cycles(nodes, history, i, ctx))

"""
Naive 2-Hop Skill

Baseline full 2-hop neighborhood listing. Each node keeps one update queue
per neighbor; a new neighbor first receives a bitmask snapshot of the node's
whole neighborhood split into B-bit chunks, then single-edge updates. The
snapshot costs about n/B rounds per insertion, which is what separates this
baseline from the robust structures.
"""

import logging
import sys
from collections import deque
from pathlib import Path
from typing import Any, Deque, Dict, Iterable, List, Optional, Sequence, Set

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import NotOwnQuery, OracleMismatch, ValidationError
from skills.dynamic_graph import Edge, NodeIndications
from skills.oracle import History, hop_edges
from skills.robust_2hop import as_edge
from skills.sim_engine import (
    HEADER_BITS,
    EdgeUpdateA,
    NodeAlgorithm,
    Packet,
    QueryResult,
    SnapshotChunk,
    VerifyContext,
    WireItem,
    ceil_log2,
    default_bandwidth_bits,
)

logger = logging.getLogger(__name__)


def payload_width(n: int, config: Optional[Dict[str, Any]] = None) -> int:
    """B: snapshot bits per message, ceil(log2 n) unless configured"""
    width = (config or {}).get("payload_bits")
    return int(width) if width else ceil_log2(n)


def chunk_count(n: int, width: int) -> int:
    return -(-n // width)


def encode_snapshot(owner: int, members: Set[int], n: int, width: int) -> List[SnapshotChunk]:
    """Split the membership bitmask of [0, n) into consecutive chunks of `width` bits"""
    chunks = []
    for offset in range(0, n, width):
        size = min(width, n - offset)
        bits = 0
        for j in range(size):
            if offset + j in members:
                bits |= 1 << j
        chunks.append(SnapshotChunk(owner, bits, size))
    return chunks


def decode_snapshot(chunks: Sequence[SnapshotChunk], width: int) -> Set[int]:
    members = set()
    for index, chunk in enumerate(chunks):
        offset = index * width
        for j in range(chunk.width):
            if chunk.bits >> j & 1:
                members.add(offset + j)
    return members


class Naive2HopNode(NodeAlgorithm):
    """Full E^{v,2} listing with per-neighbor queues and neighborhood snapshots"""

    name = "naive2hop"
    MULTI_QUEUE = True

    def __init__(self, node_id: int, n: int, config: Optional[Dict[str, Any]] = None):
        super().__init__(node_id, n, config)
        self.width = payload_width(n, self.config)
        self.queues: Dict[int, Deque[WireItem]] = {}
        self.known: Dict[int, Set[int]] = {}
        self.partial: Dict[int, List[SnapshotChunk]] = {}

    @classmethod
    def bandwidth_bits(cls, n: int, config: Optional[Dict[str, Any]] = None) -> int:
        width = payload_width(n, config)
        return max(default_bandwidth_bits(n), width + ceil_log2(n) + HEADER_BITS)

    def on_topology(self, indications: NodeIndications, round_no: int) -> None:
        for edge in sorted(indications.deletions):
            u = edge.other(self.v)
            self.t_incident.pop(u)
            self.queues.pop(u, None)
            self.known.pop(u, None)
            self.partial.pop(u, None)
            for queue in self.queues.values():
                queue.append(EdgeUpdateA(edge, False))
        for edge in sorted(indications.insertions):
            u = edge.other(self.v)
            for queue in self.queues.values():
                queue.append(EdgeUpdateA(edge, True))
            self.t_incident[u] = round_no
            members = set(self.t_incident)
            self.queues[u] = deque(encode_snapshot(self.v, members, self.n, self.width))

    def select_outgoing(self, round_no: int) -> Dict[int, Packet]:
        outbox = {}
        for u in sorted(self.queues):
            queue = self.queues[u]
            if queue:
                item = queue.popleft()
                outbox[u] = Packet(item, is_empty=not queue)
        return outbox

    def on_receive(self, inbox: Dict[int, Packet], round_no: int) -> None:
        flagged = False
        for sender, packet in sorted(inbox.items()):
            flagged = flagged or not packet.is_empty
            item = packet.item
            if isinstance(item, SnapshotChunk):
                chunks = self.partial.setdefault(sender, [])
                chunks.append(item)
                if len(chunks) == chunk_count(self.n, self.width):
                    self.known[sender] = decode_snapshot(chunks, self.width)
                    del self.partial[sender]
            elif isinstance(item, EdgeUpdateA) and sender in self.known:
                w = item.edge.other(sender)
                if item.insert:
                    self.known[sender].add(w)
                else:
                    self.known[sender].discard(w)
        self.C = not flagged and not any(self.queues.values())

    def believed_edges(self) -> Set[Edge]:
        edges = {Edge(self.v, u) for u in self.t_incident}
        for u, members in self.known.items():
            edges.update(Edge(u, w) for w in members if w != u)
        return edges

    def query(self, target: Any) -> QueryResult:
        edge = as_edge(target)
        if not self.C:
            return QueryResult.INCONSISTENT
        if self.v in edge:
            return QueryResult.of(edge.other(self.v) in self.t_incident)
        return QueryResult.of(
            edge.b in self.known.get(edge.a, ()) or edge.a in self.known.get(edge.b, ())
        )

    def query_subgraph(self, edges: Iterable[Any]) -> QueryResult:
        """
        Membership query for a candidate subgraph through v, given by its edges.

        Every edge must touch v or one of v's neighbors in the candidate,
        which covers any pattern of diameter 2 rooted at a center.

        Raises:
            NotOwnQuery: If v is not a node of the candidate
            ValidationError: On an empty candidate or an edge outside the 2-hop view
        """
        candidate = {as_edge(edge) for edge in edges}
        if not candidate:
            raise ValidationError("Subgraph query needs at least one edge")
        if not any(self.v in edge for edge in candidate):
            raise NotOwnQuery(f"Node {self.v} is not part of the queried subgraph")
        near = {self.v} | {edge.other(self.v) for edge in candidate if self.v in edge}
        outside = sorted(str(e) for e in candidate if e.a not in near and e.b not in near)
        if outside:
            raise ValidationError(f"Edges {outside} are beyond the 2-hop view of node {self.v}")
        if not self.C:
            return QueryResult.INCONSISTENT
        return QueryResult.of(candidate <= self.believed_edges())

    def pending_items(self) -> int:
        return sum(len(queue) for queue in self.queues.values())


def verify_naive_2hop(nodes: Sequence[Naive2HopNode], history: History,
                      i: int, ctx: VerifyContext) -> int:
    """
    Consistent nodes must list the 2-hop edge set exactly.

    Raises:
        OracleMismatch: On the first disagreement
    """
    graph = history.graph_at(i)
    checks = 0
    for node in nodes:
        if not node.is_consistent():
            continue
        expected = hop_edges(graph, node.v, 2)
        believed = node.believed_edges()
        if believed != expected:
            missing = sorted(str(e) for e in expected - believed)
            extra = sorted(str(e) for e in believed - expected)
            raise OracleMismatch(
                f"Round {i}, node {node.v}: missing {missing}, extra {extra}",
                round_no=i, node=node.v)
        for edge in ctx.sample(sorted(expected)):
            if node.query(edge) is not QueryResult.TRUE:
                raise OracleMismatch(f"Round {i}, node {node.v}: query {edge} not true",
                                     round_no=i, node=node.v)
        checks += 1
    return checks

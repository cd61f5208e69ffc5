"""
Triangle & Clique Membership Skill

Per-node data structure that keeps the triangle temporal-pattern set of the
2-hop neighborhood: robust edges (pattern a) plus triangle closures {u,w}
older than both {v,u} and {v,w} (pattern b), learned through a unicast from
a common neighbor. Every triangle through v, and hence every k-clique
through v, is answerable locally once the flag is set.

Features:
- Mark-A broadcast of incident changes, mark-B unicast of triangle closures
- Witness tags per sender and pattern
- Triangle and k-clique (k = 3..6) membership queries
"""

import logging
import sys
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Any, Deque, Dict, FrozenSet, Optional, Sequence, Tuple, Union

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import NotOwnQuery, OracleMismatch, ValidationError
from skills.dynamic_graph import Edge, NodeIndications
from skills.oracle import History, enumerate_cliques, enumerate_triangles, temporal_T2
from skills.sim_engine import EdgeUpdateA, NodeAlgorithm, Packet, PairB, QueryResult, VerifyContext

logger = logging.getLogger(__name__)

PATTERN_A = "a"
PATTERN_B = "b"
Witness = Tuple[str, int]


@dataclass(frozen=True)
class AItem:
    """Incident change; deletions are stamped with the deletion round"""
    edge: Edge
    insert: bool
    stamp: int


@dataclass(frozen=True)
class BItem:
    """Tell `target` about incident `edge`; only valid while both incidents keep these rounds"""
    edge: Edge
    target: int
    t_edge: int
    t_target: int


QueueEntry = Union[AItem, BItem]


class TriangleCliqueNode(NodeAlgorithm):
    """
    Maintains S = T^{v,2} whenever the consistency flag is set.

    Config keys:
        skip_step2_removals: leave S untouched on incident deletions
    """

    name = "triangle"

    def __init__(self, node_id: int, n: int, config: Optional[Dict[str, Any]] = None):
        super().__init__(node_id, n, config)
        self.S: Dict[Edge, int] = {}
        self.witnesses: Dict[Edge, Dict[Witness, int]] = {}
        self.Q: Deque[QueueEntry] = deque()
        self.skip_step2_removals = bool(self.config.get("skip_step2_removals", False))
        self._pre_nonempty = False

    def _refresh(self, edge: Edge) -> None:
        marks = self.witnesses.get(edge)
        if marks:
            self.S[edge] = max(marks.values())
        else:
            self.witnesses.pop(edge, None)
            self.S.pop(edge, None)

    def _drop(self, edge: Edge, *tags: Witness) -> None:
        marks = self.witnesses.get(edge)
        if marks is None:
            return
        for tag in tags:
            marks.pop(tag, None)
        self._refresh(edge)

    def _set_witness(self, edge: Edge, tag: Witness, stamp: int) -> None:
        self.witnesses.setdefault(edge, {})[tag] = stamp
        self._refresh(edge)

    def _remove_incident(self, edge: Edge) -> None:
        u = edge.other(self.v)
        self.t_incident.pop(u)
        self.S.pop(edge, None)
        if self.skip_step2_removals:
            return
        for known in [e for e in self.witnesses if u in e]:
            tags = [tag for tag in self.witnesses[known]
                    if tag[0] == PATTERN_B or tag == (PATTERN_A, u)]
            self._drop(known, *tags)
        for known in [e for e in self.S if u in e and self.v not in e]:
            z = known.other(u)
            if z not in self.t_incident or self.S[known] < self.t_incident[z]:
                self.witnesses.pop(known, None)
                self.S.pop(known, None)

    def on_topology(self, indications: NodeIndications, round_no: int) -> None:
        deleted = []
        for edge in sorted(indications.deletions):
            self._remove_incident(edge)
            deleted.append(AItem(edge, False, round_no))
        inserted = []
        for edge in sorted(indications.insertions):
            self.t_incident[edge.other(self.v)] = round_no
            self.S[edge] = round_no
            inserted.append(AItem(edge, True, round_no))
        self.Q.extend(deleted)
        self.Q.extend(inserted)

    def _is_current(self, item: BItem) -> bool:
        u = item.edge.other(self.v)
        return (self.t_incident.get(u) == item.t_edge
                and self.t_incident.get(item.target) == item.t_target)

    def select_outgoing(self, round_no: int) -> Dict[int, Packet]:
        self._pre_nonempty = bool(self.Q)
        if not self.Q:
            return {}
        is_empty = False
        item = self.Q.popleft()
        outbox: Dict[int, Packet] = {}
        if isinstance(item, AItem):
            wire = EdgeUpdateA(item.edge, item.insert)
            for y, t_vy in sorted(self.t_incident.items()):
                if item.stamp >= t_vy:
                    outbox[y] = Packet(wire, is_empty=is_empty)
        elif self._is_current(item):
            outbox[item.target] = Packet(PairB(item.edge, item.target), is_empty=is_empty)
        for y in self.t_incident:
            outbox.setdefault(y, Packet(None, is_empty=is_empty))
        return outbox

    def _closure_check(self, edge: Edge) -> None:
        """Queue a mark-B notice when one incident edge strictly predates the other"""
        a, b = edge.nodes
        if a not in self.t_incident or b not in self.t_incident:
            return
        t_a, t_b = self.t_incident[a], self.t_incident[b]
        t_prime = self.S[edge]
        if t_a < t_b <= t_prime:
            self.Q.append(BItem(Edge(self.v, a), b, t_a, t_b))
        elif t_b < t_a <= t_prime:
            self.Q.append(BItem(Edge(self.v, b), a, t_b, t_a))

    def on_receive(self, inbox: Dict[int, Packet], round_no: int) -> None:
        flagged = False
        for sender, packet in sorted(inbox.items()):
            flagged = flagged or not packet.is_empty
            item = packet.item
            if item is None or self.v in item.edge:
                continue
            if isinstance(item, EdgeUpdateA):
                if item.insert:
                    self._set_witness(item.edge, (PATTERN_A, sender), self.t_incident[sender])
                    self._closure_check(item.edge)
                else:
                    self._drop(item.edge, (PATTERN_A, sender), (PATTERN_B, sender))
            elif isinstance(item, PairB):
                x = item.edge.other(sender)
                if x in self.t_incident:
                    stamp = min(self.t_incident[sender], self.t_incident[x]) - 1
                    self._set_witness(item.edge, (PATTERN_B, sender), stamp)
        self.C = not (self._pre_nonempty or self.Q or flagged)

    def _members(self, target: Any) -> FrozenSet[int]:
        members = frozenset(int(node) for node in target)
        if len(members) != len(tuple(target)):
            raise ValidationError(f"Repeated node in query {tuple(target)}")
        if not 3 <= len(members) <= 6:
            raise ValidationError(f"Clique queries take 3..6 nodes, got {len(members)}")
        if self.v not in members:
            raise NotOwnQuery(f"Node {self.v} is not in {sorted(members)}")
        return members

    def query_clique(self, target: Any) -> QueryResult:
        members = self._members(target)
        if not self.C:
            return QueryResult.INCONSISTENT
        return QueryResult.of(all(Edge(a, b) in self.S for a, b in combinations(sorted(members), 2)))

    def query_triangle(self, target: Any) -> QueryResult:
        if len(tuple(target)) != 3:
            raise ValidationError(f"Triangle queries take 3 nodes, got {tuple(target)}")
        return self.query_clique(target)

    def query(self, target: Any) -> QueryResult:
        if isinstance(target, Edge):
            if not self.C:
                return QueryResult.INCONSISTENT
            return QueryResult.of(target in self.S)
        return self.query_clique(target)

    def pending_items(self) -> int:
        return len(self.Q)

    def edge_set(self):
        return set(self.S)


def verify_triangles(nodes: Sequence[TriangleCliqueNode], history: History,
                     i: int, ctx: VerifyContext) -> int:
    """
    S must equal the temporal-pattern set and triangle answers must match enumeration.

    Raises:
        OracleMismatch: On the first disagreement
    """
    graph = history.graph_at(i)
    triangles = enumerate_triangles(graph)
    checks = 0
    for node in nodes:
        if not node.is_consistent():
            continue
        expected = temporal_T2(history, node.v, i)
        believed = node.edge_set()
        if believed != expected:
            missing = sorted(str(e) for e in expected - believed)
            extra = sorted(str(e) for e in believed - expected)
            raise OracleMismatch(
                f"Round {i}, node {node.v}: missing {missing}, extra {extra}",
                round_no=i, node=node.v)
        others = [u for u in range(graph.n) if u != node.v]
        for pair in ctx.sample(list(combinations(others, 2))):
            triple = frozenset((node.v,) + pair)
            answer = node.query_triangle(tuple(sorted(triple)))
            if answer is not QueryResult.of(triple in triangles):
                raise OracleMismatch(
                    f"Round {i}, node {node.v}: triangle {sorted(triple)} answered {answer.value}",
                    round_no=i, node=node.v)
            checks += 1
    return checks


def verify_cliques(nodes: Sequence[TriangleCliqueNode], history: History,
                   i: int, ctx: VerifyContext, sizes: Tuple[int, ...] = (3, 4, 5)) -> int:
    """
    Every clique through a consistent node answers true; sampled non-cliques answer false.

    Raises:
        OracleMismatch: On the first disagreement
    """
    graph = history.graph_at(i)
    cliques = {k: enumerate_cliques(graph, k) for k in sizes}
    checks = 0
    for node in nodes:
        if not node.is_consistent():
            continue
        for k in sizes:
            own = sorted(tuple(sorted(c)) for c in cliques[k] if node.v in c)
            for members in own:
                if node.query_clique(members) is not QueryResult.TRUE:
                    raise OracleMismatch(
                        f"Round {i}, node {node.v}: {k}-clique {list(members)} not listed",
                        round_no=i, node=node.v)
                checks += 1
            others = [u for u in range(graph.n) if u != node.v]
            if len(others) < k - 1:
                continue
            for _ in range(min(ctx.sample_targets, 8)):
                candidate = frozenset([node.v] + ctx.rng.sample(others, k - 1))
                if candidate in cliques[k]:
                    continue
                if node.query_clique(candidate) is QueryResult.TRUE:
                    raise OracleMismatch(
                        f"Round {i}, node {node.v}: non-clique {sorted(candidate)} answered true",
                        round_no=i, node=node.v)
                checks += 1
    return checks

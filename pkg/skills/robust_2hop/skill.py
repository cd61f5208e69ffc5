"""
Robust 2-Hop Skill

Per-node data structure that lists the (v,i)-robust edges of a node's 2-hop
neighborhood: every incident edge plus each {u,w} inserted no earlier than a
surviving incident edge {v,u}. Non-incident edges carry an imaginary
timestamp t' standing in for the true insertion round the node cannot see.

Features:
- Timestamp-filtered broadcast of incident changes
- Step-2 removal rule on incident deletions
- Per-sender witnesses so that a stale delete from one endpoint never
  cancels a fresher insert from the other
- Ideal-clock twin and a fault switch for regression harnesses
"""

import logging
import sys
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Deque, Dict, Optional, Sequence

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import OracleMismatch, ValidationError
from skills.dynamic_graph import Edge, NodeIndications
from skills.oracle import History, robust_2hop
from skills.sim_engine import EdgeUpdateA, NodeAlgorithm, Packet, QueryResult, VerifyContext

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QueueItem:
    """Incident change plus the edge's insertion round used by the destination filter"""
    edge: Edge
    insert: bool
    stamp: int


def as_edge(target: Any) -> Edge:
    if isinstance(target, Edge):
        return target
    try:
        a, b = target
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Edge query needs two node ids, got {target!r}") from e
    return Edge(int(a), int(b))


class Robust2HopNode(NodeAlgorithm):
    """
    Maintains S = R^{v,2} at every round where the consistency flag is set.

    Config keys:
        ideal_clock: callable Edge -> true insertion round; t' takes the true
                     value instead of the witness timestamp
        skip_step2_removals: leave S untouched on incident deletions
    """

    name = "robust2hop"

    def __init__(self, node_id: int, n: int, config: Optional[Dict[str, Any]] = None):
        super().__init__(node_id, n, config)
        self.S: Dict[Edge, int] = {}
        self.witnesses: Dict[Edge, Dict[int, int]] = {}
        self.Q: Deque[QueueItem] = deque()
        self.ideal_clock: Optional[Callable[[Edge], int]] = self.config.get("ideal_clock")
        self.skip_step2_removals = bool(self.config.get("skip_step2_removals", False))

    def _refresh(self, edge: Edge) -> None:
        """Recompute t' from the remaining witnesses; forget the edge when none remain"""
        marks = self.witnesses.get(edge)
        if not marks:
            self.witnesses.pop(edge, None)
            self.S.pop(edge, None)
            return
        if self.ideal_clock is not None:
            self.S[edge] = self.ideal_clock(edge)
        else:
            self.S[edge] = max(marks.values())

    def _drop_witness(self, edge: Edge, sender: int) -> None:
        marks = self.witnesses.get(edge)
        if marks is not None and sender in marks:
            del marks[sender]
            self._refresh(edge)

    def _remove_incident(self, edge: Edge) -> int:
        u = edge.other(self.v)
        t_old = self.t_incident.pop(u)
        self.S.pop(edge, None)
        if self.skip_step2_removals:
            return t_old
        for known in [e for e in self.witnesses if u in e]:
            self._drop_witness(known, u)
        for known in [e for e in self.S if u in e and self.v not in e]:
            z = known.other(u)
            if z not in self.t_incident or self.S[known] < self.t_incident[z]:
                self.witnesses.pop(known, None)
                self.S.pop(known, None)
        return t_old

    def on_topology(self, indications: NodeIndications, round_no: int) -> None:
        deleted = []
        for edge in sorted(indications.deletions):
            deleted.append(QueueItem(edge, False, self._remove_incident(edge)))
        inserted = []
        for edge in sorted(indications.insertions):
            u = edge.other(self.v)
            self.t_incident[u] = round_no
            self.S[edge] = round_no
            inserted.append(QueueItem(edge, True, round_no))
        self.Q.extend(deleted)
        self.Q.extend(inserted)

    def select_outgoing(self, round_no: int) -> Dict[int, Packet]:
        if not self.Q:
            return {}
        item = self.Q.popleft()
        is_empty = not self.Q
        wire = EdgeUpdateA(item.edge, item.insert)
        outbox = {}
        for y, t_vy in sorted(self.t_incident.items()):
            if item.stamp >= t_vy:
                outbox[y] = Packet(wire, is_empty=is_empty)
            elif not is_empty:
                outbox[y] = Packet(None, is_empty=False)
        return outbox

    def on_receive(self, inbox: Dict[int, Packet], round_no: int) -> None:
        flagged = False
        for sender, packet in sorted(inbox.items()):
            flagged = flagged or not packet.is_empty
            item = packet.item
            if not isinstance(item, EdgeUpdateA) or self.v in item.edge:
                continue
            if item.insert:
                self.witnesses.setdefault(item.edge, {})[sender] = self.t_incident[sender]
                self._refresh(item.edge)
            else:
                self._drop_witness(item.edge, sender)
        self.C = not self.Q and not flagged

    def query(self, target: Any) -> QueryResult:
        edge = as_edge(target)
        if not self.C:
            return QueryResult.INCONSISTENT
        return QueryResult.of(edge in self.S)

    def pending_items(self) -> int:
        return len(self.Q)

    def edge_set(self):
        return set(self.S)


def verify_robust_2hop(nodes: Sequence[Robust2HopNode], history: History,
                       i: int, ctx: VerifyContext) -> int:
    """
    Compare every consistent node's S with the oracle's robust set.

    Raises:
        OracleMismatch: On the first disagreement
    """
    checks = 0
    for node in nodes:
        if not node.is_consistent():
            continue
        expected = robust_2hop(history, node.v, i)
        believed = node.edge_set()
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

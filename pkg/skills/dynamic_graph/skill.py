"""
Dynamic Graph Skill

Holds the evolving graph G_i of a highly dynamic network on a fixed node set,
applies per-round topology events and tracks the true insertion round t_e of
every edge. Algorithms only ever see the per-node indications; the global
view (including t_e of non-incident edges) is reserved for the oracles.
"""

import logging
import sys
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import InvalidEvent

logger = logging.getLogger(__name__)

NEVER_INSERTED = -1


class EventKind(Enum):
    """Kind of a topology change, valued by its trace mnemonic"""
    INSERT = "I"
    DELETE = "D"


@dataclass(frozen=True, order=True)
class Edge:
    """Undirected edge stored canonically with a < b"""
    a: int
    b: int

    def __post_init__(self):
        if self.a == self.b:
            raise InvalidEvent(f"Self-loop on node {self.a} is not an edge")
        if self.a > self.b:
            low, high = self.b, self.a
            object.__setattr__(self, "a", low)
            object.__setattr__(self, "b", high)

    def other(self, node: int) -> int:
        """Return the endpoint that is not `node`"""
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise ValueError(f"Node {node} is not an endpoint of {self}")

    def __contains__(self, node: int) -> bool:
        return node == self.a or node == self.b

    @property
    def nodes(self) -> Tuple[int, int]:
        return (self.a, self.b)

    def __str__(self) -> str:
        return f"{{{self.a},{self.b}}}"


@dataclass(frozen=True)
class TopologyEvent:
    """A single edge insertion or deletion landing at the start of a round"""
    round: int
    edge: Edge
    kind: EventKind

    def to_line(self) -> str:
        return f"{self.round} {self.kind.value} {self.edge.a} {self.edge.b}"


@dataclass
class NodeIndications:
    """Changes to a node's incident edges delivered at the start of a round"""
    deletions: List[Edge] = field(default_factory=list)
    insertions: List[Edge] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.deletions or self.insertions)


def parse_event_line(line: str, n: Optional[int] = None) -> TopologyEvent:
    """
    Parse one `round op u v` trace record.

    Raises:
        InvalidEvent: If the record is malformed
    """
    parts = line.split()
    if len(parts) != 4:
        raise InvalidEvent(f"Malformed event record: {line!r}")
    round_text, op, u_text, v_text = parts
    try:
        round_no, u, v = int(round_text), int(u_text), int(v_text)
        kind = EventKind(op)
    except ValueError as e:
        raise InvalidEvent(f"Malformed event record: {line!r}") from e
    if round_no < 0:
        raise InvalidEvent(f"Negative round in record: {line!r}")
    if n is not None:
        for node in (u, v):
            if not 0 <= node < n:
                raise InvalidEvent(f"Node {node} outside [0, {n}) in record: {line!r}")
    return TopologyEvent(round_no, Edge(u, v), kind)


class GraphState:
    """
    Global view of G_i: present edges plus latest insertion rounds.

    Mutation happens only through apply_events(); copy() gives an independent
    snapshot that oracles can hold on to.
    """

    def __init__(self, n: int):
        if n < 1:
            raise InvalidEvent(f"Network needs at least one node, got n={n}")
        self.n = n
        self.present: Set[Edge] = set()
        self.t: Dict[Edge, int] = {}
        self.round = 0
        self._adjacency: Dict[int, Set[int]] = defaultdict(set)

    def copy(self) -> "GraphState":
        clone = GraphState(self.n)
        clone.present = set(self.present)
        clone.t = dict(self.t)
        clone.round = self.round
        for node, nbrs in self._adjacency.items():
            if nbrs:
                clone._adjacency[node] = set(nbrs)
        return clone

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.n:
            raise InvalidEvent(f"Node {node} outside [0, {self.n})")

    def validate_batch(self, events: Iterable[TopologyEvent]) -> List[TopologyEvent]:
        """
        Check one round's batch against the current state.

        Raises:
            InvalidEvent: On mixed rounds, duplicate edges, or
                          inserting a present / deleting an absent edge
        """
        events = list(events)
        rounds = {event.round for event in events}
        if len(rounds) > 1:
            raise InvalidEvent(f"Batch mixes rounds {sorted(rounds)}")
        if rounds and min(rounds) < self.round:
            raise InvalidEvent(f"Round {min(rounds)} precedes current round {self.round}")
        seen: Set[Edge] = set()
        for event in events:
            self._check_node(event.edge.a)
            self._check_node(event.edge.b)
            if event.edge in seen:
                raise InvalidEvent(f"Edge {event.edge} appears twice in round {event.round}")
            seen.add(event.edge)
            if event.kind is EventKind.INSERT and event.edge in self.present:
                raise InvalidEvent(f"Insert of present edge {event.edge} in round {event.round}")
            if event.kind is EventKind.DELETE and event.edge not in self.present:
                raise InvalidEvent(f"Delete of absent edge {event.edge} in round {event.round}")
        return events

    def apply_events(self, events: Iterable[TopologyEvent],
                     round_no: Optional[int] = None) -> Dict[int, NodeIndications]:
        """
        Apply one round's batch: deletions first, then insertions.

        Args:
            events: Topology events that all carry the same round
            round_no: Round to stamp when the batch is empty

        Returns:
            Per-node indications for the endpoints touched by the batch

        Raises:
            InvalidEvent: If the batch is invalid (state is left untouched)
        """
        events = self.validate_batch(events)
        if events:
            self.round = events[0].round
        elif round_no is not None:
            self.round = max(self.round, round_no)

        indications: Dict[int, NodeIndications] = defaultdict(NodeIndications)
        deletions = sorted(e.edge for e in events if e.kind is EventKind.DELETE)
        insertions = sorted(e.edge for e in events if e.kind is EventKind.INSERT)

        for edge in deletions:
            self.present.discard(edge)
            self._adjacency[edge.a].discard(edge.b)
            self._adjacency[edge.b].discard(edge.a)
            indications[edge.a].deletions.append(edge)
            indications[edge.b].deletions.append(edge)

        for edge in insertions:
            self.present.add(edge)
            self.t[edge] = self.round
            self._adjacency[edge.a].add(edge.b)
            self._adjacency[edge.b].add(edge.a)
            indications[edge.a].insertions.append(edge)
            indications[edge.b].insertions.append(edge)

        if events:
            logger.debug(f"Round {self.round}: {len(deletions)} deletions, "
                         f"{len(insertions)} insertions")
        return dict(indications)

    def edge_exists(self, edge: Edge) -> bool:
        return edge in self.present

    def insertion_time(self, edge: Edge) -> int:
        """Latest insertion round of `edge`, or -1 if it was never inserted"""
        return self.t.get(edge, NEVER_INSERTED)

    def neighbors(self, node: int) -> FrozenSet[int]:
        return frozenset(self._adjacency.get(node, ()))

    def adjacency(self) -> Dict[int, Set[int]]:
        """Fresh adjacency map rebuilt from the present edge set"""
        adj: Dict[int, Set[int]] = {node: set() for node in range(self.n)}
        for edge in self.present:
            adj[edge.a].add(edge.b)
            adj[edge.b].add(edge.a)
        return adj

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphState):
            return NotImplemented
        return (self.n, self.present, self.t) == (other.n, other.present, other.t)

    def __repr__(self) -> str:
        return f"GraphState(n={self.n}, round={self.round}, edges={len(self.present)})"


def apply_events(state: GraphState,
                 events: Iterable[TopologyEvent]) -> Tuple[GraphState, Dict[int, NodeIndications]]:
    """Functional form of GraphState.apply_events that leaves `state` untouched"""
    updated = state.copy()
    indications = updated.apply_events(events)
    return updated, indications


def replay(n: int, events: Iterable[TopologyEvent]) -> GraphState:
    """
    Rebuild the graph from a full event history.

    Raises:
        InvalidEvent: If the history is not valid
    """
    state = GraphState(n)
    batch: List[TopologyEvent] = []
    for event in events:
        if batch and event.round != batch[0].round:
            state.apply_events(batch)
            batch = []
        batch.append(event)
    if batch:
        state.apply_events(batch)
    return state

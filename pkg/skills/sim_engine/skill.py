"""
Simulation Engine Skill

Drives synchronous rounds of a highly dynamic network: topology changes land
at the start of a round, every node selects at most one packet per incident
edge, packets travel over the edges present after the change, nodes update on
receipt and then report their consistency flag.

Features:
- Wire item types with a deterministic bit-size encoding
- Per-edge bandwidth enforcement
- Amortized inconsistency ratio tracking (JSON and CSV output)
- Stabilize barriers with a liveness cap
- Optional per-round oracle verification and JSON-lines round traces
"""

import csv
import json
import logging
import random
import sys
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import (
    BandwidthViolation,
    InvariantViolation,
    StabilizeTimeout,
    load_skill_config,
    log_event,
)
from skills.dynamic_graph import Edge, GraphState, NodeIndications, TopologyEvent
from skills.oracle import History

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
# tag, two flags, mark and hop counter
HEADER_BITS = 8

T = TypeVar("T")


def ceil_log2(n: int) -> int:
    """Bits needed for one node id, never less than 1"""
    return max(1, (n - 1).bit_length())


def default_bandwidth_bits(n: int) -> int:
    return 3 * ceil_log2(n) + HEADER_BITS


class WireItem:
    """Mixin giving every queue item its encoded size"""

    def node_ids(self) -> Tuple[int, ...]:
        raise NotImplementedError

    def payload_bits(self) -> int:
        return 0

    def describe(self) -> Dict[str, Any]:
        data = asdict(self)
        data["type"] = type(self).__name__
        return data


@dataclass(frozen=True)
class EdgeUpdateA(WireItem):
    """Incident edge change, broadcast with the pattern-(a) mark"""
    edge: Edge
    insert: bool

    def node_ids(self) -> Tuple[int, ...]:
        return self.edge.nodes


@dataclass(frozen=True)
class PairB(WireItem):
    """Triangle-closure notice: `edge` is sent to the third vertex `via`"""
    edge: Edge
    via: int

    def node_ids(self) -> Tuple[int, ...]:
        return self.edge.nodes + (self.via,)


@dataclass(frozen=True)
class PathInsert(WireItem):
    """Simple path starting at the sender, one or two edges long"""
    path: Tuple[int, ...]

    def node_ids(self) -> Tuple[int, ...]:
        return self.path


@dataclass(frozen=True)
class EdgeDelete3(WireItem):
    """Deleted edge with its hop counter; `via` names the relaying neighbor"""
    edge: Edge
    hops: int
    via: Optional[int] = None

    def node_ids(self) -> Tuple[int, ...]:
        if self.via is None:
            return self.edge.nodes
        return self.edge.nodes + (self.via,)


@dataclass(frozen=True)
class SnapshotChunk(WireItem):
    """Slice of an adjacency bitmask; bit j stands for node offset + j"""
    owner: int
    bits: int
    width: int

    def node_ids(self) -> Tuple[int, ...]:
        return (self.owner,)

    def payload_bits(self) -> int:
        return self.width


@dataclass(frozen=True)
class Packet:
    """What one node hands to one neighbor in a round; true flags are the default"""
    item: Optional[WireItem] = None
    is_empty: bool = True
    are_neighbors_empty: bool = True

    @property
    def carries_flag(self) -> bool:
        return not (self.is_empty and self.are_neighbors_empty)


def message_bits(message: Union[Packet, WireItem], n: int) -> int:
    """Encoded size: header plus ceil(log2 n) bits per node id plus raw payload"""
    item = message.item if isinstance(message, Packet) else message
    if item is None:
        return HEADER_BITS
    return HEADER_BITS + len(item.node_ids()) * ceil_log2(n) + item.payload_bits()


class QueryResult(Enum):
    TRUE = "true"
    FALSE = "false"
    INCONSISTENT = "inconsistent"

    @classmethod
    def of(cls, value: bool) -> "QueryResult":
        return cls.TRUE if value else cls.FALSE


class NodeAlgorithm(ABC):
    """
    Behavioral contract for the per-node part of a distributed data structure.

    The engine calls, in order each round: on_topology, select_outgoing,
    on_receive, then reads is_consistent. query must not mutate state.
    """

    name = "abstract"
    # One item per neighbor queue per round instead of one per node
    MULTI_QUEUE = False

    def __init__(self, node_id: int, n: int, config: Optional[Dict[str, Any]] = None):
        self.v = node_id
        self.n = n
        self.config = dict(config or {})
        self.t_incident: Dict[int, int] = {}
        self.C = True

    @classmethod
    def bandwidth_bits(cls, n: int, config: Optional[Dict[str, Any]] = None) -> int:
        return default_bandwidth_bits(n)

    def neighbors(self) -> List[int]:
        return sorted(self.t_incident)

    def incident_time(self, u: int) -> int:
        return self.t_incident.get(u, -1)

    @abstractmethod
    def on_topology(self, indications: NodeIndications, round_no: int) -> None:
        """Process this round's incident deletions and insertions"""

    @abstractmethod
    def select_outgoing(self, round_no: int) -> Dict[int, Packet]:
        """Dequeue and address packets; keys must be current neighbors"""

    @abstractmethod
    def on_receive(self, inbox: Dict[int, Packet], round_no: int) -> None:
        """Apply packets received this round, keyed by sender"""

    @abstractmethod
    def query(self, target: Any) -> QueryResult:
        """Answer without communication"""

    @abstractmethod
    def pending_items(self) -> int:
        """Upper bound on queue items this node may still emit"""

    def is_consistent(self) -> bool:
        return self.C


AlgorithmFactory = Callable[[int, int], NodeAlgorithm]


@dataclass
class VerifyContext:
    """Randomness and sampling policy handed to a verifier each round"""
    rng: random.Random
    exhaustive: bool
    sample_targets: int

    def sample(self, population: Sequence[T]) -> List[T]:
        population = list(population)
        if self.exhaustive or len(population) <= self.sample_targets:
            return population
        return self.rng.sample(population, self.sample_targets)


Verifier = Callable[[Sequence[NodeAlgorithm], History, int, VerifyContext], int]


class StabilizeBarrier:
    """Scenario token asking the engine to run quiet rounds until all nodes are consistent"""

    def __repr__(self) -> str:
        return "STABILIZE"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StabilizeBarrier)

    def __hash__(self) -> int:
        return hash("STABILIZE")


STABILIZE = StabilizeBarrier()

ScenarioStep = Union[List[TopologyEvent], StabilizeBarrier]


@dataclass
class SimConfig:
    """Engine settings; unset values fall back to the skill's config.yaml"""
    n: int
    max_rounds: Optional[int] = None
    seed: int = 0
    verify: bool = False
    bandwidth_bits: Optional[int] = None
    sample_targets: int = 64
    exhaustive_limit: int = 16
    stabilize_factor: int = 10
    record_traces: bool = False
    final_stabilize: bool = True

    @classmethod
    def from_settings(cls, n: int, **overrides: Any) -> "SimConfig":
        settings = load_skill_config(Path(__file__).parent).get("engine", {})
        known = {name for name in cls.__dataclass_fields__ if name != "n"}
        values = {key: value for key, value in settings.items() if key in known}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(n=n, **values)


@dataclass
class RoundStats:
    round: int
    changes: int
    inconsistent: bool
    messages: int
    bits: int
    ratio: float


@dataclass
class Metrics:
    """Counters for one run plus the per-round prefix ratio series"""
    rounds: int = 0
    topology_changes: int = 0
    inconsistent_rounds: int = 0
    messages: int = 0
    bits: int = 0
    max_message_bits: int = 0
    verified_checks: int = 0
    per_round: List[RoundStats] = field(default_factory=list)

    @property
    def ratio_series(self) -> List[float]:
        return [row.ratio for row in self.per_round]

    def record_round(self, round_no: int, changes: int, inconsistent: bool,
                     messages: int = 0, bits: int = 0) -> float:
        self.rounds += 1
        self.topology_changes += changes
        if inconsistent:
            self.inconsistent_rounds += 1
        self.messages += messages
        self.bits += bits
        ratio = self.inconsistent_rounds / max(1, self.topology_changes)
        self.per_round.append(RoundStats(round_no, changes, inconsistent, messages, bits, ratio))
        return ratio

    def amortized_ratio(self) -> float:
        if self.topology_changes == 0:
            return 0.0
        return max(self.ratio_series, default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "rounds": self.rounds,
            "topology_changes": self.topology_changes,
            "inconsistent_rounds": self.inconsistent_rounds,
            "messages": self.messages,
            "bits": self.bits,
            "max_message_bits": self.max_message_bits,
            "verified_checks": self.verified_checks,
            "max_ratio": self.amortized_ratio(),
            "ratio_series": self.ratio_series,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["round", "changes", "inconsistent", "messages", "bits", "ratio"])
            for row in self.per_round:
                writer.writerow([row.round, row.changes, int(row.inconsistent),
                                 row.messages, row.bits, f"{row.ratio:.6f}"])
        return path


def amortized_ratio(metrics: Metrics) -> float:
    return metrics.amortized_ratio()


@dataclass
class RoundTrace:
    round: int
    indications: Dict[int, Dict[str, List[List[int]]]]
    messages: List[Dict[str, Any]]
    consistent: List[bool]
    checks: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "round": self.round,
            "indications": {str(node): data for node, data in sorted(self.indications.items())},
            "messages": self.messages,
            "consistent": self.consistent,
            "checks": self.checks,
        }


def write_traces(traces: Iterable[RoundTrace], path: Union[str, Path]) -> Path:
    """One JSON object per line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for trace in traces:
            handle.write(json.dumps(trace.to_dict(), sort_keys=True) + "\n")
    return path


class Simulation:
    """
    One synchronous run over a fixed node set.

    Message collection and delivery iterate nodes in id order so identical
    inputs give identical traces.
    """

    def __init__(self, factory: AlgorithmFactory, config: SimConfig,
                 verifier: Optional[Verifier] = None):
        self.config = config
        self.n = config.n
        self.graph = GraphState(config.n)
        self.history = History(config.n)
        self.nodes: List[NodeAlgorithm] = [factory(v, config.n) for v in range(config.n)]
        self.verifier = verifier if config.verify else None
        self.metrics = Metrics()
        self.traces: List[RoundTrace] = []
        self.round = 0
        self._sampling = random.Random(f"{config.seed}:sampling")
        self._verify_ctx = VerifyContext(
            rng=self._sampling,
            exhaustive=config.n <= config.exhaustive_limit,
            sample_targets=config.sample_targets,
        )
        algorithm_cls = type(self.nodes[0])
        self.bandwidth_bits = (config.bandwidth_bits if config.bandwidth_bits is not None
                               else algorithm_cls.bandwidth_bits(config.n, self.nodes[0].config))
        self.multi_queue = algorithm_cls.MULTI_QUEUE

    def all_consistent(self) -> bool:
        return all(node.is_consistent() for node in self.nodes)

    def pending_items(self) -> int:
        return sum(node.pending_items() for node in self.nodes)

    def step(self, events: Iterable[TopologyEvent] = ()) -> RoundTrace:
        """
        Execute one round.

        Raises:
            InvalidEvent: If the batch is invalid for the current graph
            BandwidthViolation: If a packet exceeds the budget
            InvariantViolation: If a node addresses a non-neighbor
            OracleMismatch: In verify mode, when a consistent node is wrong
        """
        round_no = self.round + 1
        stamped = [TopologyEvent(round_no, event.edge, event.kind) for event in events]
        indications = self.graph.apply_events(stamped, round_no)
        self.round = round_no
        self.history.record(self.graph, stamped)

        quiet = NodeIndications()
        for node in self.nodes:
            node.on_topology(indications.get(node.v, quiet), round_no)

        inboxes: Dict[int, Dict[int, Packet]] = {v: {} for v in range(self.n)}
        sent: List[Dict[str, Any]] = []
        round_messages = 0
        round_bits = 0
        for node in self.nodes:
            outbox = node.select_outgoing(round_no)
            present = self.graph.neighbors(node.v)
            if not self.multi_queue:
                items = {packet.item for packet in outbox.values() if packet.item is not None}
                if len(items) > 1:
                    raise InvariantViolation(
                        f"Round {round_no}: node {node.v} dequeued {len(items)} items")
            for dst in sorted(outbox):
                packet = outbox[dst]
                if dst not in present:
                    raise InvariantViolation(
                        f"Round {round_no}: node {node.v} addressed non-neighbor {dst}")
                if packet.item is None and not packet.carries_flag:
                    continue
                bits = message_bits(packet, self.n)
                if bits > self.bandwidth_bits:
                    raise BandwidthViolation(
                        f"Round {round_no}: {node.v}->{dst} needs {bits} bits, "
                        f"budget is {self.bandwidth_bits}")
                if packet.item is not None:
                    round_messages += 1
                round_bits += bits
                self.metrics.max_message_bits = max(self.metrics.max_message_bits, bits)
                inboxes[dst][node.v] = packet
                if self.config.record_traces:
                    sent.append({
                        "src": node.v,
                        "dst": dst,
                        "item": packet.item.describe() if packet.item is not None else None,
                        "is_empty": packet.is_empty,
                        "are_neighbors_empty": packet.are_neighbors_empty,
                        "bits": bits,
                    })

        for node in self.nodes:
            node.on_receive(inboxes[node.v], round_no)

        flags = [node.is_consistent() for node in self.nodes]
        self.metrics.record_round(round_no, len(stamped), not all(flags),
                                  round_messages, round_bits)

        checks = 0
        if self.verifier is not None:
            checks = self.verifier(self.nodes, self.history, round_no, self._verify_ctx)
            self.metrics.verified_checks += checks

        trace = RoundTrace(
            round=round_no,
            indications={
                v: {
                    "deletions": [list(e.nodes) for e in ind.deletions],
                    "insertions": [list(e.nodes) for e in ind.insertions],
                }
                for v, ind in indications.items()
            },
            messages=sent,
            consistent=flags,
            checks=checks,
        )
        if self.config.record_traces:
            self.traces.append(trace)
        return trace

    def stabilize(self, max_quiet_rounds: Optional[int] = None) -> int:
        """
        Run event-free rounds until every node reports consistency.

        Args:
            max_quiet_rounds: Cap on rounds; defaults to
                stabilize_factor * (pending items + 2)

        Returns:
            Number of rounds taken (0 if already consistent)

        Raises:
            StabilizeTimeout: If the cap is reached first
        """
        if max_quiet_rounds is None:
            max_quiet_rounds = self.config.stabilize_factor * (self.pending_items() + 2)
        taken = 0
        while not self.all_consistent():
            if taken >= max_quiet_rounds:
                log_event("sim_engine", "stabilize", "error",
                          {"round": self.round, "cap": max_quiet_rounds})
                raise StabilizeTimeout(
                    f"Not stabilized after {taken} quiet rounds (round {self.round})")
            self.step([])
            taken += 1
        return taken

    def run(self, steps: Iterable[ScenarioStep],
            max_rounds: Optional[int] = None) -> Tuple[Metrics, List[RoundTrace]]:
        """
        Play a scenario: one round per event batch, barriers resolved by stabilize().

        Stops issuing batches once max_rounds real rounds have run, pads with
        quiet rounds up to max_rounds, then optionally stabilizes.
        """
        max_rounds = max_rounds if max_rounds is not None else self.config.max_rounds
        for step in steps:
            if max_rounds is not None and self.round >= max_rounds:
                logger.info(f"Scenario truncated at round {self.round}")
                break
            if isinstance(step, StabilizeBarrier):
                self.stabilize()
            else:
                self.step(step)
        if max_rounds is not None:
            while self.round < max_rounds:
                self.step([])
        if self.config.final_stabilize:
            self.stabilize()
        log_event("sim_engine", "run", "success", {
            "rounds": self.metrics.rounds,
            "changes": self.metrics.topology_changes,
            "max_ratio": round(self.metrics.amortized_ratio(), 6),
        })
        return self.metrics, self.traces


def run(factory: AlgorithmFactory, steps: Iterable[ScenarioStep], config: SimConfig,
        verifier: Optional[Verifier] = None) -> Tuple[Metrics, List[RoundTrace]]:
    return Simulation(factory, config, verifier).run(steps)

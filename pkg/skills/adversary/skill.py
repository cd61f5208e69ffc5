"""
Adversary Skill

Scenario generators producing topology event schedules for the simulator,
including the counterexample and lower-bound constructions used as stress
tests. A scenario is a list of steps: one event batch per virtual round, or a
stabilize barrier that the engine resolves by running quiet rounds.

Features:
- Seeded random churn and heavy-tailed (Pareto) session churn
- Triangle flicker counterexample
- Membership-listing, k-cycle and 3-path lower-bound schedules
- Line-oriented trace format with STABILIZE pseudo-records
"""

import logging
import math
import random
import sys
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import (
    BadDimensions,
    InvalidEvent,
    PatternIsClique,
    ValidationError,
    validate_int_input,
    validate_probability,
)
from skills.dynamic_graph import Edge, EventKind, GraphState, TopologyEvent, parse_event_line
from skills.sim_engine import STABILIZE, ScenarioStep, StabilizeBarrier

logger = logging.getLogger(__name__)

STABILIZE_TOKEN = "STABILIZE"
FLICKER_V, FLICKER_U, FLICKER_W = 0, 1, 2
MAX_FLICKER_PADS = 4

EdgeLike = Union[Edge, Tuple[int, int]]


@dataclass
class Scenario:
    """Named schedule of event batches and stabilize barriers on n nodes"""
    name: str
    n: int
    steps: List[ScenarioStep] = field(default_factory=list)
    seed: Optional[int] = None
    description: str = ""

    @property
    def rounds(self) -> int:
        """Number of event batches (virtual rounds)"""
        return sum(1 for step in self.steps if not isinstance(step, StabilizeBarrier))

    @property
    def barriers(self) -> int:
        return sum(1 for step in self.steps if isinstance(step, StabilizeBarrier))

    def events(self) -> List[TopologyEvent]:
        return [event for step in self.steps
                if not isinstance(step, StabilizeBarrier) for event in step]

    @property
    def topology_changes(self) -> int:
        return len(self.events())

    def validate(self) -> GraphState:
        """
        Replay every batch against an empty graph.

        Raises:
            InvalidEvent: If any batch breaks the graph rules
        """
        state = GraphState(self.n)
        for step in self.steps:
            if not isinstance(step, StabilizeBarrier):
                state.apply_events(step)
        return state

    def to_lines(self) -> List[str]:
        lines = [f"# n={self.n} rounds={self.rounds}"]
        if self.description:
            lines.append(f"# {self.description}")
        virtual = 0
        for step in self.steps:
            if isinstance(step, StabilizeBarrier):
                lines.append(f"{virtual} {STABILIZE_TOKEN}")
                continue
            virtual += 1
            lines.extend(TopologyEvent(virtual, event.edge, event.kind).to_line()
                         for event in step)
        return lines

    def write_trace(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(self.to_lines()) + "\n", encoding="utf-8")
        return path


class ScheduleBuilder:
    """Accumulates batches while tracking the present edge set so every batch stays valid"""

    def __init__(self, n: int):
        self.n = n
        self.present: Set[Edge] = set()
        self.steps: List[ScenarioStep] = []
        self.round = 0

    def batch(self, insert: Iterable[EdgeLike] = (), delete: Iterable[EdgeLike] = ()) -> int:
        self.round += 1
        removed = sorted(Edge(*e) if not isinstance(e, Edge) else e for e in delete)
        added = sorted(Edge(*e) if not isinstance(e, Edge) else e for e in insert)
        events = []
        for edge in removed:
            if edge not in self.present:
                raise InvalidEvent(f"Schedule deletes absent edge {edge} in round {self.round}")
            self.present.discard(edge)
            events.append(TopologyEvent(self.round, edge, EventKind.DELETE))
        for edge in added:
            if edge in self.present or edge in removed:
                raise InvalidEvent(f"Schedule re-inserts {edge} in round {self.round}")
            self.present.add(edge)
            events.append(TopologyEvent(self.round, edge, EventKind.INSERT))
        self.steps.append(events)
        return self.round

    def stabilize(self) -> None:
        self.steps.append(STABILIZE)

    def build(self, name: str, seed: Optional[int] = None, description: str = "") -> Scenario:
        return Scenario(name, self.n, list(self.steps), seed, description)


def empty_scenario(n: int, rounds: int = 0) -> Scenario:
    builder = ScheduleBuilder(n)
    for _ in range(rounds):
        builder.batch()
    return builder.build("empty", description="no topology changes")


def gen_random_churn(n: int, rounds: int, p_ins: float, p_del: float,
                     seed: int) -> Scenario:
    """
    Every round, each present edge is deleted w.p. p_del and each absent one
    inserted w.p. p_ins, scanning pairs in canonical order.
    """
    validate_int_input(n, "n", min_value=2)
    validate_int_input(rounds, "rounds", min_value=0)
    p_ins = validate_probability(p_ins, "p_ins")
    p_del = validate_probability(p_del, "p_del")
    rng = random.Random(seed)
    pairs = [Edge(a, b) for a, b in combinations(range(n), 2)]
    builder = ScheduleBuilder(n)
    for _ in range(rounds):
        inserts, deletes = [], []
        for edge in pairs:
            draw = rng.random()
            if edge in builder.present:
                if draw < p_del:
                    deletes.append(edge)
            elif draw < p_ins:
                inserts.append(edge)
        builder.batch(inserts, deletes)
    return builder.build("random", seed,
                         f"random churn p_ins={p_ins} p_del={p_del} seed={seed}")


def sample_session_lengths(tail_exponent: float, count: int, seed: int) -> List[int]:
    """Pareto session lengths in whole rounds, never shorter than one round"""
    if tail_exponent <= 1:
        raise ValidationError(f"tail_exponent must exceed 1, got {tail_exponent}")
    rng = random.Random(seed)
    return [max(1, math.floor(rng.paretovariate(tail_exponent))) for _ in range(count)]


def gen_heavy_tail_churn(n: int, rounds: int, tail_exponent: float, seed: int,
                         start_probability: float = 0.02) -> Scenario:
    """
    Absent edges start a session w.p. start_probability per round; the session
    lasts a Pareto-distributed number of rounds before the edge is deleted.
    An edge deleted in a round can start again only in a later round.
    """
    validate_int_input(n, "n", min_value=2)
    validate_int_input(rounds, "rounds", min_value=0)
    if tail_exponent <= 1:
        raise ValidationError(f"tail_exponent must exceed 1, got {tail_exponent}")
    start_probability = validate_probability(start_probability, "start_probability")
    rng = random.Random(seed)
    pairs = [Edge(a, b) for a, b in combinations(range(n), 2)]
    ends: Dict[Edge, int] = {}
    builder = ScheduleBuilder(n)
    for r in range(1, rounds + 1):
        deletes = sorted(edge for edge, end in ends.items() if end == r)
        for edge in deletes:
            del ends[edge]
        inserts = []
        for edge in pairs:
            if edge in ends or edge in deletes:
                continue
            if rng.random() < start_probability:
                length = max(1, math.floor(rng.paretovariate(tail_exponent)))
                ends[edge] = r + length
                inserts.append(edge)
        builder.batch(inserts, deletes)
    return builder.build("heavy_tail", seed,
                         f"pareto sessions alpha={tail_exponent} start={start_probability}")


def gen_flicker_triangle(n: int) -> Scenario:
    """
    Triangle {v,u,w} whose edge {u,w} is deleted while {v,u} and {v,w} flicker,
    timed so that w's deletion notice for {u,w} finds no listener at v.

    Pads attached to w keep w's queue busy so the flicker rounds of {v,u} and
    {v,w} differ. n >= 7 gives the full padding; n = 3 is the bare variant.
    """
    if n < 3:
        raise BadDimensions(f"Flicker needs at least 3 nodes, got {n}")
    v, u, w = FLICKER_V, FLICKER_U, FLICKER_W
    pads = list(range(3, 3 + min(MAX_FLICKER_PADS, n - 3)))
    builder = ScheduleBuilder(n)
    builder.batch(insert=[(v, u), (v, w)])
    builder.batch(insert=[(u, w)])
    builder.stabilize()
    if pads:
        builder.batch(insert=[(w, p) for p in pads])
    builder.batch(delete=[(u, w), (v, u)])
    builder.batch()
    builder.batch(insert=[(v, u)])
    builder.batch(delete=[(v, w)])
    builder.batch(insert=[(v, w)])
    builder.stabilize()
    return builder.build("flicker", description=f"triangle flicker with {len(pads)} pads")


def gen_membership_lb(pattern_k: int, pattern_edges: Sequence[Tuple[int, int]],
                      n: int, t: int) -> Scenario:
    """
    Membership-listing lower-bound schedule for a k-vertex non-clique pattern H.

    With a, b the first non-adjacent pair of H, the remaining k-2 pattern
    vertices are wired on nodes 0..k-3. Each iteration takes a fresh node u,
    connects it like a, waits, disconnects it, connects it like b, and waits.

    Raises:
        PatternIsClique: If H has no non-adjacent pair
        BadDimensions: If t > n - k + 2
    """
    validate_int_input(pattern_k, "pattern_k", min_value=2)
    validate_int_input(t, "t", min_value=1)
    pattern = {Edge(a, b) for a, b in pattern_edges}
    for edge in pattern:
        if edge.b >= pattern_k:
            raise ValidationError(f"Pattern edge {edge} outside [0, {pattern_k})")
    pair = next(((a, b) for a, b in combinations(range(pattern_k), 2)
                 if Edge(a, b) not in pattern), None)
    if pair is None:
        raise PatternIsClique(f"Pattern on {pattern_k} vertices is a clique")
    if t > n - pattern_k + 2:
        raise BadDimensions(f"t={t} needs n >= {t + pattern_k - 2}, got n={n}")
    a, b = pair
    rest = [x for x in range(pattern_k) if x not in pair]
    place = {x: index for index, x in enumerate(rest)}
    core = [(place[e.a], place[e.b]) for e in sorted(pattern) if e.a in place and e.b in place]
    n_a = [place[x] for x in rest if Edge(a, x) in pattern]
    n_b = [place[x] for x in rest if Edge(b, x) in pattern]

    builder = ScheduleBuilder(n)
    if core:
        builder.batch(insert=core)
        builder.stabilize()
    for ell in range(1, t + 1):
        fresh = pattern_k - 2 + ell - 1
        builder.batch(insert=[(fresh, x) for x in n_a])
        builder.stabilize()
        builder.batch(delete=[(fresh, x) for x in n_a])
        builder.batch(insert=[(fresh, x) for x in n_b])
        builder.stabilize()
    return builder.build("membership_lb",
                         description=f"k={pattern_k} pattern, pair {pair}, t={t}")


def cycle_lb_layout(k: int, n: int) -> Tuple[int, int, int, int]:
    """
    (gamma, t, D, attach) for the k-cycle schedule.

    Raises:
        BadDimensions: If n is not a perfect square leaving room for both rows
    """
    if k < 6:
        raise BadDimensions(f"Cycle lower bound needs k >= 6, got {k}")
    gamma = math.ceil(k / 2) - 1
    t = math.isqrt(n)
    if t * t != n:
        raise BadDimensions(f"n={n} is not a perfect square")
    d = t - gamma
    attach = 2 * d // 3
    if d < 1 or attach < 1:
        raise BadDimensions(f"n={n} too small for k={k}: D={d}")
    return gamma, t, d, attach


def gen_cycle_lb(k: int, n: int, seed: int = 0) -> Scenario:
    """
    Two-phase k-cycle schedule on t rows of gamma path nodes u^j and D leaf
    nodes v^j, with t = sqrt(n).

    Phase I wires each row: u^1 to a seeded 2D/3 of the row's v's, u^2 to all
    of them, and the chain u^2..u^gamma. Phase II connects rows pairwise
    through u^1 and u^gamma, waits, and disconnects. For odd k each row is
    shortened by one afterwards; with k = 7 the row's v's move from u^2 to u^3.
    """
    gamma, t, d, attach = cycle_lb_layout(k, n)
    rng = random.Random(seed)

    def u_node(ell: int, j: int) -> int:
        return (ell - 1) * gamma + (j - 1)

    def v_node(ell: int, j: int) -> int:
        return gamma * t + (ell - 1) * d + (j - 1)

    builder = ScheduleBuilder(n)
    for ell in range(1, t + 1):
        leaves = [v_node(ell, j) for j in range(1, d + 1)]
        chosen = sorted(rng.sample(leaves, attach))
        edges = [(u_node(ell, 1), x) for x in chosen]
        edges += [(u_node(ell, 2), x) for x in leaves]
        edges += [(u_node(ell, j), u_node(ell, j + 1)) for j in range(2, gamma)]
        builder.batch(insert=edges)
        builder.stabilize()

    odd = k % 2 == 1
    for ell in range(1, t + 1):
        for m in range(1, ell):
            links = [(u_node(ell, 1), u_node(m, 1)), (u_node(ell, gamma), u_node(m, gamma))]
            builder.batch(insert=links)
            builder.stabilize()
            builder.batch(delete=links)
        if odd:
            if gamma - 2 >= 2:
                builder.batch(
                    delete=[(u_node(ell, gamma - 2), u_node(ell, gamma - 1)),
                            (u_node(ell, gamma - 1), u_node(ell, gamma))],
                    insert=[(u_node(ell, gamma - 2), u_node(ell, gamma))])
            else:
                leaves = [v_node(ell, j) for j in range(1, d + 1)]
                builder.batch(
                    delete=[(u_node(ell, 2), x) for x in leaves]
                    + [(u_node(ell, 2), u_node(ell, 3))],
                    insert=[(u_node(ell, 3), x) for x in leaves])
    return builder.build("cycle_lb", seed,
                         f"k={k} gamma={gamma} t={t} D={d} attach={attach}")


def gen_path3_lb(n: int, seed: int = 0) -> Scenario:
    """
    3-path variant of the cycle schedule: each of the t = sqrt(n) rows is one
    hub holding a seeded 2D/3 of its D = t - 1 leaves, and hubs are linked
    pairwise, waited on, and unlinked.

    Raises:
        BadDimensions: If n is not a perfect square or leaves no room for leaves
    """
    t = math.isqrt(n)
    if t * t != n:
        raise BadDimensions(f"n={n} is not a perfect square")
    d = t - 1
    attach = 2 * d // 3
    if attach < 1:
        raise BadDimensions(f"n={n} too small for the 3-path schedule: D={d}")
    rng = random.Random(seed)
    hubs = list(range(t))

    builder = ScheduleBuilder(n)
    for ell in range(t):
        leaves = [t + ell * d + j for j in range(d)]
        builder.batch(insert=[(hubs[ell], x) for x in sorted(rng.sample(leaves, attach))])
        builder.stabilize()
    for ell in range(t):
        for m in range(ell):
            builder.batch(insert=[(hubs[ell], hubs[m])])
            builder.stabilize()
            builder.batch(delete=[(hubs[ell], hubs[m])])
    return builder.build("path3_lb", seed, f"3-path schedule t={t} D={d} attach={attach}")


def parse_trace(lines: Iterable[str], n: Optional[int] = None,
                name: str = "trace") -> Scenario:
    """
    Read `round op u v` records plus `round STABILIZE` barriers.

    A `# n=<int>` header supplies n when the caller does not.

    Raises:
        InvalidEvent: On malformed records, decreasing rounds or a missing n
    """
    header_n: Optional[int] = None
    batches: Dict[int, List[TopologyEvent]] = {}
    barriers: Set[int] = set()
    records: List[str] = []
    last_round = 0
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if token.startswith("n="):
                    try:
                        header_n = int(token[2:])
                    except ValueError as e:
                        raise InvalidEvent(f"Bad header token {token!r}") from e
            continue
        records.append(line)

    size = n if n is not None else header_n
    if size is None:
        raise InvalidEvent("Trace has no '# n=' header and no node count was given")

    for line in records:
        parts = line.split()
        if len(parts) == 2 and parts[1] == STABILIZE_TOKEN:
            try:
                round_no = int(parts[0])
            except ValueError as e:
                raise InvalidEvent(f"Malformed barrier record: {line!r}") from e
            if round_no < last_round:
                raise InvalidEvent(f"Round {round_no} after round {last_round}: {line!r}")
            barriers.add(round_no)
            last_round = round_no
            continue
        event = parse_event_line(line, size)
        if event.round < 1:
            raise InvalidEvent(f"Scenario rounds start at 1: {line!r}")
        if event.round < last_round:
            raise InvalidEvent(f"Round {event.round} after round {last_round}: {line!r}")
        last_round = event.round
        batches.setdefault(event.round, []).append(event)

    steps: List[ScenarioStep] = []
    if 0 in barriers:
        steps.append(STABILIZE)
    for round_no in range(1, last_round + 1):
        steps.append(batches.get(round_no, []))
        if round_no in barriers:
            steps.append(STABILIZE)
    scenario = Scenario(name, size, steps, description=f"trace with {len(records)} records")
    scenario.validate()
    return scenario


def load_trace(path: Union[str, Path], n: Optional[int] = None) -> Scenario:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        return parse_trace(handle, n, name=path.stem)

import pytest

from shared.utils import NotOwnQuery, ValidationError
from skills.adversary import ScheduleBuilder, gen_membership_lb, gen_random_churn
from skills.dynamic_graph import Edge, NodeIndications
from skills.naive_2hop import (
    Naive2HopNode,
    chunk_count,
    decode_snapshot,
    encode_snapshot,
    payload_width,
    verify_naive_2hop,
)
from skills.robust_2hop import Robust2HopNode
from skills.sim_engine import EdgeUpdateA, Packet, QueryResult, SimConfig, Simulation, SnapshotChunk


def naive(v, n):
    return Naive2HopNode(v, n)


def test_payload_width_and_chunks():
    assert payload_width(16) == 4
    assert payload_width(16, {"payload_bits": 8}) == 8
    assert chunk_count(16, 4) == 4
    assert chunk_count(32, 5) == 7
    assert Naive2HopNode.bandwidth_bits(16) == 20


def test_snapshot_encoding():
    chunks = encode_snapshot(0, {1, 3, 9}, 10, 4)
    assert [c.width for c in chunks] == [4, 4, 2]
    assert chunks[0] == SnapshotChunk(0, 0b1010, 4)
    assert decode_snapshot(chunks, 4) == {1, 3, 9}


def test_new_neighbor_gets_snapshot_then_updates():
    node = Naive2HopNode(0, 16)
    node.on_topology(NodeIndications(insertions=[Edge(0, 1)]), 1)
    outbox = node.select_outgoing(1)
    assert isinstance(outbox[1].item, SnapshotChunk)
    assert not outbox[1].is_empty
    assert node.pending_items() == 3

    node.on_topology(NodeIndications(insertions=[Edge(0, 2)]), 2)
    assert list(node.queues[1])[-1] == EdgeUpdateA(Edge(0, 2), True)
    assert len(node.queues[2]) == 4
    assert set(node.select_outgoing(2)) == {1, 2}


def test_receiver_decodes_snapshot():
    node = Naive2HopNode(1, 8)
    node.on_topology(NodeIndications(insertions=[Edge(0, 1)]), 1)
    for chunk in encode_snapshot(0, {1, 5}, 8, 3):
        node.on_receive({0: Packet(chunk, is_empty=False)}, 1)
    assert node.known[0] == {1, 5}
    node.on_receive({0: Packet(EdgeUpdateA(Edge(0, 6), True))}, 2)
    assert node.believed_edges() == {Edge(0, 1), Edge(0, 5), Edge(0, 6)}


@pytest.mark.parametrize("seed", [0, 1])
def test_random_churn_matches_oracle(seed):
    scenario = gen_random_churn(8, 60, 0.1, 0.1, seed)
    sim = Simulation(naive, SimConfig(n=8, seed=seed, verify=True), verify_naive_2hop)
    metrics, _ = sim.run(scenario.steps)
    assert metrics.verified_checks > 0
    assert sim.nodes[0].query((0, 1)) in (QueryResult.TRUE, QueryResult.FALSE)


def test_snapshot_cost_grows_with_n():
    ratios = {}
    for n in (16, 32):
        scenario = gen_membership_lb(3, [(0, 1), (1, 2)], n, 8)
        sim = Simulation(naive, SimConfig(n=n))
        metrics, _ = sim.run(scenario.steps)
        assert metrics.topology_changes == 24
        ratios[n] = metrics.amortized_ratio()
    assert ratios[32] > ratios[16]


@pytest.mark.parametrize("n", [16, 32])
def test_robust_listing_stays_flat_on_the_same_schedule(n):
    scenario = gen_membership_lb(3, [(0, 1), (1, 2)], n, 8)
    sim = Simulation(lambda v, size: Robust2HopNode(v, size), SimConfig(n=n))
    metrics, _ = sim.run(scenario.steps)
    assert metrics.amortized_ratio() <= 1


def test_subgraph_membership_through_center():
    builder = ScheduleBuilder(6)
    builder.batch(insert=[(0, 1), (0, 2), (1, 3), (2, 3)])
    builder.stabilize()
    sim = Simulation(naive, SimConfig(n=6, verify=True), verify_naive_2hop)
    sim.run(builder.build("square").steps)
    node = sim.nodes[0]
    assert node.query_subgraph([(0, 1), (1, 3), (3, 2), (2, 0)]) is QueryResult.TRUE
    assert node.query_subgraph([(0, 1), (1, 3)]) is QueryResult.TRUE
    assert node.query_subgraph([(0, 1), (1, 4)]) is QueryResult.FALSE
    assert node.query_subgraph([Edge(0, 2), Edge(0, 5)]) is QueryResult.FALSE


def test_subgraph_query_validation():
    node = Naive2HopNode(0, 8)
    with pytest.raises(NotOwnQuery):
        node.query_subgraph([(1, 2), (2, 3)])
    with pytest.raises(ValidationError):
        node.query_subgraph([])
    with pytest.raises(ValidationError):
        node.query_subgraph([(0, 1), (1, 2), (2, 3), (3, 4)])


def test_subgraph_query_inconsistent_while_snapshot_pending():
    node = Naive2HopNode(0, 16)
    node.on_topology(NodeIndications(insertions=[Edge(0, 1)]), 1)
    node.select_outgoing(1)
    node.on_receive({}, 1)
    assert node.query_subgraph([(0, 1)]) is QueryResult.INCONSISTENT

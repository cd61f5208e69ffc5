import random
from itertools import combinations

import pytest

from shared.utils import NotOwnQuery, OracleMismatch, ValidationError
from skills.adversary import ScheduleBuilder, gen_flicker_triangle, gen_random_churn
from skills.sim_engine import EdgeUpdateA, Packet, QueryResult, SimConfig, Simulation
from skills.dynamic_graph import Edge, NodeIndications
from skills.triangle_clique import TriangleCliqueNode, verify_cliques, verify_triangles


def triangle(v, n):
    return TriangleCliqueNode(v, n)


def test_old_closure_learned_through_pattern_b():
    builder = ScheduleBuilder(3)
    builder.batch(insert=[(1, 2)])
    builder.batch(insert=[(0, 1)])
    builder.batch(insert=[(0, 2)])
    builder.stabilize()
    sim = Simulation(triangle, SimConfig(n=3, verify=True), verify_triangles)
    sim.run(builder.build("closure").steps)
    node = sim.nodes[0]
    assert Edge(1, 2) in node.edge_set()
    assert node.S[Edge(1, 2)] == 1
    assert node.query_triangle((0, 1, 2)) is QueryResult.TRUE


def test_flicker_triangle_answers_false():
    sim = Simulation(triangle, SimConfig(n=7, verify=True), verify_triangles)
    sim.run(gen_flicker_triangle(7).steps)
    assert sim.nodes[0].query_triangle((0, 1, 2)) is QueryResult.FALSE


def test_query_validation():
    node = TriangleCliqueNode(0, 8)
    with pytest.raises(NotOwnQuery):
        node.query_clique((1, 2, 3))
    with pytest.raises(ValidationError):
        node.query_clique((0, 0, 1))
    with pytest.raises(ValidationError):
        node.query_clique(range(7))
    with pytest.raises(ValidationError):
        node.query_triangle((0, 1, 2, 3))


def test_clique_listed_after_simultaneous_insertion():
    builder = ScheduleBuilder(5)
    builder.batch(insert=[(a, b) for a in range(4) for b in range(a + 1, 4)])
    builder.stabilize()
    sim = Simulation(triangle, SimConfig(n=5, verify=True), verify_cliques)
    sim.run(builder.build("k4").steps)
    for v in range(4):
        assert sim.nodes[v].query_clique((0, 1, 2, 3)) is QueryResult.TRUE
    assert sim.nodes[0].query_clique((0, 1, 4)) is QueryResult.FALSE


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_churn_matches_oracle(seed):
    scenario = gen_random_churn(8, 80, 0.1, 0.1, seed)
    sim = Simulation(triangle, SimConfig(n=8, seed=seed, verify=True), verify_triangles)
    metrics, _ = sim.run(scenario.steps)
    assert metrics.verified_checks > 0
    assert metrics.amortized_ratio() <= 3


def test_cliques_match_oracle_on_dense_churn():
    scenario = gen_random_churn(7, 60, 0.25, 0.1, seed=4)
    sim = Simulation(triangle, SimConfig(n=7, seed=4, verify=True), verify_cliques)
    metrics, _ = sim.run(scenario.steps)
    assert metrics.verified_checks > 0


def test_flicker_without_removals_is_caught():
    sim = Simulation(lambda v, n: TriangleCliqueNode(v, n, {"skip_step2_removals": True}),
                     SimConfig(n=7, verify=True), verify_triangles)
    with pytest.raises(OracleMismatch):
        sim.run(gen_flicker_triangle(7).steps)


def test_stale_edge_kept_without_removals_is_caught():
    builder = ScheduleBuilder(3)
    builder.batch(insert=[(0, 1)])
    builder.batch(insert=[(1, 2)])
    builder.stabilize()
    builder.batch(delete=[(0, 1)])
    builder.stabilize()
    sim = Simulation(lambda v, n: TriangleCliqueNode(v, n, {"skip_step2_removals": True}),
                     SimConfig(n=3, verify=True), verify_triangles)
    with pytest.raises(OracleMismatch):
        sim.run(builder.build("detach").steps)


def test_delete_with_remaining_witness_leaves_node_flagged():
    node = TriangleCliqueNode(0, 4)
    node.on_topology(NodeIndications(insertions=[Edge(0, 1), Edge(0, 2)]), 1)
    node.select_outgoing(1)
    node.select_outgoing(2)
    node.on_receive({1: Packet(EdgeUpdateA(Edge(1, 2), True)),
                     2: Packet(EdgeUpdateA(Edge(1, 2), True))}, 2)
    node.select_outgoing(3)
    node.on_receive({1: Packet(EdgeUpdateA(Edge(1, 2), False)),
                     2: Packet(None, is_empty=False)}, 3)
    assert Edge(1, 2) in node.edge_set()
    assert node.query_triangle((0, 1, 2)) is QueryResult.INCONSISTENT
    node.select_outgoing(4)
    node.on_receive({2: Packet(EdgeUpdateA(Edge(1, 2), False))}, 4)
    assert node.query_triangle((0, 1, 2)) is QueryResult.FALSE


def test_stale_delete_from_one_neighbor_keeps_fresh_report():
    # node 6 is busy, so its old insert and stale delete of {1,6} arrive at
    # node 0 after node 1 reported the re-insertion; 0-6 is then removed
    builder = ScheduleBuilder(7)
    builder.batch(insert=[(0, 1), (0, 6)])
    builder.stabilize()
    builder.batch(insert=[(2, 6), (3, 6), (4, 6), (5, 6)])
    builder.batch(insert=[(1, 6)])
    builder.batch(delete=[(1, 6)])
    builder.batch(insert=[(1, 6)])
    builder.batch()
    builder.batch()
    builder.batch(delete=[(0, 6)])
    builder.batch(insert=[(0, 6)])
    builder.stabilize()
    sim = Simulation(triangle, SimConfig(n=7, verify=True), verify_triangles)
    metrics, _ = sim.run(builder.build("reinsert_race").steps)
    assert metrics.verified_checks > 0
    assert sim.nodes[0].query_triangle((0, 1, 6)) is QueryResult.TRUE


def test_sender_stays_inconsistent_in_its_last_send_round():
    builder = ScheduleBuilder(5)
    builder.batch(insert=[(1, 2)])
    builder.batch(insert=[(0, 1), (0, 3), (0, 4)])
    builder.batch(insert=[(0, 2)])
    sim = Simulation(triangle, SimConfig(n=5, verify=True), verify_triangles)
    for step in builder.steps:
        sim.step(step)
    sim.step([])
    sim.step([])
    node = sim.nodes[0]
    # {0,2} went out this round; {1,2} only arrives later as a closure notice
    assert node.pending_items() == 0
    assert Edge(1, 2) not in node.edge_set()
    assert not node.is_consistent()
    sim.stabilize()
    assert node.is_consistent()
    assert node.S[Edge(1, 2)] == 1


def planted_clique_schedule(n, k, rounds, seed):
    inside = {Edge(a, b) for a, b in combinations(range(k), 2)}
    outside = [Edge(a, b) for a, b in combinations(range(n), 2) if Edge(a, b) not in inside]
    rng = random.Random(seed)
    builder = ScheduleBuilder(n)
    builder.batch(insert=sorted(inside))
    for _ in range(rounds):
        inserts, deletes = [], []
        for edge in outside:
            if rng.random() < 0.06:
                (deletes if edge in builder.present else inserts).append(edge)
        builder.batch(inserts, deletes)
    builder.stabilize()
    return builder


@pytest.mark.parametrize("k", [3, 4, 5])
def test_planted_clique_under_churn(k):
    builder = planted_clique_schedule(10, k, 40, seed=k)
    sim = Simulation(triangle, SimConfig(n=10, seed=k, verify=True), verify_cliques)
    metrics, _ = sim.run(builder.build(f"planted_k{k}").steps)
    assert metrics.verified_checks > 0
    planted = tuple(range(k))
    for v in planted:
        assert sim.nodes[v].query_clique(planted) is QueryResult.TRUE

    builder.batch(delete=[(0, 1)])
    sim.step(builder.steps[-1])
    sim.stabilize()
    for v in planted:
        assert sim.nodes[v].query_clique(planted) is QueryResult.FALSE

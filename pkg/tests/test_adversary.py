import pytest

from shared.utils import BadDimensions, InvalidEvent, PatternIsClique, ValidationError
from skills.adversary import (
    ScheduleBuilder,
    cycle_lb_layout,
    empty_scenario,
    gen_cycle_lb,
    gen_flicker_triangle,
    gen_heavy_tail_churn,
    gen_membership_lb,
    gen_path3_lb,
    gen_random_churn,
    load_trace,
    parse_trace,
    sample_session_lengths,
)
from skills.sim_engine import StabilizeBarrier


def test_random_churn_is_seeded():
    first = gen_random_churn(8, 20, 0.2, 0.2, seed=11)
    again = gen_random_churn(8, 20, 0.2, 0.2, seed=11)
    other = gen_random_churn(8, 20, 0.2, 0.2, seed=12)
    assert first.to_lines() == again.to_lines()
    assert first.to_lines() != other.to_lines()
    assert first.rounds == 20
    first.validate()


def test_random_churn_rejects_bad_probability():
    with pytest.raises(ValidationError):
        gen_random_churn(8, 5, 1.5, 0.1, seed=0)


def test_session_lengths_are_positive():
    lengths = sample_session_lengths(1.5, 500, seed=3)
    assert min(lengths) >= 1
    assert max(lengths) > 1
    with pytest.raises(ValidationError):
        sample_session_lengths(1.0, 5, seed=3)


def test_heavy_tail_churn_is_valid():
    scenario = gen_heavy_tail_churn(10, 80, 1.5, seed=2, start_probability=0.05)
    assert scenario.rounds == 80
    assert scenario.topology_changes > 0
    scenario.validate()


def test_flicker_event_counts():
    assert gen_flicker_triangle(3).topology_changes == 8
    assert gen_flicker_triangle(7).topology_changes == 12
    assert gen_flicker_triangle(7).barriers == 2
    with pytest.raises(BadDimensions):
        gen_flicker_triangle(2)


def test_membership_lb_on_three_path():
    scenario = gen_membership_lb(3, [(0, 1), (1, 2)], 10, 5)
    assert scenario.topology_changes == 3 * 5
    assert scenario.barriers == 2 * 5
    scenario.validate()


def test_membership_lb_wires_pattern_core():
    # triangle 0-1-2 with pendant 3: a=0, b=3, core edge {1,2}
    scenario = gen_membership_lb(4, [(0, 1), (0, 2), (1, 2), (2, 3)], 10, 3)
    assert scenario.topology_changes == 1 + 3 * (2 + 2 + 1)
    assert scenario.barriers == 1 + 2 * 3
    scenario.validate()


def test_membership_lb_rejects_cliques_and_small_networks():
    with pytest.raises(PatternIsClique):
        gen_membership_lb(3, [(0, 1), (1, 2), (0, 2)], 10, 2)
    with pytest.raises(BadDimensions):
        gen_membership_lb(3, [(0, 1), (1, 2)], 5, 10)


def test_cycle_lb_layout():
    assert cycle_lb_layout(6, 25) == (2, 5, 3, 2)
    with pytest.raises(BadDimensions):
        cycle_lb_layout(6, 24)
    with pytest.raises(BadDimensions):
        cycle_lb_layout(5, 25)


def test_cycle_lb_event_counts():
    gamma, t, d, attach = cycle_lb_layout(6, 25)
    scenario = gen_cycle_lb(6, 25, seed=1)
    phase_one = t * (attach + d + gamma - 2)
    phase_two = sum(4 * (ell - 1) for ell in range(1, t + 1))
    assert scenario.topology_changes == phase_one + phase_two
    scenario.validate()


@pytest.mark.parametrize("k,n", [(7, 36), (9, 64)])
def test_odd_cycle_lb_is_valid(k, n):
    gen_cycle_lb(k, n, seed=0).validate()


def test_builder_rejects_deleting_absent_edge():
    builder = ScheduleBuilder(4)
    with pytest.raises(InvalidEvent):
        builder.batch(delete=[(0, 1)])


def test_trace_round_trip(tmp_path):
    scenario = gen_flicker_triangle(7)
    path = scenario.write_trace(tmp_path / "flicker.trace")
    loaded = load_trace(path)
    assert loaded.n == 7
    assert loaded.to_lines()[2:] == scenario.to_lines()[2:]
    assert [isinstance(s, StabilizeBarrier) for s in loaded.steps] == \
        [isinstance(s, StabilizeBarrier) for s in scenario.steps]


def test_empty_scenario_trace():
    lines = empty_scenario(4, 3).to_lines()
    parsed = parse_trace(lines)
    assert parsed.n == 4
    assert parsed.topology_changes == 0


@pytest.mark.parametrize("lines", [
    ["# n=4", "1 I 0 1", "1 X 1 2"],
    ["# n=4", "2 I 0 1", "1 I 1 2"],
    ["# n=4", "1 D 0 1"],
    ["1 I 0 1"],
    ["# n=4", "1 I 0 7"],
])
def test_malformed_traces_are_rejected(lines):
    with pytest.raises(InvalidEvent):
        parse_trace(lines)


def test_path3_lb_event_counts():
    scenario = gen_path3_lb(16, seed=2)
    t, d = 4, 3
    assert scenario.topology_changes == t * (2 * d // 3) + 2 * (t * (t - 1) // 2)
    assert scenario.barriers == t + t * (t - 1) // 2
    scenario.validate()
    with pytest.raises(BadDimensions):
        gen_path3_lb(15)

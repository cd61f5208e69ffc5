import importlib

import pytest

from skills.adversary import cycle_lb_layout
from skills.simulator_cli import RunConfig, run_scenario

RATIO_LIMITS = {"robust2hop": 1, "triangle": 3, "clique": 3, "robust3hop": 6}

SUITE = {
    "cycle_lb_k6": dict(scenario="cycle_lb", n=25, k=6),
    "cycle_lb_k7": dict(scenario="cycle_lb", n=25, k=7),
    "path3_lb": dict(scenario="path3_lb", n=16),
    "membership_3path": dict(scenario="membership_lb", n=16, pattern_k=3,
                             pattern=[(0, 1), (1, 2)]),
    "membership_paw": dict(scenario="membership_lb", n=16, pattern_k=4,
                           pattern=[(0, 1), (0, 2), (1, 2), (2, 3)]),
    "heavy_tail": dict(scenario="heavy_tail", n=16, rounds=200, seed=1),
    "flicker": dict(scenario="flicker", n=7),
}

PACKAGES = ["adversary", "dynamic_graph", "naive_2hop", "oracle", "robust_2hop",
            "robust_3hop", "sim_engine", "simulator_cli", "triangle_clique"]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("DSL_N", "DSL_SEED", "DSL_ROUNDS", "DSL_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def test_cycle_layouts_fit():
    assert cycle_lb_layout(6, 25) == (2, 5, 3, 2)
    assert cycle_lb_layout(7, 25) == (3, 5, 2, 1)


@pytest.mark.parametrize("algo", ["robust2hop", "triangle", "robust3hop", "naive2hop"])
@pytest.mark.parametrize("name", sorted(SUITE))
def test_suite_stabilizes_within_ratio(algo, name):
    scenario, sim = run_scenario(RunConfig(algo=algo, **SUITE[name]))
    assert sim.all_consistent()
    assert sim.metrics.topology_changes == scenario.topology_changes
    if algo in RATIO_LIMITS:
        assert sim.metrics.amortized_ratio() <= RATIO_LIMITS[algo]


@pytest.mark.parametrize("algo", ["triangle", "cycles45"])
def test_metrics_repeat_for_equal_seeds(algo):
    config = RunConfig(algo=algo, scenario="random", n=10, rounds=80, seed=11)
    _, first = run_scenario(config)
    _, second = run_scenario(config)
    assert first.metrics.to_json() == second.metrics.to_json()


@pytest.mark.parametrize("package", PACKAGES)
def test_package_exports_resolve(package):
    module = importlib.import_module(f"skills.{package}")
    assert module.__all__
    for name in module.__all__:
        assert getattr(module, name) is not None


@pytest.mark.slow
@pytest.mark.parametrize("n", [8, 12, 16])
@pytest.mark.parametrize("algo", ["robust2hop", "triangle"])
@pytest.mark.parametrize("seed", range(5))
def test_two_hop_listing_at_full_scale(algo, n, seed):
    config = RunConfig(algo=algo, scenario="random", n=n, rounds=2000, seed=seed,
                       p_ins=0.05, p_del=0.05, verify=True)
    _, sim = run_scenario(config)
    assert sim.metrics.verified_checks > 0
    assert sim.metrics.amortized_ratio() <= RATIO_LIMITS[algo]


@pytest.mark.slow
@pytest.mark.parametrize("algo", ["robust3hop", "cycles45"])
@pytest.mark.parametrize("seed", range(5))
def test_three_hop_listing_at_full_scale(algo, seed):
    config = RunConfig(algo=algo, scenario="random", n=12, rounds=1000, seed=seed,
                       p_ins=0.05, p_del=0.05, verify=True)
    _, sim = run_scenario(config)
    assert sim.metrics.verified_checks > 0
    assert sim.metrics.amortized_ratio() <= RATIO_LIMITS["robust3hop"]

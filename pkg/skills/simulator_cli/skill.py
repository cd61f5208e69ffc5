"""
Simulator CLI Skill

Command-line and skill entry point for the dynamic subgraph listing
simulator. Wires an algorithm and a scenario into the round engine, writes
metrics and traces, and maps failures onto process exit codes.

Features:
- simulate: one run with optional oracle verification
- verify: exhaustive oracle checking on small networks (n <= 16)
- bench: algorithm x scenario x size x seed matrix to CSV
- Config defaults from config.yaml, DSL_* environment overrides
"""

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.utils import (
    InvariantViolation,
    OracleMismatch,
    ValidationError,
    VerificationError,
    get_env_setting,
    get_timestamp,
    load_skill_config,
    log_event,
    validate_choice,
    validate_int_input,
)
from skills.adversary import (
    Scenario,
    empty_scenario,
    gen_cycle_lb,
    gen_flicker_triangle,
    gen_heavy_tail_churn,
    gen_membership_lb,
    gen_path3_lb,
    gen_random_churn,
    load_trace,
)
from skills.naive_2hop import Naive2HopNode, verify_naive_2hop
from skills.robust_2hop import Robust2HopNode, verify_robust_2hop
from skills.robust_3hop import Robust3HopNode, verify_cycles, verify_sandwich
from skills.sim_engine import Metrics, NodeAlgorithm, SimConfig, Simulation, write_traces
from skills.triangle_clique import TriangleCliqueNode, verify_cliques, verify_triangles

logger = logging.getLogger(__name__)

SKILL_DIR = Path(__file__).parent
VERIFY_MAX_N = 16

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_INVARIANT = 3
EXIT_USAGE = 4

BENCH_COLUMNS = ["algorithm", "scenario", "n", "seed", "status", "max_ratio",
                 "messages", "bits", "wall_time_s", "error"]


@dataclass(frozen=True)
class AlgorithmSpec:
    node_cls: type
    verifier: Callable[..., int]
    description: str


ALGORITHMS: Dict[str, AlgorithmSpec] = {
    "robust2hop": AlgorithmSpec(Robust2HopNode, verify_robust_2hop,
                                "robust 2-hop edge listing"),
    "triangle": AlgorithmSpec(TriangleCliqueNode, verify_triangles,
                              "triangle membership listing"),
    "clique": AlgorithmSpec(TriangleCliqueNode, verify_cliques,
                            "k-clique membership listing (k = 3..5 checked)"),
    "robust3hop": AlgorithmSpec(Robust3HopNode, verify_sandwich,
                                "robust 3-hop edge listing"),
    "cycles45": AlgorithmSpec(Robust3HopNode, verify_cycles,
                              "4-cycle and 5-cycle listing"),
    "naive2hop": AlgorithmSpec(Naive2HopNode, verify_naive_2hop,
                               "full 2-hop listing baseline"),
}

SCENARIOS = ("random", "heavy_tail", "flicker", "membership_lb", "cycle_lb", "path3_lb",
             "empty", "trace")


@dataclass
class RunConfig:
    """Everything needed to reproduce one simulator run"""
    algo: str = "robust2hop"
    scenario: str = "random"
    n: int = 16
    rounds: int = 50
    max_rounds: Optional[int] = None
    seed: int = 0
    verify: bool = False
    p_ins: float = 0.05
    p_del: float = 0.05
    tail_exponent: float = 1.5
    k: int = 6
    t: Optional[int] = None
    pattern_k: int = 3
    pattern: List[Tuple[int, int]] = field(default_factory=lambda: [(0, 1), (1, 2)])
    trace_in: Optional[str] = None
    bandwidth: Optional[int] = None
    fault: bool = False

    @classmethod
    def from_settings(cls, **overrides: Any) -> "RunConfig":
        """
        Defaults from config.yaml, then DSL_SEED / DSL_N / DSL_ROUNDS, then overrides.
        """
        settings = load_skill_config(SKILL_DIR).get("defaults", {})
        known = set(cls.__dataclass_fields__)
        values = {key: value for key, value in settings.items() if key in known}
        if "pattern" in values:
            values["pattern"] = parse_pattern(values["pattern"])
        for name in ("seed", "n", "rounds"):
            env = get_env_setting(name.upper())
            if env is not None:
                try:
                    values[name] = int(env)
                except ValueError as e:
                    raise ValidationError(f"DSL_{name.upper()} must be an integer") from e
        values.update({key: value for key, value in overrides.items() if value is not None})
        config = cls(**values)
        config.validate()
        return config

    def validate(self) -> None:
        validate_choice(self.algo, "algorithm", ALGORITHMS)
        validate_choice(self.scenario, "scenario", SCENARIOS)
        validate_int_input(self.n, "n", min_value=2)
        validate_int_input(self.rounds, "rounds", min_value=0)
        if self.scenario == "trace" and not self.trace_in:
            raise ValidationError("Scenario 'trace' needs --trace-in")
        if self.max_rounds is not None:
            validate_int_input(self.max_rounds, "max_rounds", min_value=0)
        if self.bandwidth is not None:
            validate_int_input(self.bandwidth, "bandwidth", min_value=1)

    def node_config(self) -> Dict[str, Any]:
        return {"skip_step2_removals": True} if self.fault else {}


def parse_pattern(text: Any) -> List[Tuple[int, int]]:
    """'0-1,1-2' (or a list of pairs) -> [(0, 1), (1, 2)]"""
    if isinstance(text, (list, tuple)):
        return [(int(a), int(b)) for a, b in text]
    pairs = []
    for token in str(text).split(","):
        token = token.strip()
        if not token:
            continue
        try:
            a, b = token.split("-")
            pairs.append((int(a), int(b)))
        except ValueError as e:
            raise ValidationError(f"Bad pattern edge {token!r}, expected a-b") from e
    return pairs


def build_scenario(config: RunConfig) -> Scenario:
    name = config.scenario
    if name == "random":
        return gen_random_churn(config.n, config.rounds, config.p_ins, config.p_del, config.seed)
    if name == "heavy_tail":
        return gen_heavy_tail_churn(config.n, config.rounds, config.tail_exponent, config.seed)
    if name == "flicker":
        return gen_flicker_triangle(config.n)
    if name == "membership_lb":
        t = config.t if config.t is not None else config.n - config.pattern_k + 2
        return gen_membership_lb(config.pattern_k, config.pattern, config.n, t)
    if name == "cycle_lb":
        return gen_cycle_lb(config.k, config.n, config.seed)
    if name == "path3_lb":
        return gen_path3_lb(config.n, config.seed)
    if name == "empty":
        return empty_scenario(config.n, config.rounds)
    return load_trace(config.trace_in)


def build_simulation(config: RunConfig, record_traces: bool = False,
                     verify: Optional[bool] = None) -> Simulation:
    spec = ALGORITHMS[config.algo]
    node_config = config.node_config()

    def factory(v: int, n: int) -> NodeAlgorithm:
        return spec.node_cls(v, n, node_config)

    sim_config = SimConfig.from_settings(
        config.n,
        seed=config.seed,
        verify=config.verify if verify is None else verify,
        bandwidth_bits=config.bandwidth,
        record_traces=record_traces or None,
    )
    return Simulation(factory, sim_config, spec.verifier)


def run_scenario(config: RunConfig, record_traces: bool = False,
                 verify: Optional[bool] = None) -> Tuple[Scenario, Simulation]:
    """Generate the scenario and play it to completion"""
    scenario = build_scenario(config)
    if scenario.n != config.n:
        config = replace(config, n=scenario.n)
    sim = build_simulation(config, record_traces, verify)
    max_rounds = config.max_rounds
    log_event("simulator_cli", "run", "started", {
        "algorithm": config.algo, "scenario": scenario.name, "n": config.n, "seed": config.seed,
    })
    sim.run(scenario.steps, max_rounds=max_rounds)
    return scenario, sim


def summarize(config: RunConfig, scenario: Scenario, metrics: Metrics) -> Dict[str, Any]:
    return {
        "algorithm": config.algo,
        "scenario": scenario.name,
        "n": scenario.n,
        "seed": config.seed,
        "metrics": metrics.to_dict(),
    }


def simulate(config: RunConfig, metrics_out: Optional[str] = None,
             csv_out: Optional[str] = None, trace_out: Optional[str] = None,
             trace_jsonl: Optional[str] = None) -> Dict[str, Any]:
    """
    One run with the requested outputs written to disk.

    Raises:
        ValidationError, VerificationError, InvariantViolation
    """
    scenario, sim = run_scenario(config, record_traces=bool(trace_jsonl))
    if trace_out:
        scenario.write_trace(trace_out)
    if metrics_out:
        sim.metrics.write_json(metrics_out)
    if csv_out:
        sim.metrics.write_csv(csv_out)
    if trace_jsonl:
        write_traces(sim.traces, trace_jsonl)
    return summarize(config, scenario, sim.metrics)


def verify(config: RunConfig) -> Dict[str, Any]:
    """
    Run with oracle checks on every round and every target.

    Raises:
        ValidationError: If n exceeds the exhaustive limit
        OracleMismatch: On the first wrong answer from a consistent node
    """
    if config.scenario == "trace":
        config = replace(config, n=load_trace(config.trace_in).n)
    validate_int_input(config.n, "n", min_value=2)
    if config.n > VERIFY_MAX_N:
        raise ValidationError(
            f"verify checks every target and supports n <= {VERIFY_MAX_N}, got n={config.n}; "
            f"use 'simulate --verify' for sampled oracle checks on larger networks"
        )
    scenario, sim = run_scenario(config, verify=True)
    report = summarize(config, scenario, sim.metrics)
    report.update({
        "verified": True,
        "checks": sim.metrics.verified_checks,
        "fault_injected": config.fault,
    })
    return report


def bench(base: RunConfig, algorithms: Sequence[str], scenarios: Sequence[str],
          sizes: Sequence[int], seeds: Sequence[int], out: Optional[str] = None) -> List[Dict[str, Any]]:
    """
    Run the full matrix; a failing cell is recorded with its error instead of aborting.
    """
    rows = []
    for algo in algorithms:
        for scenario_name in scenarios:
            for n in sizes:
                for seed in seeds:
                    config = replace(base, algo=algo, scenario=scenario_name, n=n, seed=seed)
                    row: Dict[str, Any] = {"algorithm": algo, "scenario": scenario_name,
                                           "n": n, "seed": seed, "status": "ok",
                                           "max_ratio": "", "messages": "", "bits": "",
                                           "wall_time_s": "", "error": ""}
                    started = time.perf_counter()
                    try:
                        config.validate()
                        _, sim = run_scenario(config)
                        row.update({
                            "max_ratio": round(sim.metrics.amortized_ratio(), 6),
                            "messages": sim.metrics.messages,
                            "bits": sim.metrics.bits,
                        })
                    except (ValidationError, VerificationError, InvariantViolation) as e:
                        row.update({"status": "error", "error": f"{type(e).__name__}: {e}"})
                        log_event("simulator_cli", "bench", "warning",
                                  {"algorithm": algo, "scenario": scenario_name, "n": n,
                                   "error": type(e).__name__})
                    row["wall_time_s"] = round(time.perf_counter() - started, 4)
                    rows.append(row)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=BENCH_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
    return rows


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, VerificationError):
        return EXIT_VERIFICATION
    if isinstance(error, InvariantViolation):
        return EXIT_INVARIANT
    return EXIT_USAGE


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", choices=sorted(ALGORITHMS))
    parser.add_argument("--scenario", choices=SCENARIOS)
    parser.add_argument("--n", type=int)
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--max-rounds", dest="max_rounds", type=int,
                        help="truncate the scenario after this many rounds")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--p-ins", dest="p_ins", type=float)
    parser.add_argument("--p-del", dest="p_del", type=float)
    parser.add_argument("--tail-exponent", dest="tail_exponent", type=float)
    parser.add_argument("--k", type=int, help="cycle length for cycle_lb")
    parser.add_argument("--t", type=int, help="iterations for membership_lb")
    parser.add_argument("--pattern-k", dest="pattern_k", type=int)
    parser.add_argument("--pattern", type=parse_pattern, help="pattern edges, e.g. 0-1,1-2")
    parser.add_argument("--trace-in", dest="trace_in")
    parser.add_argument("--bandwidth", type=int, help="per-edge bit budget override")
    parser.add_argument("--fault", action="store_true", default=None,
                        help="disable incident-deletion cleanup (regression check)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subgraph-sim",
                                     description="Dynamic subgraph listing simulator")
    parser.add_argument("--log-level", default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="run one scenario")
    _add_run_arguments(sim)
    sim.add_argument("--verify", action="store_true", default=None)
    sim.add_argument("--trace-out", dest="trace_out")
    sim.add_argument("--metrics-out", dest="metrics_out")
    sim.add_argument("--csv-out", dest="csv_out")
    sim.add_argument("--trace-jsonl", dest="trace_jsonl")

    check = commands.add_parser("verify", help=f"oracle-check every round (n <= {VERIFY_MAX_N})")
    _add_run_arguments(check)

    matrix = commands.add_parser("bench", help="run an algorithm x scenario x size matrix")
    _add_run_arguments(matrix)
    matrix.add_argument("--algos", type=_name_list, default=sorted(ALGORITHMS))
    matrix.add_argument("--scenarios", type=_name_list, default=["random", "heavy_tail"])
    matrix.add_argument("--sizes", type=_int_list, default=[8, 16, 32])
    matrix.add_argument("--seeds", type=_int_list, default=[0, 1, 2])
    matrix.add_argument("--out", default="bench.csv")
    return parser


def _run_config_from_args(args: argparse.Namespace) -> RunConfig:
    names = set(RunConfig.__dataclass_fields__)
    return RunConfig.from_settings(**{key: value for key, value in vars(args).items()
                                      if key in names})


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, dispatch, and return the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    level = args.log_level or get_env_setting("LOG_LEVEL", "WARNING")
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    try:
        if args.command == "bench":
            for algo in args.algos:
                validate_choice(algo, "algorithm", ALGORITHMS)
            for scenario in args.scenarios:
                validate_choice(scenario, "scenario", SCENARIOS)
            base = _run_config_from_args(args)
            rows = bench(base, args.algos, args.scenarios, args.sizes, args.seeds, args.out)
            failed = sum(1 for row in rows if row["status"] != "ok")
            print(json.dumps({"cells": len(rows), "failed": failed, "out": args.out}, indent=2))
            return EXIT_OK

        config = _run_config_from_args(args)
        if args.command == "verify":
            result = verify(config)
        else:
            result = simulate(config, args.metrics_out, args.csv_out,
                              args.trace_out, args.trace_jsonl)
        print(json.dumps(result, indent=2, sort_keys=True))
        return EXIT_OK
    except (ValidationError, VerificationError, InvariantViolation) as e:
        details = {"error_type": type(e).__name__}
        if isinstance(e, OracleMismatch):
            details.update({"round": e.round_no, "node": e.node})
        log_event("simulator_cli", args.command, "error", details)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code_for(e)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def execute_skill(parameters: Dict[str, Any]) -> Dict[str, Any]:
    """
    Execute the simulator as a skill.

    Args:
        parameters: Dictionary containing:
            - action: 'simulate', 'verify' or 'bench' (default: simulate)
            - any RunConfig field (algo, scenario, n, rounds, seed, ...)
            - for bench: algos, scenarios, sizes, seeds, out

    Returns:
        Result dictionary with status and run data, or error details
    """
    parameters = dict(parameters or {})
    action = parameters.pop("action", "simulate")
    try:
        validate_choice(action, "action", ("simulate", "verify", "bench"))
        names = set(RunConfig.__dataclass_fields__)
        overrides = {key: value for key, value in parameters.items() if key in names}
        config = RunConfig.from_settings(**overrides)
        if action == "bench":
            data: Any = bench(
                config,
                parameters.get("algos", sorted(ALGORITHMS)),
                parameters.get("scenarios", ["random"]),
                parameters.get("sizes", [config.n]),
                parameters.get("seeds", [config.seed]),
                parameters.get("out"),
            )
        elif action == "verify":
            data = verify(config)
        else:
            data = simulate(config, parameters.get("metrics_out"), parameters.get("csv_out"),
                            parameters.get("trace_out"), parameters.get("trace_jsonl"))
        return {"status": "success", "data": data, "timestamp": get_timestamp()}
    except (ValidationError, VerificationError, InvariantViolation) as e:
        logger.error(f"Simulator {action} failed: {e}")
        return {
            "status": "error",
            "error_type": type(e).__name__,
            "exit_code": exit_code_for(e),
            "message": str(e),
            "timestamp": get_timestamp(),
        }
    except OSError as e:
        logger.error(f"Simulator {action} could not access a file: {e}")
        return {
            "status": "error",
            "error_type": type(e).__name__,
            "exit_code": EXIT_USAGE,
            "message": str(e),
            "timestamp": get_timestamp(),
        }


def get_skill_info() -> Dict[str, Any]:
    """Return metadata about this skill"""
    return {
        "name": "Dynamic Subgraph Listing Simulator",
        "version": "1.0.0",
        "description": "Simulate bandwidth-limited distributed subgraph listing under edge churn",
        "supported_actions": ["simulate", "verify", "bench"],
        "algorithms": {name: spec.description for name, spec in sorted(ALGORITHMS.items())},
        "scenarios": list(SCENARIOS),
        "exit_codes": {"ok": EXIT_OK, "verification": EXIT_VERIFICATION,
                       "invariant": EXIT_INVARIANT, "usage": EXIT_USAGE},
        "input_schema": {name: str(f.type) for name, f in RunConfig.__dataclass_fields__.items()},
    }


if __name__ == "__main__":
    sys.exit(main())

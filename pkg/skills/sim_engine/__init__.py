"""
Simulation Engine Skill Package
Synchronous rounds, wire items, bandwidth checks and amortized metrics.
"""

from .skill import (
    HEADER_BITS,
    STABILIZE,
    EdgeDelete3,
    EdgeUpdateA,
    Metrics,
    NodeAlgorithm,
    Packet,
    PairB,
    PathInsert,
    QueryResult,
    ScenarioStep,
    SimConfig,
    Simulation,
    SnapshotChunk,
    StabilizeBarrier,
    VerifyContext,
    WireItem,
    amortized_ratio,
    ceil_log2,
    default_bandwidth_bits,
    message_bits,
    run,
    write_traces,
)

__version__ = "1.0.0"
__all__ = [
    "HEADER_BITS",
    "STABILIZE",
    "EdgeDelete3",
    "EdgeUpdateA",
    "Metrics",
    "NodeAlgorithm",
    "Packet",
    "PairB",
    "PathInsert",
    "QueryResult",
    "ScenarioStep",
    "SimConfig",
    "Simulation",
    "SnapshotChunk",
    "StabilizeBarrier",
    "VerifyContext",
    "WireItem",
    "amortized_ratio",
    "ceil_log2",
    "default_bandwidth_bits",
    "message_bits",
    "run",
    "write_traces",
]

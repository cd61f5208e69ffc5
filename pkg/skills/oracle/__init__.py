"""
Oracle Skill Package
Brute-force reference sets used by the verifier and the tests.
"""

from .skill import (
    History,
    canonical_cycle,
    cycle_edges,
    enumerate_cliques,
    enumerate_cycles,
    enumerate_triangles,
    hop_edges,
    robust_2hop,
    robust_3hop,
    temporal_T2,
    to_networkx,
)

__version__ = "1.0.0"
__all__ = [
    "History",
    "canonical_cycle",
    "cycle_edges",
    "enumerate_cliques",
    "enumerate_cycles",
    "enumerate_triangles",
    "hop_edges",
    "robust_2hop",
    "robust_3hop",
    "temporal_T2",
    "to_networkx",
]

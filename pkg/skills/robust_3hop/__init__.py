"""
Robust 3-Hop Skill Package
Path-set listing of the robust 3-hop neighborhood with 4/5-cycle queries.
"""

from .skill import (
    InsertPathItem,
    Robust3HopNode,
    rotate_to,
    verify_cycles,
    verify_listed_cycles,
    verify_non_cycles,
    verify_sandwich,
)

__version__ = "1.0.0"
__all__ = [
    "InsertPathItem",
    "Robust3HopNode",
    "rotate_to",
    "verify_cycles",
    "verify_listed_cycles",
    "verify_non_cycles",
    "verify_sandwich",
]

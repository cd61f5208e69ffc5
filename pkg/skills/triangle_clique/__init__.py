"""
Triangle & Clique Membership Skill Package
Triangle temporal-pattern listing with k-clique membership queries.
"""

from .skill import (
    TriangleCliqueNode,
    verify_cliques,
    verify_triangles,
)

__version__ = "1.0.0"
__all__ = [
    "TriangleCliqueNode",
    "verify_cliques",
    "verify_triangles",
]

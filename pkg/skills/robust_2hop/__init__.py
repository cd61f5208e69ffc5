"""
Robust 2-Hop Skill Package
"""

from .skill import Robust2HopNode, as_edge, verify_robust_2hop

__version__ = "1.0.0"
__all__ = ["Robust2HopNode", "as_edge", "verify_robust_2hop"]

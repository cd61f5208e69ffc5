"""
Naive 2-Hop Skill Package
"""

from .skill import (
    Naive2HopNode,
    chunk_count,
    decode_snapshot,
    encode_snapshot,
    payload_width,
    verify_naive_2hop,
)

__version__ = "1.0.0"
__all__ = [
    "Naive2HopNode",
    "chunk_count",
    "decode_snapshot",
    "encode_snapshot",
    "payload_width",
    "verify_naive_2hop",
]

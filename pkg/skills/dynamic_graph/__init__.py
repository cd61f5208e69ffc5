"""
Dynamic Graph Skill Package
Edge/event types and the global graph state with true insertion times.
"""

from .skill import (
    Edge,
    EventKind,
    GraphState,
    NodeIndications,
    TopologyEvent,
    apply_events,
    parse_event_line,
    replay,
)

__version__ = "1.0.0"
__all__ = [
    "Edge",
    "EventKind",
    "GraphState",
    "NodeIndications",
    "TopologyEvent",
    "apply_events",
    "parse_event_line",
    "replay",
]

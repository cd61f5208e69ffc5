"""
Adversary Skill Package
Scenario generators and the line-oriented trace format.
"""

from .skill import (
    Scenario,
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

__version__ = "1.0.0"
__all__ = [
    "Scenario",
    "ScheduleBuilder",
    "cycle_lb_layout",
    "empty_scenario",
    "gen_cycle_lb",
    "gen_flicker_triangle",
    "gen_heavy_tail_churn",
    "gen_membership_lb",
    "gen_path3_lb",
    "gen_random_churn",
    "load_trace",
    "parse_trace",
    "sample_session_lengths",
]

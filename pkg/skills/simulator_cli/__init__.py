"""
Simulator CLI Skill Package
simulate / verify / bench entry points and the skill interface.
"""

from .skill import (
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFICATION,
    RunConfig,
    bench,
    execute_skill,
    get_skill_info,
    main,
    parse_pattern,
    run_scenario,
    simulate,
    verify,
)

__version__ = "1.0.0"
__all__ = [
    "EXIT_INVARIANT",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_VERIFICATION",
    "RunConfig",
    "bench",
    "execute_skill",
    "get_skill_info",
    "main",
    "parse_pattern",
    "run_scenario",
    "simulate",
    "verify",
]

"""
Shared utilities for the dynamic subgraph listing skills
Provides the error hierarchy, input validation, configuration loading and
structured logging helpers used by every skill package
"""

import os
import re
import logging
from pathlib import Path
from typing import Any, Dict, Optional
from datetime import datetime, timezone

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

ENV_PREFIX = "DSL_"


class ValidationError(Exception):
    """Raised when input validation fails"""
    pass


class InvalidEvent(ValidationError):
    """Raised when a topology event violates the graph rules"""
    pass


class NotOwnQuery(ValidationError):
    """Raised when a node is queried about a subgraph it is not part of"""
    pass


class MalformedCycle(ValidationError):
    """Raised when a cycle query has repeated nodes or a bad length"""
    pass


class PatternIsClique(ValidationError):
    """Raised when a lower-bound pattern has no non-adjacent pair"""
    pass


class BadDimensions(ValidationError):
    """Raised when a scenario cannot be laid out on the requested node count"""
    pass


class VerificationError(Exception):
    """Base class for oracle disagreements (exit code 2)"""
    pass


class OracleMismatch(VerificationError):
    """Raised when a consistent node disagrees with the brute-force oracle"""

    def __init__(self, message: str, round_no: int = -1, node: int = -1):
        super().__init__(message)
        self.round_no = round_no
        self.node = node


class InvariantViolation(Exception):
    """Base class for engine invariant failures (exit code 3)"""
    pass


class BandwidthViolation(InvariantViolation):
    """Raised when a message exceeds the per-edge bandwidth budget"""
    pass


class StabilizeTimeout(InvariantViolation):
    """Raised when a stabilize barrier does not resolve within its cap"""
    pass


NAME_PATTERN = re.compile(r"^[A-Za-z0-9_\-]{1,64}$")


def validate_string_input(value: Any, field_name: str,
                          pattern: Optional["re.Pattern[str]"] = None) -> str:
    """
    Check a string parameter and return it stripped.

    Args:
        value: Raw parameter value
        field_name: Used in error messages
        pattern: Compiled regex the whole stripped value must match

    Raises:
        ValidationError: On a non-string, an empty string or a pattern miss
    """
    if not isinstance(value, str):
        raise ValidationError(f"{field_name} must be a string, got {type(value).__name__}")
    value = value.strip()
    if not value:
        raise ValidationError(f"{field_name} must not be empty")
    if pattern is not None and not pattern.match(value):
        raise ValidationError(f"{field_name} has an unsupported format: {value!r}")
    return value


def validate_choice(value: Any, field_name: str, choices) -> str:
    """
    Validate that a name is one of the supported choices.

    Raises:
        ValidationError: If the value is not a known choice
    """
    value = validate_string_input(value, field_name, NAME_PATTERN)
    if value not in choices:
        raise ValidationError(
            f"Unknown {field_name}: {value}. Use one of: {', '.join(sorted(choices))}"
        )
    return value


def validate_int_input(value: Any, field_name: str,
                       min_value: Optional[int] = None,
                       max_value: Optional[int] = None) -> int:
    """
    Validate an integer parameter.

    Args:
        value: Input value to validate
        field_name: Name of the field for error messages
        min_value: Inclusive lower bound (None = unbounded)
        max_value: Inclusive upper bound (None = unbounded)

    Returns:
        The validated integer

    Raises:
        ValidationError: If the value is not an integer or is out of range
    """
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{field_name} must be an integer, got {type(value).__name__}")
    if min_value is not None and value < min_value:
        raise ValidationError(f"{field_name} must be at least {min_value}, got {value}")
    if max_value is not None and value > max_value:
        raise ValidationError(f"{field_name} must not exceed {max_value}, got {value}")
    return value


def validate_probability(value: Any, field_name: str) -> float:
    """Validate a probability in [0, 1]"""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{field_name} must be a number, got {type(value).__name__}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{field_name} must be within [0, 1], got {value}")
    return value


def load_skill_config(skill_dir: Path, filename: str = "config.yaml") -> Dict[str, Any]:
    """
    Load a skill's YAML configuration.

    Missing files yield an empty configuration so that code defaults apply.

    Args:
        skill_dir: Directory containing the skill's config file
        filename: Config file name

    Returns:
        Parsed configuration dictionary

    Raises:
        ValidationError: If the file exists but is not a YAML mapping
    """
    path = Path(skill_dir) / filename
    if not path.exists():
        logger.debug(f"No config at {path}, using defaults")
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle) or {}
    if not isinstance(data, dict):
        raise ValidationError(f"Config {path} must contain a mapping")
    return data


def get_env_setting(name: str, default: Optional[str] = None) -> Optional[str]:
    """
    Read a prefixed setting from the environment (or a local .env file).

    Args:
        name: Setting name without the DSL_ prefix
        default: Value used when the variable is unset

    Returns:
        The setting value or the default
    """
    load_dotenv(override=False)
    return os.getenv(f"{ENV_PREFIX}{name}", default)


def log_event(component: str, operation: str,
              status: str, details: Optional[Dict[str, Any]] = None) -> None:
    """
    Log a simulator event as a single structured line.

    Args:
        component: Skill or subsystem emitting the event
        operation: Operation being performed
        status: Status of the operation (success/error/warning)
        details: Additional key/value details
    """
    log_msg = f"Component: {component} | Operation: {operation} | Status: {status}"
    if details:
        log_msg += f" | Details: {dict(sorted(details.items()))}"

    if status == 'error':
        logger.error(log_msg)
    elif status == 'warning':
        logger.warning(log_msg)
    else:
        logger.info(log_msg)


def get_timestamp() -> str:
    """Get current timestamp in ISO format"""
    return datetime.now(timezone.utc).replace(tzinfo=None).isoformat() + "Z"

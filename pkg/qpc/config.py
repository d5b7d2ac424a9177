"""
Central tolerance record and the package exception base.
Every numerical threshold used by qpc is read from one Tolerances instance.
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Union

TOLERANCE_ENV_VAR = "QPC_TOL_OVERRIDE"

logger = logging.getLogger(__name__)


class QPCError(Exception):
    """Base exception for qpc"""
    pass


class ConfigError(QPCError):
    """Invalid tolerance override or configuration file"""
    pass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by all modules."""

    hermitian: float = 1e-10
    symmetric: float = 1e-10
    left_unitary: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-9
    norm: float = 1e-10
    entropy_cutoff: float = 1e-14
    spectral_cutoff: float = 1e-12
    separable_dominant: float = 1e-12
    radicand_clamp: float = 1e-12
    degeneracy: float = 1e-10
    decomposition_cutoff: float = 1e-12
    membership: float = 1e-8

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def parse_tolerances(data: dict, base: Optional[Tolerances] = None) -> Tolerances:
    """Builds a Tolerances record from a mapping of overrides.

    Args:
        data: Mapping of field name to value; missing fields keep ``base``
        base: Record to override (defaults when omitted)

    Returns:
        Tolerances: The merged record

    Raises:
        ConfigError: On unknown keys or values that are not finite, non-negative numbers
    """
    if not isinstance(data, dict):
        raise ConfigError("Tolerance override must be a JSON object")

    known = {f.name for f in fields(Tolerances)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown tolerance keys: {', '.join(unknown)}")

    overrides = {}
    for key, value in data.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"Tolerance '{key}' must be a number, received: {value!r}")
        if not math.isfinite(value) or value < 0:
            raise ConfigError(f"Tolerance '{key}' must be finite and non-negative, received: {value}")
        overrides[key] = float(value)

    return replace(base or Tolerances(), **overrides)


def load_tolerances(path: Union[str, Path]) -> Tolerances:
    """Reads a JSON tolerance override file."""
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"Tolerance override file does not exist: {file_path}")

    try:
        data = json.loads(file_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Error parsing tolerance override {file_path}: {e}")

    tolerances = parse_tolerances(data)
    logger.info(f"Tolerance overrides loaded from {file_path}: {', '.join(sorted(data))}")
    return tolerances


@lru_cache(maxsize=None)
def get_tolerances() -> Tolerances:
    """Returns the active tolerances (defaults plus the ``QPC_TOL_OVERRIDE`` file, if set)."""
    override = os.environ.get(TOLERANCE_ENV_VAR)
    if override:
        return load_tolerances(override)
    return Tolerances()


def resolve(tol: Optional[Tolerances]) -> Tolerances:
    return tol if tol is not None else get_tolerances()

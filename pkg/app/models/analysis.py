"""
Result types for fidelity analysis and Monte Carlo error estimation.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.core.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


class TargetFamily(str, Enum):
    GHZ_G = "GHZ_G"
    W_G = "W_G"


@dataclass(frozen=True)
class LocalRotationParams:
    """ZYZ Euler angles (alpha, beta, gamma) per qubit, in radians"""
    angles: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        angles = tuple(tuple(float(v) for v in triple) for triple in self.angles)
        if not angles or any(len(triple) != 3 for triple in angles):
            raise InvalidArgumentError("need one (alpha, beta, gamma) triple per qubit")
        object.__setattr__(self, "angles", angles)

    @property
    def n_qubits(self) -> int:
        return len(self.angles)

    def as_vector(self) -> np.ndarray:
        return np.array(self.angles, dtype=float).reshape(-1)

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "LocalRotationParams":
        values = np.asarray(vector, dtype=float).reshape(-1, 3)
        return cls(tuple(tuple(row) for row in values))

    @classmethod
    def identity(cls, n_qubits: int) -> "LocalRotationParams":
        return cls(tuple((0.0, 0.0, 0.0) for _ in range(n_qubits)))


@dataclass(frozen=True)
class UncertaintyReport:
    """Monte Carlo mean/standard deviation of a statistic"""
    statistic: str
    point_estimate: float
    std_dev: float
    n_trials: int
    n_failed: int = 0
    mean: Optional[float] = None
    trial_values: Optional[List[float]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_trials < 2:
            raise InvalidArgumentError("an uncertainty needs at least 2 successful trials")
        if self.std_dev < 0:
            raise InvalidArgumentError("std_dev must be nonnegative")


@dataclass(frozen=True)
class FidelityEntry:
    value: float
    std_dev: Optional[float] = None


@dataclass(frozen=True)
class ConversionReport:
    """Fidelities with the GHZ_G and W_G families before and after conversion"""
    input: Dict[str, FidelityEntry]
    output: Dict[str, FidelityEntry]
    reference: Dict[str, Dict[str, Tuple[float, float]]]

"""
Tomography data: measurement settings, count records and reconstruction results.
"""
from dataclasses import dataclass, field
import logging
from typing import List, Tuple

import numpy as np
import pandas as pd

from app.core.errors import InvalidArgumentError
from app.models.state import DensityMatrix

logger = logging.getLogger(__name__)

# Projector order used for enumeration
SETTING_LABELS = ("H", "V", "D", "R")


@dataclass(frozen=True)
class MeasurementSetting:
    """One single-photon projection per qubit, e.g. ('H', 'D', 'R')"""
    labels: Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise InvalidArgumentError("A setting needs at least one qubit label")
        unknown = [label for label in labels if label not in SETTING_LABELS]
        if unknown:
            raise InvalidArgumentError(f"Unknown projector label(s) {unknown}; expected {SETTING_LABELS}")
        object.__setattr__(self, "labels", labels)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def __str__(self) -> str:
        return "".join(self.labels)

    @classmethod
    def parse(cls, text: str) -> "MeasurementSetting":
        return cls(tuple(str(text).strip().upper()))


@dataclass(frozen=True)
class CountRecord:
    """Coincidences recorded for one setting"""
    setting: MeasurementSetting
    raw_counts: int
    background: float = 0.0
    drift_normalizer: float = 1.0

    def __post_init__(self):
        if int(self.raw_counts) != self.raw_counts or self.raw_counts < 0:
            raise InvalidArgumentError(f"raw_counts must be a nonnegative integer, got {self.raw_counts}")
        if self.background < 0:
            raise InvalidArgumentError(f"background must be nonnegative, got {self.background}")
        if not self.drift_normalizer > 0:
            raise InvalidArgumentError(f"drift_normalizer must be positive, got {self.drift_normalizer}")
        object.__setattr__(self, "raw_counts", int(self.raw_counts))
        object.__setattr__(self, "background", float(self.background))
        object.__setattr__(self, "drift_normalizer", float(self.drift_normalizer))

    @property
    def corrected(self) -> float:
        """Background-subtracted, drift-normalized counts, clamped at zero"""
        return max(0.0, self.raw_counts - self.background) / self.drift_normalizer


@dataclass(frozen=True)
class FrequencyTable:
    """Corrected counts per setting and the matching relative frequencies"""
    settings: List[MeasurementSetting]
    corrected_counts: np.ndarray = field(repr=False)

    @property
    def total(self) -> float:
        return float(np.sum(self.corrected_counts))

    @property
    def frequencies(self) -> np.ndarray:
        return self.corrected_counts / self.total

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "setting": [str(s) for s in self.settings],
            "corrected_counts": self.corrected_counts,
            "frequency": self.frequencies,
        })


@dataclass(frozen=True)
class ReconstructionResult:
    """Most-likely density matrix plus optimizer diagnostics"""
    rho: DensityMatrix
    log_likelihood: float
    iterations: int
    converged: bool
    residual: float
    scale: float = 1.0
    history: List[float] = field(default_factory=list, repr=False)

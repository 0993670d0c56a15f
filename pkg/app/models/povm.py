"""
Local filter (POVM) types.

The filter keeps |A> untouched and attenuates |D> by the amplitude factor a:
    eps1 = |A><A| + a^2 |D><D|,   eps2 = (1 - a^2) |D><D|
The HV variant is the same filter in the lab frame, where a 45 degree
rotation maps D->H and A->V.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging
from typing import List, Union

import numpy as np

from app.core.errors import InvalidArgumentError
from app.models.state import KETS, DensityMatrix, PureState

logger = logging.getLogger(__name__)


class FilterBasis(str, Enum):
    DA = "DA"
    HV = "HV"


class Outcome(str, Enum):
    EPSILON_1 = "e1"
    EPSILON_2 = "e2"


# (favored, suppressed) kets per basis
_BASIS_KETS = {
    FilterBasis.DA: ("A", "D"),
    FilterBasis.HV: ("V", "H"),
}


@dataclass(frozen=True)
class FilterStrength:
    """Attenuation amplitude a in (0, 1], stored as the transmission ratio a^2"""
    a_squared: float

    def __post_init__(self):
        value = float(self.a_squared)
        if not 0.0 < value <= 1.0 or not np.isfinite(value):
            raise InvalidArgumentError(f"a^2 must lie in (0, 1], got {self.a_squared}")
        object.__setattr__(self, "a_squared", value)

    @property
    def a(self) -> float:
        return float(np.sqrt(self.a_squared))

    @classmethod
    def from_a(cls, a: float) -> "FilterStrength":
        if not 0.0 < a <= 1.0:
            raise InvalidArgumentError(f"a must lie in (0, 1], got {a}")
        return cls(a * a)

    @classmethod
    def from_transmissions(cls, favored: float, suppressed: float) -> "FilterStrength":
        """a^2 from measured intensity transmissions, e.g. 0.33 / 0.88"""
        if favored <= 0.0 or suppressed <= 0.0 or suppressed > favored:
            raise InvalidArgumentError(
                f"need 0 < suppressed <= favored, got favored={favored}, suppressed={suppressed}"
            )
        return cls(suppressed / favored)


def _projector(label: str) -> np.ndarray:
    ket = KETS[label]
    return np.outer(ket, ket.conj())


@dataclass(frozen=True)
class KrausFilter:
    """Kraus operators M1 (keep) and M2 (discard) of the local filter"""
    strength: FilterStrength
    basis: FilterBasis = FilterBasis.DA
    matrix: np.ndarray = field(init=False, repr=False)
    discard_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        basis = FilterBasis(self.basis)
        object.__setattr__(self, "basis", basis)
        favored, suppressed = _BASIS_KETS[basis]
        keep = _projector(favored) + self.strength.a * _projector(suppressed)
        discard = np.sqrt(1.0 - self.strength.a_squared) * _projector(suppressed)
        for array in (keep, discard):
            array.setflags(write=False)
        object.__setattr__(self, "matrix", keep)
        object.__setattr__(self, "discard_matrix", discard)

    @property
    def epsilon1(self) -> np.ndarray:
        return self.matrix.conj().T @ self.matrix

    @property
    def epsilon2(self) -> np.ndarray:
        return self.discard_matrix.conj().T @ self.discard_matrix

    def kraus(self, outcome: Outcome) -> np.ndarray:
        return self.matrix if Outcome(outcome) is Outcome.EPSILON_1 else self.discard_matrix


@dataclass(frozen=True)
class FilterOutcome:
    """Normalized post-selected state together with the probability of that branch"""
    output_state: Union[PureState, DensityMatrix]
    success_probability: float
    per_qubit_outcome: List[Outcome]
    strength: FilterStrength
    basis: FilterBasis = FilterBasis.DA

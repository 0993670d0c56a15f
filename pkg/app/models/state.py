"""
State carriers: pure states, density matrices and single-qubit unitaries.

Basis ordering is big-endian over {H=0, V=1}: qubit 0 is the most
significant bit of the basis index, so index 0b011 is |HVV>.
"""
from dataclasses import dataclass, field
import logging
import numpy as np

from app.core.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12
HERMITIAN_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-10
EIGENVALUE_FLOOR = -1e-10

SQRT_HALF = 1.0 / np.sqrt(2.0)

# Single-photon polarization kets in the H/V computational basis.
# |R> = (|H> - i|V>)/sqrt(2) is a fixed convention; |L> is its partner.
KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([SQRT_HALF, SQRT_HALF], dtype=complex),
    "A": np.array([SQRT_HALF, -SQRT_HALF], dtype=complex),
    "R": np.array([SQRT_HALF, -1j * SQRT_HALF], dtype=complex),
    "L": np.array([SQRT_HALF, 1j * SQRT_HALF], dtype=complex),
}

for _ket in KETS.values():
    _ket.setflags(write=False)


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def _check_n_qubits(n_qubits) -> int:
    if isinstance(n_qubits, bool) or not isinstance(n_qubits, (int, np.integer)) or n_qubits < 1:
        raise InvalidArgumentError(f"n_qubits must be a positive integer, got {n_qubits!r}")
    return int(n_qubits)


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over 2**n_qubits basis strings"""
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)
    normalized: bool = True

    def __post_init__(self):
        n = _check_n_qubits(self.n_qubits)
        amplitudes = _frozen(np.ravel(self.amplitudes))
        if amplitudes.shape[0] != 2 ** n:
            raise InvalidArgumentError(
                f"Expected {2 ** n} amplitudes for {n} qubits, got {amplitudes.shape[0]}"
            )
        object.__setattr__(self, "n_qubits", n)
        object.__setattr__(self, "amplitudes", amplitudes)
        if self.normalized and abs(self.norm_squared - 1.0) > NORM_TOLERANCE:
            raise InvalidArgumentError(
                f"State tagged normalized has squared norm {self.norm_squared:.15f}"
            )

    @property
    def dimension(self) -> int:
        return 2 ** self.n_qubits

    @property
    def norm_squared(self) -> float:
        return float(np.real(np.vdot(self.amplitudes, self.amplitudes)))

    def normalize(self) -> "PureState":
        """Return the normalized copy of this state"""
        norm_sq = self.norm_squared
        if norm_sq <= 0.0:
            raise InvalidArgumentError("Cannot normalize a zero vector")
        return PureState(self.n_qubits, self.amplitudes / np.sqrt(norm_sq))


@dataclass(frozen=True)
class DensityMatrix:
    """2**n x 2**n Hermitian, positive semidefinite, unit-trace operator"""
    n_qubits: int
    matrix: np.ndarray = field(repr=False)
    normalized: bool = True

    def __post_init__(self):
        n = _check_n_qubits(self.n_qubits)
        matrix = _frozen(self.matrix)
        dim = 2 ** n
        if matrix.shape != (dim, dim):
            raise InvalidArgumentError(
                f"Expected a {dim}x{dim} matrix for {n} qubits, got shape {matrix.shape}"
            )
        object.__setattr__(self, "n_qubits", n)
        object.__setattr__(self, "matrix", matrix)

        if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_TOLERANCE:
            raise InvalidArgumentError("Density matrix is not Hermitian")
        if self.normalized:
            if abs(self.trace - 1.0) > TRACE_TOLERANCE:
                raise InvalidArgumentError(f"Density matrix trace is {self.trace:.12f}, expected 1")
            if np.min(self.eigenvalues) < EIGENVALUE_FLOOR:
                raise InvalidArgumentError("Density matrix has negative eigenvalues")

    @property
    def dimension(self) -> int:
        return 2 ** self.n_qubits

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def normalize(self) -> "DensityMatrix":
        """Return the unit-trace copy of this operator"""
        tr = self.trace
        if tr <= 0.0:
            raise InvalidArgumentError("Cannot normalize an operator with non-positive trace")
        return DensityMatrix(self.n_qubits, self.matrix / tr)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        psi = state.amplitudes
        return cls(state.n_qubits, np.outer(psi, psi.conj()), normalized=state.normalized)


@dataclass(frozen=True)
class LocalUnitary:
    """Single-qubit unitary, e.g. a waveplate or a local basis change"""
    matrix: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        matrix = _frozen(self.matrix)
        if matrix.shape != (2, 2):
            raise InvalidArgumentError(f"Local unitary must be 2x2, got shape {matrix.shape}")
        if np.max(np.abs(matrix @ matrix.conj().T - np.eye(2))) > NORM_TOLERANCE:
            raise InvalidArgumentError(f"Local operator '{self.name or 'unnamed'}' is not unitary")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dagger(self) -> "LocalUnitary":
        return LocalUnitary(self.matrix.conj().T, name=f"{self.name}^dag" if self.name else "")

"""
State construction and local operations on multi-qubit polarization states.
"""
from dataclasses import dataclass
from functools import reduce
from itertools import product
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.errors import InvalidArgumentError, DegenerateInputError
from app.models.state import (
    KETS,
    NORM_TOLERANCE,
    TRACE_TOLERANCE,
    DensityMatrix,
    LocalUnitary,
    PureState,
)

logger = logging.getLogger(__name__)

State = Union[PureState, DensityMatrix]
Operator = Union[LocalUnitary, np.ndarray]

SIGNS = ("+", "-")


# ---------------------------------------------------------------------------
# Single-qubit operators
# ---------------------------------------------------------------------------

def identity() -> LocalUnitary:
    return LocalUnitary(np.eye(2), name="I")


def hadamard() -> LocalUnitary:
    """Maps H->D and V->A (and back); a half-wave plate at 22.5 degrees"""
    return LocalUnitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2.0), name="Had")


def da_swap() -> LocalUnitary:
    """diag(1, -1) in H/V, which exchanges |D> and |A>"""
    return LocalUnitary(np.diag([1.0, -1.0]), name="DA-swap")


def waveplate(retardance: float, theta: float) -> LocalUnitary:
    """
    Jones matrix of a linear retarder with its fast axis at angle theta.

    Args:
        retardance: phase delay between the axes in radians (pi for a HWP)
        theta: fast-axis angle from horizontal in radians

    Returns:
        LocalUnitary: the retarder, global phase dropped
    """
    c, s = np.cos(theta), np.sin(theta)
    rotation = np.array([[c, -s], [s, c]])
    retarder = np.diag([1.0, np.exp(1j * retardance)])
    return LocalUnitary(rotation @ retarder @ rotation.T, name=f"WP({retardance:.4f},{theta:.4f})")


def half_wave_plate(theta: float) -> LocalUnitary:
    # [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
    return waveplate(np.pi, theta)


def quarter_wave_plate(theta: float) -> LocalUnitary:
    return waveplate(np.pi / 2.0, theta)


def euler_zyz(alpha: float, beta: float, gamma: float) -> LocalUnitary:
    """Rz(alpha) Ry(beta) Rz(gamma), with Rz(p) = diag(e^{-ip/2}, e^{ip/2})"""
    c, s = np.cos(beta / 2.0), np.sin(beta / 2.0)
    matrix = np.array([
        [np.exp(-0.5j * (alpha + gamma)) * c, -np.exp(-0.5j * (alpha - gamma)) * s],
        [np.exp(0.5j * (alpha - gamma)) * s, np.exp(0.5j * (alpha + gamma)) * c],
    ])
    return LocalUnitary(matrix, name="ZYZ")


def zyz_angles(unitary: Operator) -> Tuple[float, float, float]:
    """
    Decompose a single-qubit unitary into ZYZ Euler angles, up to global phase.

    Returns:
        (alpha, beta, gamma) such that euler_zyz(alpha, beta, gamma) equals the
        input up to a phase factor
    """
    matrix = _operator_matrix(unitary)
    special = matrix / np.sqrt(np.linalg.det(matrix))
    beta = 2.0 * np.arctan2(abs(special[1, 0]), abs(special[0, 0]))
    plus = 2.0 * np.angle(special[1, 1]) if abs(special[1, 1]) > 1e-12 else 0.0
    minus = 2.0 * np.angle(special[1, 0]) if abs(special[1, 0]) > 1e-12 else 0.0
    return (plus + minus) / 2.0, float(beta), (plus - minus) / 2.0


def _operator_matrix(op: Operator) -> np.ndarray:
    matrix = op.matrix if isinstance(op, LocalUnitary) else np.asarray(op, dtype=complex)
    if matrix.shape != (2, 2):
        raise InvalidArgumentError(f"Local operator must be 2x2, got shape {matrix.shape}")
    return matrix


# ---------------------------------------------------------------------------
# Canonical states
# ---------------------------------------------------------------------------

def _check_sign(sign: str) -> str:
    if sign not in SIGNS:
        raise InvalidArgumentError(f"sign must be '+' or '-', got {sign!r}")
    return sign


def _check_at_least_two(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidArgumentError("n must be ≥ 2")
    return int(n)


def _ghz_vector(n: int, sign: str) -> np.ndarray:
    """(|H>^n +- |V>^n)/sqrt(2); n = 1 gives |D> or |A>"""
    vector = np.zeros(2 ** n, dtype=complex)
    vector[0] = 1.0
    vector[-1] = 1.0 if sign == "+" else -1.0
    return vector / np.sqrt(2.0)


def _kron_all(vectors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, vectors)


def _pin_phase(vector: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real positive"""
    nonzero = np.flatnonzero(np.abs(vector) > NORM_TOLERANCE)
    if nonzero.size == 0:
        return vector
    phase = vector[nonzero[0]] / abs(vector[nonzero[0]])
    return vector / phase


def product_state(labels: str) -> PureState:
    """Product of single-qubit kets, e.g. product_state('HDR')"""
    if not labels:
        raise InvalidArgumentError("Need at least one qubit label")
    try:
        vectors = [KETS[label] for label in labels]
    except KeyError as e:
        raise InvalidArgumentError(f"Unknown polarization label {e.args[0]!r}")
    return PureState(len(labels), _kron_all(vectors))


def make_ghz(n: int, sign: str = "+") -> PureState:
    """(|H>^n +- |V>^n)/sqrt(2)"""
    n = _check_at_least_two(n)
    return PureState(n, _ghz_vector(n, _check_sign(sign)))


def make_w_prime(n: int) -> PureState:
    """Equal superposition of the n strings with one |D> and n-1 |A> factors"""
    n = _check_at_least_two(n)
    total = np.zeros(2 ** n, dtype=complex)
    for position in range(n):
        factors = [KETS["D"] if q == position else KETS["A"] for q in range(n)]
        total += _kron_all(factors)
    return PureState(n, _pin_phase(total / np.sqrt(n)))


def make_w_hv(n: int) -> PureState:
    """Equal superposition of the n strings with a single H, e.g. |HVV>+|VHV>+|VVH>"""
    n = _check_at_least_two(n)
    vector = np.zeros(2 ** n, dtype=complex)
    for position in range(n):
        # H is bit 0, so the index has every bit set except the one at `position`
        vector[(2 ** n - 1) ^ (1 << (n - 1 - position))] = 1.0
    return PureState(n, vector / np.sqrt(n))


def make_bell(kind: str = "phi+") -> PureState:
    """Two-qubit Bell states phi+-, psi+-"""
    vectors = {
        "phi+": [1, 0, 0, 1],
        "phi-": [1, 0, 0, -1],
        "psi+": [0, 1, 1, 0],
        "psi-": [0, 1, -1, 0],
    }
    if kind not in vectors:
        raise InvalidArgumentError(f"Unknown Bell state {kind!r}; expected one of {sorted(vectors)}")
    return PureState(2, np.array(vectors[kind], dtype=complex) / np.sqrt(2.0))


def maximally_mixed(n: int) -> DensityMatrix:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError("n must be ≥ 1")
    dim = 2 ** int(n)
    return DensityMatrix(int(n), np.eye(dim) / dim)


def to_density(state: State) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    return DensityMatrix.from_pure(state)


def mix_with_white_noise(state: State, p: float) -> DensityMatrix:
    """(1-p) rho + p I/d, a simple model of an imperfect source"""
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"white-noise weight must lie in [0, 1], got {p}")
    rho = to_density(state)
    mixed = (1.0 - p) * rho.matrix + p * np.eye(rho.dimension) / rho.dimension
    return DensityMatrix(rho.n_qubits, mixed)


# ---------------------------------------------------------------------------
# Composition and local action
# ---------------------------------------------------------------------------

def tensor(a: State, b: State) -> State:
    """Kronecker product; a's qubits become the high bits"""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(
            a.n_qubits + b.n_qubits,
            np.kron(a.amplitudes, b.amplitudes),
            normalized=a.normalized and b.normalized,
        )
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(
            a.n_qubits + b.n_qubits,
            np.kron(a.matrix, b.matrix),
            normalized=a.normalized and b.normalized,
        )
    raise InvalidArgumentError(
        f"tensor needs operands of the same kind, got {type(a).__name__} and {type(b).__name__}"
    )


def _apply_on_axis(tensor_: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(matrix, tensor_, axes=([1], [axis])), 0, axis)


def apply_local(op: Operator, target_qubit: int, state: State) -> State:
    """
    Apply I x ... x op x ... x I to one qubit.

    Density matrices transform as M rho M^dag. The result is not renormalized;
    its `normalized` tag records whether the norm (trace) is still 1.
    """
    matrix = _operator_matrix(op)
    n = state.n_qubits
    if isinstance(target_qubit, bool) or not 0 <= target_qubit < n:
        raise InvalidArgumentError(f"target qubit {target_qubit} out of range for {n} qubits")

    if isinstance(state, PureState):
        psi = state.amplitudes.reshape([2] * n)
        out = _apply_on_axis(psi, matrix, target_qubit).reshape(-1)
        norm_sq = float(np.real(np.vdot(out, out)))
        return PureState(n, out, normalized=abs(norm_sq - 1.0) <= NORM_TOLERANCE)

    rho = state.matrix.reshape([2] * (2 * n))
    rho = _apply_on_axis(rho, matrix, target_qubit)
    rho = _apply_on_axis(rho, matrix.conj(), n + target_qubit)
    out = rho.reshape(2 ** n, 2 ** n)
    out = 0.5 * (out + out.conj().T)
    trace = float(np.real(np.trace(out)))
    return DensityMatrix(n, out, normalized=abs(trace - 1.0) <= TRACE_TOLERANCE)


def apply_local_all(op: Operator, state: State) -> State:
    """Apply the same single-qubit operator to every qubit"""
    for qubit in range(state.n_qubits):
        state = apply_local(op, qubit, state)
    return state


def apply_product(ops: Sequence[Operator], state: State) -> State:
    """Apply ops[k] to qubit k"""
    if len(ops) != state.n_qubits:
        raise InvalidArgumentError(f"Need {state.n_qubits} local operators, got {len(ops)}")
    for qubit, op in enumerate(ops):
        state = apply_local(op, qubit, state)
    return state


def overlap(a: PureState, b: PureState) -> float:
    """|<a|b>|^2, insensitive to global phase"""
    if a.n_qubits != b.n_qubits:
        raise InvalidArgumentError("States have different qubit counts")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


# ---------------------------------------------------------------------------
# D/A basis structure
# ---------------------------------------------------------------------------

def basis_labels(n: int, basis: str = "HV") -> List[str]:
    """Basis strings in index order, e.g. ['HH', 'HV', 'VH', 'VV']"""
    letters = {"HV": "HV", "DA": "DA"}.get(basis)
    if letters is None:
        raise InvalidArgumentError(f"basis must be 'HV' or 'DA', got {basis!r}")
    return ["".join(chars) for chars in product(letters, repeat=n)]


def _da_coefficients(state: PureState) -> np.ndarray:
    # Had is real symmetric, so <x_DA|psi> = (Had^n psi)_x
    return apply_local_all(hadamard(), state).amplitudes


def expand_in_da_basis(state: PureState) -> List[Tuple[str, complex]]:
    """Amplitudes of `state` on the 2^N product D/A strings, in index order"""
    coefficients = _da_coefficients(state)
    return list(zip(basis_labels(state.n_qubits, "DA"), (complex(c) for c in coefficients)))


def to_da_basis(rho: DensityMatrix) -> np.ndarray:
    """Matrix elements <x|rho|y> for D/A product strings x, y"""
    had = hadamard().matrix
    full = reduce(np.kron, [had] * rho.n_qubits)
    return full @ rho.matrix @ full


def d_counts(n: int) -> np.ndarray:
    """Number of D factors in each D/A basis string, in index order"""
    indices = np.arange(2 ** n)
    a_counts = np.array([bin(i).count("1") for i in indices])
    return n - a_counts


def factorize_ghz(n: int, m: int, sign: str = "+") -> PureState:
    """
    Right-hand side of the GHZ splitting rule
    |N+-> = (|(N-M)+>|M+-> + |(N-M)->|M-+>)/sqrt(2), with |1+-> = |D>, |A>.
    """
    _check_sign(sign)
    if not 1 <= m < n:
        raise InvalidArgumentError(f"need 1 <= m < n, got n={n}, m={m}")
    flipped = "-" if sign == "+" else "+"
    vector = (
        np.kron(_ghz_vector(n - m, "+"), _ghz_vector(m, sign))
        + np.kron(_ghz_vector(n - m, "-"), _ghz_vector(m, flipped))
    ) / np.sqrt(2.0)
    return PureState(n, vector)


@dataclass(frozen=True)
class GhzDecomposition:
    """GHZ = w_weight * |W'_N> + phi_weight * |phi>"""
    w_component: PureState
    phi: Optional[PureState]
    w_weight: float
    phi_weight: float
    relabeled: bool


def relabeled_ghz(n: int) -> PureState:
    """|N+> with D<->A applied to qubit 0 when n is even, so only odd D-counts remain"""
    ghz = make_ghz(n, "+")
    if n % 2 == 0:
        ghz = apply_local(da_swap(), 0, ghz)
    return ghz


def decompose_ghz(n: int) -> GhzDecomposition:
    """Split |N+> (relabeled for even n) into its W' part and the >=3-D remainder"""
    n = _check_at_least_two(n)
    had = hadamard()
    coefficients = _da_coefficients(relabeled_ghz(n))
    counts = d_counts(n)

    w_part = np.where(counts == 1, coefficients, 0.0)
    phi_part = np.where((counts >= 3) & (counts % 2 == 1), coefficients, 0.0)
    w_weight = float(np.linalg.norm(w_part))
    phi_weight = float(np.linalg.norm(phi_part))

    def _back_to_hv(da_vector: np.ndarray, weight: float) -> PureState:
        return apply_local_all(had, PureState(n, da_vector / weight))

    phi = _back_to_hv(phi_part, phi_weight) if phi_weight > NORM_TOLERANCE else None
    logger.debug(f"GHZ({n}) split: W' weight {w_weight:.6f}, remainder weight {phi_weight:.6f}")
    return GhzDecomposition(
        w_component=_back_to_hv(w_part, w_weight),
        phi=phi,
        w_weight=w_weight,
        phi_weight=phi_weight,
        relabeled=n % 2 == 0,
    )


# ---------------------------------------------------------------------------
# Source-side projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionResult:
    """Unnormalized post-projection state and its probability"""
    state: PureState
    probability: float


def parity_check(state: PureState, qubit_a: int, qubit_b: int) -> ProjectionResult:
    """Keep only the components where two qubits carry equal H/V values"""
    n = state.n_qubits
    if not (0 <= qubit_a < n and 0 <= qubit_b < n) or qubit_a == qubit_b:
        raise InvalidArgumentError(f"invalid qubit pair ({qubit_a}, {qubit_b}) for {n} qubits")
    indices = np.arange(2 ** n)
    bit_a = (indices >> (n - 1 - qubit_a)) & 1
    bit_b = (indices >> (n - 1 - qubit_b)) & 1
    projected = np.where(bit_a == bit_b, state.amplitudes, 0.0)
    probability = float(np.real(np.vdot(projected, projected)))
    return ProjectionResult(PureState(n, projected, normalized=False), probability)


def project_qubit(state: PureState, qubit: int, label: str) -> ProjectionResult:
    """Project one qubit onto a polarization ket and remove it (heralding)"""
    n = state.n_qubits
    if n < 2:
        raise InvalidArgumentError("need at least 2 qubits to herald on one")
    if not 0 <= qubit < n:
        raise InvalidArgumentError(f"qubit {qubit} out of range for {n} qubits")
    if label not in KETS:
        raise InvalidArgumentError(f"Unknown polarization label {label!r}")
    psi = state.amplitudes.reshape([2] * n)
    reduced = np.tensordot(KETS[label].conj(), psi, axes=([0], [qubit])).reshape(-1)
    probability = float(np.real(np.vdot(reduced, reduced)))
    if probability < 1e-15:
        raise DegenerateInputError(f"projection of qubit {qubit} onto |{label}> has zero probability")
    return ProjectionResult(PureState(n - 1, reduced, normalized=False), probability)

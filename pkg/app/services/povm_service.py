"""
GHZ -> approximate W conversion by local filtering and post-selection.
"""
from dataclasses import dataclass
import logging
from math import comb
from typing import List, Optional, Sequence, Union

import numpy as np

from app.core.errors import DegenerateInputError, InvalidArgumentError
from app.models.povm import FilterBasis, FilterOutcome, FilterStrength, KrausFilter, Outcome
from app.models.state import DensityMatrix, PureState
from app.services import state_service

logger = logging.getLogger(__name__)

State = Union[PureState, DensityMatrix]

DEGENERATE_NORM = 1e-15


def _as_strength(strength: Union[FilterStrength, float]) -> FilterStrength:
    # Plain numbers are read as a^2, the measured quantity
    return strength if isinstance(strength, FilterStrength) else FilterStrength(strength)


def _weight(state: State) -> float:
    if isinstance(state, PureState):
        return state.norm_squared
    return state.trace


def _renormalize(state: State) -> State:
    weight = _weight(state)
    if weight < DEGENERATE_NORM:
        raise DegenerateInputError(f"post-filter weight {weight:.3e} is numerically zero")
    if isinstance(state, PureState):
        return PureState(state.n_qubits, state.amplitudes / np.sqrt(weight))
    return DensityMatrix(state.n_qubits, state.matrix / weight)


def apply_filter_all(
    state: State,
    strength: Union[FilterStrength, float],
    basis: Union[FilterBasis, str] = FilterBasis.DA,
) -> FilterOutcome:
    """
    Apply the keep operator M1 on every qubit and post-select that branch.

    Args:
        state: pure state or density matrix
        strength: filter strength (a FilterStrength or a^2)
        basis: DA (analysis frame) or HV (lab frame)

    Returns:
        FilterOutcome: renormalized output and the pre-normalization weight
        as success probability
    """
    strength = _as_strength(strength)
    kraus = KrausFilter(strength, FilterBasis(basis))
    weight_in = _weight(state)
    if weight_in < DEGENERATE_NORM:
        raise DegenerateInputError("input state has zero norm")

    filtered = state_service.apply_local_all(kraus.matrix, state)
    success_probability = _weight(filtered) / weight_in
    output = _renormalize(filtered)

    logger.info(
        f"Filter a^2={strength.a_squared:.4f} ({kraus.basis.value}) on {state.n_qubits} qubits: "
        f"success probability {success_probability:.6f}"
    )
    return FilterOutcome(
        output_state=output,
        success_probability=float(success_probability),
        per_qubit_outcome=[Outcome.EPSILON_1] * state.n_qubits,
        strength=strength,
        basis=kraus.basis,
    )


def apply_filter_lab(state: State, strength: Union[FilterStrength, float]) -> FilterOutcome:
    """
    Lab realization: rotate each qubit by 45 degrees with a half-wave plate,
    filter in H/V, rotate back. Agrees with the DA-basis filter.
    """
    strength = _as_strength(strength)
    # fast axis at 22.5 degrees
    plates = [state_service.half_wave_plate(np.pi / 8.0)] * state.n_qubits
    rotated = state_service.apply_product(plates, state)
    outcome = apply_filter_all(rotated, strength, FilterBasis.HV)
    back = state_service.apply_product([plate.dagger for plate in plates], outcome.output_state)
    return FilterOutcome(
        output_state=back,
        success_probability=outcome.success_probability,
        per_qubit_outcome=outcome.per_qubit_outcome,
        strength=strength,
        basis=FilterBasis.HV,
    )


def epsilon2_branch(
    state: State,
    strength: Union[FilterStrength, float],
    qubit: int,
    basis: Union[FilterBasis, str] = FilterBasis.DA,
) -> FilterOutcome:
    """Renormalized state after the discard outcome on a single qubit"""
    strength = _as_strength(strength)
    kraus = KrausFilter(strength, FilterBasis(basis))
    branch = state_service.apply_local(kraus.discard_matrix, qubit, state)
    probability = _weight(branch) / _weight(state)
    outcomes = [Outcome.EPSILON_1] * state.n_qubits
    outcomes[qubit] = Outcome.EPSILON_2
    return FilterOutcome(_renormalize(branch), float(probability), outcomes, strength, kraus.basis)


def sample_filter_outcomes(
    state: State,
    strength: Union[FilterStrength, float],
    basis: Union[FilterBasis, str] = FilterBasis.DA,
    rng: Optional[np.random.Generator] = None,
) -> FilterOutcome:
    """
    Measure the filter qubit by qubit, drawing each outcome from the
    current state's Born probabilities.

    Returns:
        FilterOutcome: the realized branch state, the probability of the whole
        outcome string, and the per-qubit outcomes
    """
    strength = _as_strength(strength)
    kraus = KrausFilter(strength, FilterBasis(basis))
    rng = rng if rng is not None else np.random.default_rng()

    current = _renormalize(state)
    probability = 1.0
    outcomes: List[Outcome] = []
    for qubit in range(state.n_qubits):
        kept = state_service.apply_local(kraus.matrix, qubit, current)
        p_keep = min(max(_weight(kept), 0.0), 1.0)
        if rng.random() < p_keep:
            outcomes.append(Outcome.EPSILON_1)
            probability *= p_keep
            current = _renormalize(kept)
        else:
            outcomes.append(Outcome.EPSILON_2)
            probability *= 1.0 - p_keep
            current = _renormalize(state_service.apply_local(kraus.discard_matrix, qubit, current))

    logger.debug(f"Sampled filter outcomes {[o.value for o in outcomes]} (p={probability:.6f})")
    return FilterOutcome(current, float(probability), outcomes, strength, kraus.basis)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _check_n(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidArgumentError("n must be ≥ 2")
    return int(n)


def fidelity_w3_analytic(strength: Union[FilterStrength, float]) -> float:
    """3 / (a^4 + 3)"""
    a2 = _as_strength(strength).a_squared
    return 3.0 / (a2 * a2 + 3.0)


def fidelity_ghz3_analytic(strength: Union[FilterStrength, float]) -> float:
    """(a^4 + 6a^2 + 9) / (4a^4 + 12)"""
    a2 = _as_strength(strength).a_squared
    return (a2 * a2 + 6.0 * a2 + 9.0) / (4.0 * a2 * a2 + 12.0)


def fidelity_wN_analytic(n: int, strength: Union[FilterStrength, float]) -> float:
    """2 a^2 N / ((1 + a^2)^N - (1 - a^2)^N), for even and odd N alike"""
    n = _check_n(n)
    a2 = _as_strength(strength).a_squared
    return 2.0 * a2 * n / ((1.0 + a2) ** n - (1.0 - a2) ** n)


def fidelity_ghz_analytic(n: int, strength: Union[FilterStrength, float]) -> float:
    """Overlap of the converted state with the (relabeled) input GHZ state"""
    n = _check_n(n)
    strength = _as_strength(strength)
    a, a2 = strength.a, strength.a_squared
    odd_sum_a = ((1.0 + a) ** n - (1.0 - a) ** n) / 2.0
    odd_sum_a2 = ((1.0 + a2) ** n - (1.0 - a2) ** n) / 2.0
    return odd_sum_a ** 2 / (2.0 ** (n - 1) * odd_sum_a2)


def success_probability_analytic(n: int, strength: Union[FilterStrength, float]) -> float:
    """((1 + a^2)^N - (1 - a^2)^N) / 2^N; (a^6 + 3a^2)/4 at N = 3"""
    n = _check_n(n)
    a2 = _as_strength(strength).a_squared
    return ((1.0 + a2) ** n - (1.0 - a2) ** n) / 2.0 ** n


# ---------------------------------------------------------------------------
# Full procedure
# ---------------------------------------------------------------------------

def convert_ghz_to_w(n: int, strength: Union[FilterStrength, float]) -> FilterOutcome:
    """
    Build |N+>, relabel D<->A on qubit 0 for even N, filter every qubit and
    post-select the all-keep branch.
    """
    n = _check_n(n)
    strength = _as_strength(strength)
    outcome = apply_filter_all(state_service.relabeled_ghz(n), strength, FilterBasis.DA)
    logger.info(
        f"Converted GHZ({n}) at a^2={strength.a_squared:.4f}: "
        f"F(W')={state_service.overlap(outcome.output_state, state_service.make_w_prime(n)):.6f}"
    )
    return outcome


@dataclass(frozen=True)
class SuppressionRow:
    """Amplitude of the D/A strings with a given number of D factors"""
    d_count: int
    multiplicity: int
    pre_amplitude: complex
    post_amplitude: complex
    scaling: float
    expected_scaling: float


def amplitude_suppression_report(n: int, strength: Union[FilterStrength, float]) -> List[SuppressionRow]:
    """
    Group D/A amplitudes of the (relabeled) GHZ state by D-count before and
    after the unnormalized filter. Each k-D amplitude is scaled by a^k.
    """
    n = _check_n(n)
    strength = _as_strength(strength)
    kraus = KrausFilter(strength, FilterBasis.DA)

    before = state_service.relabeled_ghz(n)
    after = state_service.apply_local_all(kraus.matrix, before)
    pre = np.array([amp for _, amp in state_service.expand_in_da_basis(before)])
    post = np.array([amp for _, amp in state_service.expand_in_da_basis(after)])
    counts = state_service.d_counts(n)

    rows = []
    for k in range(n + 1):
        members = np.flatnonzero((counts == k) & (np.abs(pre) > 1e-12))
        if members.size == 0:
            continue
        first = members[0]
        rows.append(SuppressionRow(
            d_count=k,
            multiplicity=int(members.size),
            pre_amplitude=complex(pre[first]),
            post_amplitude=complex(post[first]),
            scaling=float(abs(post[first]) / abs(pre[first])),
            expected_scaling=strength.a ** k,
        ))
    return rows


@dataclass(frozen=True)
class TradeoffRow:
    a_squared: float
    fidelity_w: float
    success_probability: float


def tradeoff_table(n: int, a_squared_values: Sequence[float]) -> List[TradeoffRow]:
    """Fidelity with W'_N against success probability over a range of strengths"""
    n = _check_n(n)
    return [
        TradeoffRow(
            a_squared=float(a2),
            fidelity_w=fidelity_wN_analytic(n, a2),
            success_probability=success_probability_analytic(n, a2),
        )
        for a2 in a_squared_values
    ]


def expected_multiplicity(n: int, k: int) -> int:
    """Number of D/A strings with k D factors"""
    return comb(n, k)

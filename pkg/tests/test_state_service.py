#!/usr/bin/env python3
"""
Tests for canonical states, local operators and the D/A basis structure
"""
import logging
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.errors import DegenerateInputError, InvalidArgumentError
from app.models.state import DensityMatrix, LocalUnitary, PureState
from app.services import state_service

logger = logging.getLogger(__name__)

S = 1.0 / np.sqrt(2.0)


def test_make_ghz_amplitudes():
    """GHZ states put 1/sqrt(2) on the all-H and all-V strings"""
    ghz = state_service.make_ghz(3, "+")
    expected = np.zeros(8)
    expected[0] = expected[7] = S
    assert np.allclose(ghz.amplitudes, expected)

    assert np.allclose(state_service.make_ghz(2, "+").amplitudes, [S, 0, 0, S])
    assert np.isclose(state_service.make_ghz(3, "-").amplitudes[7], -S)
    logger.info("GHZ amplitude test passed")


def test_invalid_qubit_counts_are_rejected():
    """n < 2 and unknown signs raise InvalidArgumentError"""
    for n in (0, 1, -3):
        with pytest.raises(InvalidArgumentError, match="n must be"):
            state_service.make_ghz(n)
    with pytest.raises(InvalidArgumentError):
        state_service.make_w_prime(1)
    with pytest.raises(InvalidArgumentError):
        state_service.make_ghz(3, "x")


def test_w_prime_matches_hand_expansion():
    """W'_3 is (|DAA> + |ADA> + |AAD>)/sqrt(3) and has overlap 3/4 with GHZ_3"""
    w_prime = state_service.make_w_prime(3)
    by_hand = sum(
        state_service.product_state(labels).amplitudes for labels in ("DAA", "ADA", "AAD")
    ) / np.sqrt(3.0)
    assert np.isclose(w_prime.norm_squared, 1.0)
    assert np.isclose(state_service.overlap(w_prime, PureState(3, by_hand)), 1.0)
    assert np.isclose(state_service.overlap(state_service.make_ghz(3), w_prime), 0.75)

    two = state_service.make_w_prime(2)
    by_hand = (state_service.product_state("DA").amplitudes + state_service.product_state("AD").amplitudes) / np.sqrt(2.0)
    assert np.isclose(state_service.overlap(two, PureState(2, by_hand)), 1.0)


def test_w_hv_indices_and_relation_to_w_prime():
    """W in H/V sits on HVV, VHV, VVH and maps to W' under a Hadamard on every qubit"""
    w = state_service.make_w_hv(3)
    assert np.allclose(np.flatnonzero(np.abs(w.amplitudes) > 1e-12), [3, 5, 6])
    assert np.allclose(w.amplitudes[[3, 5, 6]], 1.0 / np.sqrt(3.0))

    rotated = state_service.apply_local_all(state_service.hadamard(), w)
    assert np.isclose(state_service.overlap(rotated, state_service.make_w_prime(3)), 1.0)

    psi_plus = state_service.make_bell("psi+")
    assert np.isclose(state_service.overlap(state_service.make_w_hv(2), psi_plus), 1.0)


def test_tensor_products():
    """Kronecker products of kets and of density matrices"""
    hv = state_service.tensor(state_service.product_state("H"), state_service.product_state("V"))
    assert np.allclose(hv.amplitudes, [0, 1, 0, 0])

    phi = state_service.make_bell("phi+")
    four = state_service.tensor(phi, phi)
    assert four.n_qubits == 4 and np.isclose(four.norm_squared, 1.0)

    rho = state_service.tensor(state_service.to_density(phi), state_service.maximally_mixed(1))
    assert isinstance(rho, DensityMatrix)
    assert np.isclose(rho.trace, 1.0)

    with pytest.raises(InvalidArgumentError):
        state_service.tensor(phi, state_service.to_density(phi))


def test_local_operators():
    """Identity leaves states alone; HWP at 22.5 degrees takes H to D"""
    ghz = state_service.make_ghz(3)
    same = state_service.apply_local(state_service.identity(), 1, ghz)
    assert np.allclose(same.amplitudes, ghz.amplitudes)

    hwp = state_service.half_wave_plate(np.pi / 8.0)
    assert np.allclose(hwp.matrix, state_service.hadamard().matrix, atol=1e-12)
    d = state_service.apply_local(hwp, 0, state_service.product_state("H"))
    assert np.isclose(state_service.overlap(d, state_service.product_state("D")), 1.0)

    qwp = state_service.quarter_wave_plate(np.pi / 4.0)
    circular = state_service.apply_local(qwp, 0, state_service.product_state("H"))
    probabilities = [
        state_service.overlap(circular, state_service.product_state(label)) for label in ("R", "L")
    ]
    assert np.isclose(max(probabilities), 1.0)

    with pytest.raises(InvalidArgumentError):
        state_service.apply_local(state_service.identity(), 3, ghz)


def test_product_of_local_unitaries_is_undone_by_daggers():
    """Per-qubit operators followed by their adjoints restore the state"""
    ghz = state_service.make_ghz(3)
    ops = [
        state_service.euler_zyz(0.3, 1.1, -0.4),
        state_service.quarter_wave_plate(0.2),
        state_service.half_wave_plate(np.pi / 8.0),
    ]
    rotated = state_service.apply_product(ops, ghz)
    assert not np.isclose(state_service.overlap(rotated, ghz), 1.0)
    restored = state_service.apply_product([op.dagger for op in ops], rotated)
    assert np.isclose(state_service.overlap(restored, ghz), 1.0)

    rho = state_service.apply_product(ops, state_service.to_density(ghz))
    assert np.allclose(rho.matrix, state_service.to_density(rotated).matrix)

    assert ops[1].dagger.name.endswith("^dag")
    assert np.allclose(ops[1].dagger.matrix @ ops[1].matrix, np.eye(2))
    with pytest.raises(InvalidArgumentError):
        state_service.apply_product(ops[:2], ghz)


def test_da_swap_exchanges_d_and_a():
    """diag(1,-1) on every qubit turns single-D strings into single-A strings"""
    swapped = state_service.apply_local_all(state_service.da_swap(), state_service.make_w_prime(3))
    single_a = sum(
        state_service.product_state(labels).amplitudes for labels in ("ADD", "DAD", "DDA")
    ) / np.sqrt(3.0)
    assert np.isclose(state_service.overlap(swapped, PureState(3, single_a)), 1.0)


def test_apply_local_on_density_matrix_matches_pure():
    """M rho M^dag agrees with acting on the ket"""
    op = state_service.euler_zyz(0.3, 1.1, -0.7)
    ghz = state_service.make_ghz(3)
    pure = state_service.apply_local(op, 2, ghz)
    mixed = state_service.apply_local(op, 2, state_service.to_density(ghz))
    assert np.allclose(mixed.matrix, state_service.to_density(pure).matrix)


def test_non_unitary_filter_marks_state_unnormalized():
    """A contraction leaves the tag normalized=False and the norm below one"""
    shrink = np.diag([1.0, 0.5])
    out = state_service.apply_local(shrink, 0, state_service.make_ghz(2))
    assert out.normalized is False
    assert out.norm_squared < 1.0


def test_zyz_round_trip():
    """zyz_angles inverts euler_zyz up to a global phase"""
    target = state_service.hadamard()
    rebuilt = state_service.euler_zyz(*state_service.zyz_angles(target))
    inner = np.trace(rebuilt.matrix.conj().T @ target.matrix)
    assert np.isclose(abs(inner), 2.0)


def test_local_unitary_rejects_non_unitary():
    with pytest.raises(InvalidArgumentError, match="not unitary"):
        LocalUnitary(np.diag([1.0, 0.5]), name="attenuator")


def test_da_expansion_of_ghz():
    """GHZ_N lives on even-A strings with equal amplitudes 1/sqrt(2^(N-1))"""
    expansion = dict(state_service.expand_in_da_basis(state_service.make_ghz(3)))
    for labels in ("DDD", "DAA", "ADA", "AAD"):
        assert np.isclose(expansion[labels], 0.5)
    for labels in ("DDA", "DAD", "ADD", "AAA"):
        assert np.isclose(expansion[labels], 0.0)

    for n in range(2, 9):
        coefficients = np.array([c for _, c in state_service.expand_in_da_basis(state_service.make_ghz(n))])
        a_counts = n - state_service.d_counts(n)
        even = a_counts % 2 == 0
        assert np.allclose(coefficients[even], 1.0 / np.sqrt(2.0 ** (n - 1)))
        assert np.allclose(coefficients[~even], 0.0)

    d_state = dict(state_service.expand_in_da_basis(state_service.product_state("D")))
    assert np.isclose(d_state["D"], 1.0) and np.isclose(d_state["A"], 0.0)


def test_factorize_ghz_reproduces_ghz():
    """The splitting rule rebuilds |N+-> for every cut point"""
    for n in range(2, 9):
        for m in range(1, n):
            for sign in ("+", "-"):
                split = state_service.factorize_ghz(n, m, sign)
                assert np.allclose(split.amplitudes, state_service.make_ghz(n, sign).amplitudes)
    with pytest.raises(InvalidArgumentError):
        state_service.factorize_ghz(3, 3)


def test_decompose_ghz_reconstructs_state():
    """GHZ = sqrt(N/2^(N-1)) W' + remainder, remainder has >=3 D factors"""
    for n in (3, 5, 7):
        parts = state_service.decompose_ghz(n)
        assert np.isclose(parts.w_weight, np.sqrt(n / 2.0 ** (n - 1)))
        assert np.isclose(parts.phi_weight, np.sqrt((2.0 ** (n - 1) - n) / 2.0 ** (n - 1)))
        rebuilt = parts.w_weight * parts.w_component.amplitudes + parts.phi_weight * parts.phi.amplitudes
        assert np.allclose(rebuilt, state_service.make_ghz(n).amplitudes, atol=1e-12)
        assert np.isclose(state_service.overlap(parts.w_component, state_service.make_w_prime(n)), 1.0)

    two = state_service.decompose_ghz(2)
    assert two.phi is None and two.relabeled
    assert np.isclose(two.w_weight, 1.0)


def test_relabeled_ghz_has_only_odd_d_counts():
    """For even N the D<->A relabel on qubit 0 moves GHZ onto odd D-counts"""
    for n in (2, 4, 6):
        coefficients = np.array([c for _, c in state_service.expand_in_da_basis(state_service.relabeled_ghz(n))])
        counts = state_service.d_counts(n)
        assert np.allclose(coefficients[counts % 2 == 0], 0.0)


def test_to_da_basis_of_w_prime():
    """In the D/A basis W' is supported on the single-D strings only"""
    rho = state_service.to_density(state_service.make_w_prime(3))
    da = state_service.to_da_basis(rho)
    labels = state_service.basis_labels(3, "DA")
    support = [labels[i] for i in np.flatnonzero(np.abs(np.diag(da)) > 1e-12)]
    assert sorted(support) == ["AAD", "ADA", "DAA"]


def test_source_chain_produces_ghz3():
    """phi+ phi+ -> parity check -> project one photon on D gives GHZ_3"""
    phi = state_service.make_bell("phi+")
    parity = state_service.parity_check(state_service.tensor(phi, phi), 1, 2)
    assert np.isclose(parity.probability, 0.5)
    four_plus = parity.state.normalize()
    assert np.isclose(state_service.overlap(four_plus, state_service.make_ghz(4)), 1.0)

    heralded = state_service.project_qubit(four_plus, 3, "D")
    assert np.isclose(heralded.probability, 0.5)
    assert np.isclose(state_service.overlap(heralded.state.normalize(), state_service.make_ghz(3)), 1.0)

    with pytest.raises(DegenerateInputError):
        state_service.project_qubit(state_service.product_state("HH"), 0, "V")


def test_white_noise_mixture():
    """(1-p) rho + p I/d keeps trace one and lowers purity"""
    rho = state_service.mix_with_white_noise(state_service.make_ghz(3), 0.2)
    assert np.isclose(rho.trace, 1.0)
    assert rho.purity < 1.0
    assert np.isclose(state_service.maximally_mixed(3).purity, 1.0 / 8.0)
    with pytest.raises(InvalidArgumentError):
        state_service.mix_with_white_noise(state_service.make_ghz(3), 1.5)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    sys.exit(pytest.main([__file__, "-v"]))

#!/usr/bin/env python3
"""
Tests for the local filter, the closed-form conversion figures and the
amplitude suppression pattern
"""
import logging
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.errors import InvalidArgumentError
from app.models.povm import FilterBasis, FilterStrength, KrausFilter, Outcome
from app.services import povm_service, state_service

logger = logging.getLogger(__name__)

A2 = 0.38


def test_filter_strength_validation():
    """a^2 lives in (0, 1]; transmissions give the ratio"""
    for bad in (0.0, -0.1, 1.2, float("nan")):
        with pytest.raises(InvalidArgumentError):
            FilterStrength(bad)
    assert np.isclose(FilterStrength.from_a(0.5).a_squared, 0.25)
    assert np.isclose(FilterStrength(0.25).a, 0.5)
    assert np.isclose(FilterStrength.from_transmissions(0.88, 0.33).a_squared, 0.375)


def test_kraus_operators_form_a_povm():
    """eps1 + eps2 = I in both bases"""
    for basis in (FilterBasis.DA, FilterBasis.HV):
        kraus = KrausFilter(FilterStrength(A2), basis)
        assert np.allclose(kraus.epsilon1 + kraus.epsilon2, np.eye(2))
        assert np.allclose(kraus.kraus(Outcome.EPSILON_1), kraus.matrix)

    hv = KrausFilter(FilterStrength(A2), FilterBasis.HV).matrix
    assert np.allclose(hv, np.diag([np.sqrt(A2), 1.0]))


def test_filter_on_ghz3(ghz3):
    """Success probability (a^6 + 3a^2)/4 and fidelity 3/(a^4 + 3) with W'"""
    outcome = povm_service.apply_filter_all(ghz3, A2)
    assert abs(outcome.success_probability - 0.298718) < 1e-6
    assert abs(outcome.success_probability - (A2 ** 3 + 3 * A2) / 4.0) < 1e-9
    fidelity = state_service.overlap(outcome.output_state, state_service.make_w_prime(3))
    assert abs(fidelity - 0.954078) < 5e-6
    assert outcome.per_qubit_outcome == [Outcome.EPSILON_1] * 3
    assert np.isclose(outcome.output_state.norm_squared, 1.0)


def test_identity_filter_leaves_input(ghz3):
    """a = 1 is the identity"""
    outcome = povm_service.apply_filter_all(ghz3, 1.0)
    assert np.isclose(outcome.success_probability, 1.0)
    assert np.allclose(outcome.output_state.amplitudes, ghz3.amplitudes)


def test_filter_on_density_matrix_matches_pure(ghz3):
    """Density-matrix and state-vector paths agree"""
    pure = povm_service.apply_filter_all(ghz3, A2)
    mixed = povm_service.apply_filter_all(state_service.to_density(ghz3), A2)
    assert np.isclose(pure.success_probability, mixed.success_probability)
    assert np.allclose(mixed.output_state.matrix, state_service.to_density(pure.output_state).matrix)


def test_lab_filter_matches_analysis_frame(ghz3):
    """HWP rotation + H/V filter + HWP back reproduces the D/A filter"""
    lab = povm_service.apply_filter_lab(ghz3, A2)
    frame = povm_service.apply_filter_all(ghz3, A2, FilterBasis.DA)
    assert np.isclose(lab.success_probability, frame.success_probability)
    assert np.isclose(state_service.overlap(lab.output_state, frame.output_state), 1.0)


def test_closed_forms_three_qubits():
    """Endpoints and the value at a^2 = 0.38"""
    assert povm_service.fidelity_w3_analytic(1.0) == 0.75
    assert abs(povm_service.fidelity_w3_analytic(A2) - 0.954078) < 5e-6
    assert abs(povm_service.fidelity_w3_analytic(A2) - 3.0 / (A2 ** 2 + 3.0)) < 1e-12
    assert abs(povm_service.fidelity_w3_analytic(1e-12) - 1.0) < 1e-9
    assert povm_service.fidelity_ghz3_analytic(1.0) == 1.0
    assert abs(povm_service.fidelity_ghz3_analytic(1e-12) - 0.75) < 1e-9
    assert abs(povm_service.fidelity_ghz3_analytic(A2) - 0.908313) < 5e-6


def test_general_n_formula_agrees_with_three_qubit_form():
    for a2 in (0.05, 0.2, A2, 0.7, 1.0):
        assert abs(povm_service.fidelity_wN_analytic(3, a2) - povm_service.fidelity_w3_analytic(a2)) < 1e-12
        assert abs(povm_service.fidelity_ghz_analytic(3, a2) - povm_service.fidelity_ghz3_analytic(a2)) < 1e-12
    assert abs(povm_service.fidelity_wN_analytic(4, A2) - 0.873818) < 5e-6
    assert abs(povm_service.fidelity_wN_analytic(4, A2) - 3.04 / (1.38 ** 4 - 0.62 ** 4)) < 1e-12
    for n in range(2, 9):
        assert np.isclose(povm_service.fidelity_wN_analytic(n, 1.0), n / 2.0 ** (n - 1))
    for a2 in (0.1, 0.5, 0.9):
        assert np.isclose(povm_service.fidelity_wN_analytic(2, a2), 1.0)


def test_conversion_matches_formulas():
    """Brute-force state vectors reproduce the closed forms for N = 2..8"""
    for n in range(2, 9):
        w_prime = state_service.make_w_prime(n)
        for a2 in np.linspace(0.1, 1.0, 10):
            outcome = povm_service.convert_ghz_to_w(n, a2)
            fidelity = state_service.overlap(outcome.output_state, w_prime)
            assert abs(fidelity - povm_service.fidelity_wN_analytic(n, a2)) < 1e-10
            assert abs(outcome.success_probability - povm_service.success_probability_analytic(n, a2)) < 1e-10
            ghz_overlap = state_service.overlap(outcome.output_state, state_service.relabeled_ghz(n))
            assert abs(ghz_overlap - povm_service.fidelity_ghz_analytic(n, a2)) < 1e-10


def test_suppression_pattern():
    """Each k-D amplitude is multiplied by a^k"""
    rows = povm_service.amplitude_suppression_report(3, A2)
    assert [row.d_count for row in rows] == [1, 3]
    for row in rows:
        assert np.isclose(row.scaling, row.expected_scaling)
    assert rows[0].multiplicity == 3 and rows[1].multiplicity == 1

    rows = povm_service.amplitude_suppression_report(5, 0.2)
    assert {row.d_count: row.multiplicity for row in rows} == {1: 5, 3: 10, 5: 1}
    assert all(np.isclose(row.scaling, np.sqrt(0.2) ** row.d_count) for row in rows)
    assert povm_service.expected_multiplicity(5, 3) == 10

    assert all(np.isclose(row.scaling, 1.0) for row in povm_service.amplitude_suppression_report(4, 1.0))


def test_tradeoff_table_is_monotone():
    """Stronger filtering raises the W' fidelity and lowers the success probability"""
    table = povm_service.tradeoff_table(3, [0.1, 0.3, 0.5, 0.7, 1.0])
    fidelities = [row.fidelity_w for row in table]
    probabilities = [row.success_probability for row in table]
    assert fidelities == sorted(fidelities, reverse=True)
    assert probabilities == sorted(probabilities)
    assert np.isclose(table[-1].success_probability, 1.0)


def test_discard_branch_and_sampling(ghz3, rng):
    """Single-qubit discard branch and sampled outcome strings"""
    branch = povm_service.epsilon2_branch(ghz3, A2, 0)
    assert branch.per_qubit_outcome[0] is Outcome.EPSILON_2
    assert np.isclose(branch.success_probability, (1.0 - A2) / 2.0)

    sampled = povm_service.sample_filter_outcomes(ghz3, A2, rng=rng)
    assert len(sampled.per_qubit_outcome) == 3
    assert 0.0 < sampled.success_probability <= 1.0
    if all(o is Outcome.EPSILON_1 for o in sampled.per_qubit_outcome):
        assert np.isclose(sampled.success_probability, 0.298718, atol=1e-6)


def test_invalid_arguments():
    with pytest.raises(InvalidArgumentError):
        povm_service.fidelity_wN_analytic(1, A2)
    with pytest.raises(InvalidArgumentError):
        povm_service.apply_filter_all(state_service.make_ghz(3), 0.0)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    sys.exit(pytest.main([__file__, "-v"]))

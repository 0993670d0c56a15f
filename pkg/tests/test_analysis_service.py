#!/usr/bin/env python3
"""
Tests for fidelities, the local-unitary search, Monte Carlo error bars and
the conversion report
"""
import logging
import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.errors import InvalidArgumentError
from app.models.analysis import LocalRotationParams, TargetFamily, UncertaintyReport
from app.models.state import DensityMatrix
from app.services import analysis_service, povm_service, state_service, tomography_service

logger = logging.getLogger(__name__)


def _rotated(state, params):
    u = analysis_service.product_unitary(params)
    rho = state_service.to_density(state).matrix
    return DensityMatrix(state.n_qubits, u @ rho @ u.conj().T)


def test_fidelity_pure(ghz3, w_prime3):
    assert np.isclose(analysis_service.fidelity_pure(ghz3, ghz3), 1.0)
    assert np.isclose(analysis_service.fidelity_pure(ghz3, w_prime3), 0.75)
    mixed = state_service.maximally_mixed(3)
    assert np.isclose(analysis_service.fidelity_pure(mixed, ghz3), 1.0 / 8.0)
    with pytest.raises(InvalidArgumentError):
        analysis_service.fidelity_pure(ghz3, state_service.make_ghz(2))


def test_product_unitary_identity():
    u = analysis_service.product_unitary(LocalRotationParams.identity(3))
    assert np.allclose(u, np.eye(8))
    params = LocalRotationParams.from_vector(np.arange(9, dtype=float))
    assert params.n_qubits == 3
    assert np.allclose(params.as_vector(), np.arange(9))


def test_local_unitary_recovery(ghz3):
    """Randomly rotated GHZ states are recognised as members of GHZ_G"""
    rng = np.random.default_rng(2024)
    for trial in range(20):
        angles = np.column_stack([
            rng.uniform(0, 2 * np.pi, 3), rng.uniform(0, np.pi, 3), rng.uniform(0, 2 * np.pi, 3)
        ])
        rho = _rotated(ghz3, LocalRotationParams.from_vector(angles.reshape(-1)))
        value, params = analysis_service.fidelity_local_optimized(
            rho, TargetFamily.GHZ_G, starts=16, rng_seed=trial
        )
        assert value >= 0.9999, f"trial {trial}: {value}"
        assert params.n_qubits == 3


def test_w_family_contains_w_prime(w_prime3):
    """W' is a local rotation of W, found from the Hadamard start"""
    value, _ = analysis_service.fidelity_local_optimized(w_prime3, "W_G", starts=0)
    assert value >= 0.9999


def test_local_opt_never_below_canonical(ghz3):
    rho = state_service.mix_with_white_noise(ghz3, 0.4)
    canonical = analysis_service.fidelity_pure(rho, ghz3)
    value, _ = analysis_service.fidelity_local_optimized(rho, TargetFamily.GHZ_G, starts=0)
    assert value >= canonical - 1e-12
    with pytest.raises(InvalidArgumentError):
        analysis_service.fidelity_local_optimized(state_service.maximally_mixed(1), "GHZ_G")


def test_local_opt_is_invariant_under_local_rotations():
    """Rotating the state by a product unitary does not change the optimized fidelities"""
    filtered = povm_service.convert_ghz_to_w(3, 0.38).output_state
    rho = state_service.mix_with_white_noise(filtered, 0.1)
    ops = [
        state_service.euler_zyz(0.4, 1.2, -0.7),
        state_service.euler_zyz(2.1, 0.3, 0.9),
        state_service.half_wave_plate(0.35),
    ]
    rotated = state_service.apply_product(ops, rho)
    for family in (TargetFamily.GHZ_G, TargetFamily.W_G):
        before, _ = analysis_service.fidelity_local_optimized(rho, family)
        after, _ = analysis_service.fidelity_local_optimized(rotated, family)
        assert abs(before - after) < 1e-5, f"{family.value}: {before} vs {after}"


def test_fidelity_pure_is_linear_in_mixtures(ghz3, w_prime3):
    ghz = state_service.to_density(ghz3).matrix
    w = state_service.to_density(w_prime3).matrix
    flat = state_service.maximally_mixed(3).matrix
    for p, q in ((0.3, 0.5), (0.0, 1.0), (0.8, 0.1)):
        mixture = DensityMatrix(3, p * ghz + q * w + (1.0 - p - q) * flat)
        for target in (ghz3, w_prime3):
            expected = sum(
                weight * analysis_service.fidelity_pure(DensityMatrix(3, part), target)
                for weight, part in ((p, ghz), (q, w), (1.0 - p - q, flat))
            )
            assert np.isclose(analysis_service.fidelity_pure(mixture, target), expected)


def test_statistic_registry(ghz3):
    rho = state_service.to_density(ghz3)
    assert np.isclose(analysis_service.evaluate_statistic("fidelity_ghz_canonical", rho), 1.0)
    assert np.isclose(analysis_service.evaluate_statistic("fidelity_w_canonical", rho), 0.75)
    assert np.isclose(analysis_service.evaluate_statistic("purity", rho), 1.0)

    analysis_service.register_statistic("hhh_population", lambda r: float(np.real(r.matrix[0, 0])))
    assert np.isclose(analysis_service.evaluate_statistic("hhh_population", rho), 0.5)
    with pytest.raises(InvalidArgumentError):
        analysis_service.register_statistic("purity", lambda r: 0.0)
    with pytest.raises(InvalidArgumentError):
        analysis_service.evaluate_statistic("no_such_statistic", rho)


def test_resampling_is_seeded(noisy_ghz2_counts):
    records = noisy_ghz2_counts(1e4)
    first = analysis_service.resample_records(records, np.random.default_rng([9, 0]))
    second = analysis_service.resample_records(records, np.random.default_rng([9, 0]))
    assert [r.raw_counts for r in first] == [r.raw_counts for r in second]
    assert [str(r.setting) for r in first] == [str(r.setting) for r in records]


def test_monte_carlo_is_reproducible(noisy_ghz2_counts):
    """Per-trial seeding makes the error bar independent of threading"""
    records = noisy_ghz2_counts(1e4)
    serial = analysis_service.monte_carlo_uncertainty(
        records, "fidelity_ghz_canonical", n_trials=10, rng_seed=4, threads=1, keep_trials=True
    )
    threaded = analysis_service.monte_carlo_uncertainty(
        records, "fidelity_ghz_canonical", n_trials=10, rng_seed=4, threads=3, keep_trials=True
    )
    assert isinstance(serial, UncertaintyReport)
    assert np.allclose(serial.trial_values, threaded.trial_values)
    assert np.isclose(serial.std_dev, threaded.std_dev)
    assert serial.n_trials + serial.n_failed == 10
    assert abs(serial.point_estimate - 0.775) < 0.02


def test_monte_carlo_error_scales_with_shots(noisy_ghz3_counts):
    """Error bar of the GHZ fidelity shrinks with shots for a full-rank three-qubit state"""
    low = analysis_service.monte_carlo_uncertainty(
        noisy_ghz3_counts(1e3), "fidelity_ghz_canonical", n_trials=100, rng_seed=1
    )
    high = analysis_service.monte_carlo_uncertainty(
        noisy_ghz3_counts(1e5), "fidelity_ghz_canonical", n_trials=100, rng_seed=1
    )
    ratio = low.std_dev / high.std_dev
    logger.info(f"Monte Carlo std ratio 1e3/1e5 shots: {ratio:.2f}")
    assert 3.0 < ratio < 30.0


def test_monte_carlo_error_is_stable_in_trial_count(noisy_ghz2_counts):
    """Doubling the trials moves the error bar by less than a quarter"""
    records = noisy_ghz2_counts(1e4)
    hundred = analysis_service.monte_carlo_uncertainty(records, "fidelity_ghz_canonical", n_trials=100, rng_seed=5)
    doubled = analysis_service.monte_carlo_uncertainty(records, "fidelity_ghz_canonical", n_trials=200, rng_seed=5)
    assert abs(doubled.std_dev / hundred.std_dev - 1.0) < 0.25



def test_monte_carlo_argument_checks(noisy_ghz2_counts):
    records = noisy_ghz2_counts(1e3)
    with pytest.raises(InvalidArgumentError):
        analysis_service.monte_carlo_uncertainty(records, "fidelity_ghz_canonical", n_trials=1)
    with pytest.raises(InvalidArgumentError):
        analysis_service.monte_carlo_uncertainty(records, "unknown", n_trials=5)


def test_end_to_end_pipeline_fidelity():
    """GHZ_3 -> filter -> Poisson tomography -> MLE stays near 0.954 with W'"""
    filtered = povm_service.convert_ghz_to_w(3, 0.38).output_state
    w_prime = state_service.make_w_prime(3)
    for seed in range(10):
        records = tomography_service.simulate_counts(filtered, 1e5, noise="poisson", rng_seed=seed)
        result = tomography_service.reconstruct_mle(records, 3)
        fidelity = analysis_service.fidelity_pure(result.rho, w_prime)
        assert abs(fidelity - 0.954) < 0.02, f"seed {seed}: {fidelity}"


def test_conversion_report_and_table(ghz3):
    rho_out = povm_service.convert_ghz_to_w(3, 0.38).output_state
    report = analysis_service.conversion_report(
        state_service.to_density(ghz3), state_service.to_density(rho_out), starts=4, rng_seed=0
    )
    assert report.input["GHZ_G"].value >= 0.9999
    assert report.input["W_G"].value >= 0.75 - 1e-9
    assert report.output["W_G"].value >= 0.954
    assert report.output["GHZ_G"].std_dev is None

    table = analysis_service.render_table(report)
    assert "GHZ_G" in table and "W_G" in table
    assert "79.4%" in table and "68.4%" in table


def test_plot_data_export(tmp_path, w_prime3):
    rho = state_service.to_density(w_prime3)
    frame = analysis_service.plot_data_frame(rho, "DA")
    assert len(frame) == 64
    assert list(frame.columns) == ["row", "col", "magnitude", "real", "imag"]
    diagonal = frame[frame["row"] == frame["col"]].set_index("row")["magnitude"]
    assert np.isclose(diagonal["DAA"], 1.0 / 3.0)
    assert np.isclose(diagonal["DDD"], 0.0)

    path = tmp_path / "plot.csv"
    analysis_service.export_plot_data(rho, str(path), "HV")
    assert len(pd.read_csv(path)) == 64


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    sys.exit(pytest.main([__file__, "-v"]))

"""
Fidelity analysis of reconstructed states and Monte Carlo error bars.
"""
from concurrent.futures import ThreadPoolExecutor
from functools import reduce
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from app.core.config import get_settings
from app.core.errors import (
    ConvergenceError,
    DegenerateDataError,
    InvalidArgumentError,
)
from app.models.analysis import (
    ConversionReport,
    FidelityEntry,
    LocalRotationParams,
    TargetFamily,
    UncertaintyReport,
)
from app.models.state import DensityMatrix, PureState
from app.models.tomography import CountRecord
from app.services import state_service, tomography_service
from app.utils.performance_logger import analysis_perf_logger

logger = logging.getLogger(__name__)

FIDELITY_TOLERANCE = 1e-10

# Measured three-photon fidelities (value, uncertainty) before and after the
# filters. They depend on an unpublished input state and are shown for
# comparison only.
LAB_REFERENCE_FIDELITIES = {
    "input": {"GHZ_G": (0.794, 0.016), "W_G": (0.605, 0.019)},
    "output": {"GHZ_G": (0.598, 0.025), "W_G": (0.684, 0.024)},
}


# ---------------------------------------------------------------------------
# Fidelities
# ---------------------------------------------------------------------------

def fidelity_pure(rho: Union[DensityMatrix, PureState], target: PureState) -> float:
    """<psi|rho|psi>, clamped to [0, 1]"""
    rho = state_service.to_density(rho)
    if rho.n_qubits != target.n_qubits:
        raise InvalidArgumentError(
            f"state has {rho.n_qubits} qubits but the target has {target.n_qubits}"
        )
    psi = target.amplitudes
    value = float(np.real(np.vdot(psi, rho.matrix @ psi)))
    return min(max(value, 0.0), 1.0)


def canonical_target(family: Union[TargetFamily, str], n: int) -> PureState:
    family = TargetFamily(family)
    if family is TargetFamily.GHZ_G:
        return state_service.make_ghz(n, "+")
    return state_service.make_w_hv(n)


def product_unitary(params: LocalRotationParams) -> np.ndarray:
    """U_1 x ... x U_n from per-qubit ZYZ angles"""
    return reduce(np.kron, [state_service.euler_zyz(*triple).matrix for triple in params.angles])


def _family_starts(family: TargetFamily, n: int) -> List[np.ndarray]:
    starts = [LocalRotationParams.identity(n).as_vector()]
    if family is TargetFamily.W_G:
        # Hadamard on every qubit turns the H/V form of W into W'
        had_angles = state_service.zyz_angles(state_service.hadamard())
        starts.append(np.tile(had_angles, n))
    return starts


def fidelity_local_optimized(
    rho: Union[DensityMatrix, PureState],
    target_family: Union[TargetFamily, str],
    starts: Optional[int] = None,
    max_iterations: Optional[int] = None,
    tolerance: Optional[float] = None,
    rng_seed: int = 0,
    threads: Optional[int] = None,
) -> Tuple[float, LocalRotationParams]:
    """
    Best fidelity with any state U_1 x ... x U_n |target>, found by multi-start
    BFGS over ZYZ angles. Best found over the starts, not a global guarantee.

    Args:
        rho: state to analyse
        target_family: GHZ_G or W_G
        starts: number of random starts in addition to the canonical ones
        max_iterations: BFGS iteration cap per start
        tolerance: gradient tolerance per start
        rng_seed: seed for the random starting angles
        threads: worker threads for the starts

    Returns:
        (fidelity, argmax angles)
    """
    settings = get_settings()
    starts = settings.local_opt_starts if starts is None else starts
    max_iterations = max_iterations or settings.local_opt_max_iterations
    tolerance = tolerance or settings.local_opt_tolerance
    threads = threads or settings.worker_threads

    rho = state_service.to_density(rho)
    family = TargetFamily(target_family)
    n = rho.n_qubits
    if n < 2:
        raise InvalidArgumentError("local-unitary fidelity needs at least 2 qubits")
    target = canonical_target(family, n).amplitudes
    matrix = rho.matrix

    def negative_fidelity(vector: np.ndarray) -> float:
        psi = product_unitary(LocalRotationParams.from_vector(vector)) @ target
        return -float(np.real(np.vdot(psi, matrix @ psi)))

    rng = np.random.default_rng(rng_seed)
    initial = _family_starts(family, n)
    for _ in range(starts):
        triples = np.column_stack([
            rng.uniform(0.0, 2.0 * np.pi, n),
            rng.uniform(0.0, np.pi, n),
            rng.uniform(0.0, 2.0 * np.pi, n),
        ])
        initial.append(triples.reshape(-1))

    def _run(x0: np.ndarray):
        try:
            result = minimize(
                negative_fidelity, x0, method="BFGS",
                options={"maxiter": max_iterations, "gtol": tolerance},
            )
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.debug(f"Local-unitary start failed: {e}")
            return None
        if not np.isfinite(result.fun):
            return None
        return result

    with analysis_perf_logger.track("fidelity_local_optimized", {"family": family.value, "starts": len(initial)}):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_run, initial))
        else:
            results = [_run(x0) for x0 in initial]

    candidates = [(i, r) for i, r in enumerate(results) if r is not None]
    if not candidates:
        raise ConvergenceError(
            "local-unitary optimization failed on every start",
            {"family": family.value, "starts": len(initial)},
        )

    # Lowest objective wins; ties go to the earliest start
    best_index, best = min(candidates, key=lambda item: (item[1].fun, item[0]))
    value, params = -float(best.fun), LocalRotationParams.from_vector(best.x)

    # Never report less than the canonical start
    canonical = -negative_fidelity(initial[0])
    if canonical > value:
        value, params = canonical, LocalRotationParams.identity(n)

    logger.info(f"Local-unitary {family.value} fidelity {value:.6f} (best of {len(candidates)} starts)")
    return min(max(value, 0.0), 1.0), params


# ---------------------------------------------------------------------------
# Statistic registry
# ---------------------------------------------------------------------------

StatisticFn = Callable[[DensityMatrix, Optional[int]], float]


def _fidelity_ghz_canonical(rho: DensityMatrix, starts: Optional[int] = None) -> float:
    return fidelity_pure(rho, state_service.make_ghz(rho.n_qubits, "+"))


def _fidelity_w_canonical(rho: DensityMatrix, starts: Optional[int] = None) -> float:
    # W'_N is the state the conversion aims at
    return fidelity_pure(rho, state_service.make_w_prime(rho.n_qubits))


def _fidelity_ghz_local_opt(rho: DensityMatrix, starts: Optional[int] = None) -> float:
    return fidelity_local_optimized(rho, TargetFamily.GHZ_G, starts=starts)[0]


def _fidelity_w_local_opt(rho: DensityMatrix, starts: Optional[int] = None) -> float:
    return fidelity_local_optimized(rho, TargetFamily.W_G, starts=starts)[0]


def _purity(rho: DensityMatrix, starts: Optional[int] = None) -> float:
    return rho.purity


STATISTICS: Dict[str, StatisticFn] = {
    "fidelity_ghz_canonical": _fidelity_ghz_canonical,
    "fidelity_w_canonical": _fidelity_w_canonical,
    "fidelity_ghz_local_opt": _fidelity_ghz_local_opt,
    "fidelity_w_local_opt": _fidelity_w_local_opt,
    "purity": _purity,
}


def register_statistic(name: str, fn: Callable[[DensityMatrix], float]) -> None:
    """Add a named statistic computed from a density matrix"""
    if not name or name in STATISTICS:
        raise InvalidArgumentError(f"statistic name {name!r} is empty or already registered")
    STATISTICS[name] = lambda rho, starts=None: fn(rho)


def evaluate_statistic(name: str, rho: DensityMatrix, starts: Optional[int] = None) -> float:
    try:
        fn = STATISTICS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown statistic {name!r}; known: {sorted(STATISTICS)}")
    return float(fn(rho, starts))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def _records_n_qubits(records: Sequence[CountRecord]) -> int:
    if not records:
        raise InvalidArgumentError("no count records supplied")
    sizes = {r.setting.n_qubits for r in records}
    if len(sizes) != 1:
        raise InvalidArgumentError(f"records mix qubit counts {sorted(sizes)}")
    return sizes.pop()


def resample_records(records: Sequence[CountRecord], rng: np.random.Generator) -> List[CountRecord]:
    """Poisson redraw of every raw count around its observed value"""
    raw = np.array([r.raw_counts for r in records], dtype=float)
    draws = rng.poisson(raw)
    return [
        CountRecord(r.setting, int(c), r.background, r.drift_normalizer)
        for r, c in zip(records, draws)
    ]


def monte_carlo_uncertainty(
    records: Sequence[CountRecord],
    statistic: str,
    n_trials: Optional[int] = None,
    rng_seed: Optional[int] = None,
    threads: Optional[int] = None,
    keep_trials: bool = False,
    local_opt_starts: Optional[int] = None,
    max_iterations: Optional[int] = None,
) -> UncertaintyReport:
    """
    Error bar of a statistic of the reconstructed state, from Poisson
    resampling of the raw counts and re-running the reconstruction.

    Trial k draws from a generator seeded with (rng_seed, k), so results do
    not depend on the execution order. Non-converged trials are dropped.

    Raises:
        ConvergenceError: more than half of the trials failed
    """
    settings = get_settings()
    n_trials = n_trials if n_trials is not None else settings.monte_carlo_trials
    threads = threads or settings.worker_threads
    if n_trials < 2:
        raise InvalidArgumentError("n_trials must be ≥ 2")
    if statistic not in STATISTICS:
        raise InvalidArgumentError(f"unknown statistic {statistic!r}; known: {sorted(STATISTICS)}")
    if rng_seed is None:
        rng_seed = int(np.random.SeedSequence().entropy % (2 ** 63))
        logger.info(f"Monte Carlo seed derived from entropy: {rng_seed}")

    n = _records_n_qubits(records)
    baseline = tomography_service.reconstruct_mle(records, n, max_iterations=max_iterations)
    point_estimate = evaluate_statistic(statistic, baseline.rho, local_opt_starts)

    def _trial(index: int) -> Optional[float]:
        rng = np.random.default_rng([rng_seed, index])
        try:
            result = tomography_service.reconstruct_mle(
                resample_records(records, rng), n, max_iterations=max_iterations
            )
        except DegenerateDataError as e:
            logger.warning(f"Monte Carlo trial {index} has no usable counts: {e}")
            return None
        if not result.converged:
            logger.warning(f"Monte Carlo trial {index} did not converge; excluded")
            return None
        return evaluate_statistic(statistic, result.rho, local_opt_starts)

    with analysis_perf_logger.track("monte_carlo_uncertainty", {"statistic": statistic, "n_trials": n_trials}) as perf:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                values = list(pool.map(_trial, range(n_trials)))
        else:
            values = [_trial(index) for index in range(n_trials)]
        perf["failed"] = sum(v is None for v in values)

    kept = [v for v in values if v is not None]
    n_failed = n_trials - len(kept)
    if n_failed * 2 > n_trials or len(kept) < 2:
        raise ConvergenceError(
            f"{n_failed} of {n_trials} Monte Carlo trials failed",
            {"statistic": statistic, "failed": n_failed},
        )

    samples = np.array(kept)
    report = UncertaintyReport(
        statistic=statistic,
        point_estimate=point_estimate,
        std_dev=float(np.std(samples, ddof=1)),
        n_trials=len(kept),
        n_failed=n_failed,
        mean=float(np.mean(samples)),
        trial_values=[float(v) for v in kept] if keep_trials else None,
    )
    logger.info(
        f"{statistic}: {report.point_estimate:.4f} +- {report.std_dev:.4f} "
        f"({report.n_trials} trials, {n_failed} excluded)"
    )
    return report


# ---------------------------------------------------------------------------
# Reports and plot data
# ---------------------------------------------------------------------------

def conversion_report(
    rho_in: DensityMatrix,
    rho_out: DensityMatrix,
    records_in: Optional[Sequence[CountRecord]] = None,
    records_out: Optional[Sequence[CountRecord]] = None,
    n_trials: Optional[int] = None,
    rng_seed: Optional[int] = None,
    starts: Optional[int] = None,
    threads: Optional[int] = None,
) -> ConversionReport:
    """
    GHZ_G and W_G fidelities of the input and output states, with Monte
    Carlo uncertainties for the sides whose count records are supplied.
    """
    rho_in = state_service.to_density(rho_in)
    rho_out = state_service.to_density(rho_out)
    if rho_in.n_qubits != rho_out.n_qubits:
        raise InvalidArgumentError("input and output states have different qubit counts")

    statistics = {"GHZ_G": "fidelity_ghz_local_opt", "W_G": "fidelity_w_local_opt"}

    def _column(rho: DensityMatrix, records, seed_offset: int) -> Dict[str, FidelityEntry]:
        column = {}
        for family, statistic in statistics.items():
            value = evaluate_statistic(statistic, rho, starts)
            std_dev = None
            if records is not None:
                seed = None if rng_seed is None else rng_seed + seed_offset
                std_dev = monte_carlo_uncertainty(
                    records, statistic, n_trials=n_trials, rng_seed=seed,
                    threads=threads, local_opt_starts=starts,
                ).std_dev
            column[family] = FidelityEntry(value=value, std_dev=std_dev)
        return column

    return ConversionReport(
        input=_column(rho_in, records_in, 0),
        output=_column(rho_out, records_out, 1),
        reference=LAB_REFERENCE_FIDELITIES,
    )


def render_table(report: ConversionReport) -> str:
    """Plain-text table of a conversion report"""

    def _cell(entry: FidelityEntry) -> str:
        if entry.std_dev is None:
            return f"{entry.value * 100:6.1f}%"
        return f"{entry.value * 100:6.1f}% +- {entry.std_dev * 100:.1f}%"

    def _reference(side: str, family: str) -> str:
        value, err = report.reference[side][family]
        return f"{value * 100:.1f}% +- {err * 100:.1f}%"

    lines = [
        f"{'family':<8}{'input':>22}{'output':>22}{'lab input':>20}{'lab output':>20}",
    ]
    for family in ("GHZ_G", "W_G"):
        lines.append(
            f"{family:<8}{_cell(report.input[family]):>22}{_cell(report.output[family]):>22}"
            f"{_reference('input', family):>20}{_reference('output', family):>20}"
        )
    return "\n".join(lines)


def plot_data_frame(rho: DensityMatrix, basis: str = "HV") -> pd.DataFrame:
    """Long-format matrix elements (magnitude, real, imaginary) labelled by basis strings"""
    matrix = rho.matrix if basis == "HV" else state_service.to_da_basis(rho)
    labels = state_service.basis_labels(rho.n_qubits, basis)
    rows, cols = np.meshgrid(np.arange(rho.dimension), np.arange(rho.dimension), indexing="ij")
    return pd.DataFrame({
        "row": [labels[i] for i in rows.ravel()],
        "col": [labels[j] for j in cols.ravel()],
        "magnitude": np.abs(matrix).ravel(),
        "real": np.real(matrix).ravel(),
        "imag": np.imag(matrix).ravel(),
    })


def export_plot_data(rho: DensityMatrix, path: str, basis: str = "HV") -> pd.DataFrame:
    frame = plot_data_frame(rho, basis)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} matrix elements ({basis} basis) to {path}")
    return frame

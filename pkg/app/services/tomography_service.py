"""
Polarization tomography: forward simulation of coincidence counts and
maximum-likelihood reconstruction of the density matrix.

The likelihood is Poissonian with one fitted global scale s:
    L(rho, s) = sum_i c_i ln(s p_i) - s p_i,   p_i = <s_i|rho|s_i>
Maximizing over s analytically leaves the profile
    sum_i c_i ln q_i - C ln(sum_i q_i)  with q_i = <s_i|T^dag T|s_i>,
which is invariant under rescaling T, so rho = T^dag T / tr(T^dag T)
with lower-triangular T is physical at every iterate.
"""
from functools import reduce
from itertools import product
import logging
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize

from app.core.config import get_settings
from app.core.errors import DegenerateDataError, InvalidArgumentError
from app.models.state import KETS, DensityMatrix, PureState
from app.models.tomography import (
    SETTING_LABELS,
    CountRecord,
    FrequencyTable,
    MeasurementSetting,
    ReconstructionResult,
)
from app.services.state_service import maximally_mixed, to_density
from app.utils.performance_logger import tomography_perf_logger

logger = logging.getLogger(__name__)

NOISE_MODELS = ("none", "poisson")
INITIALIZERS = ("linear", "mixed")

# Blend of I/d mixed into the initial estimate so its Cholesky factor exists
INITIAL_MIXING = 1e-3

# Relative log-likelihood change below which an L-BFGS-B line-search stall counts as converged
STALL_TOLERANCE = 1e-8


# ---------------------------------------------------------------------------
# Settings and Born probabilities
# ---------------------------------------------------------------------------

def enumerate_settings(n: int) -> List[MeasurementSetting]:
    """All 4^n settings, lexicographic in the order H, V, D, R"""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError("n must be ≥ 1")
    return [MeasurementSetting(labels) for labels in product(SETTING_LABELS, repeat=int(n))]


def setting_kets(settings: Sequence[MeasurementSetting]) -> np.ndarray:
    """Row i is the product ket of settings[i]"""
    return np.array([reduce(np.kron, [KETS[label] for label in s.labels]) for s in settings])


def _as_density(state: Union[PureState, DensityMatrix]) -> DensityMatrix:
    return to_density(state)


def setting_probabilities(rho: DensityMatrix, settings: Sequence[MeasurementSetting]) -> np.ndarray:
    """<s|rho|s> for every setting, clamped to [0, 1]"""
    for s in settings:
        if s.n_qubits != rho.n_qubits:
            raise InvalidArgumentError(
                f"setting {s} has {s.n_qubits} qubits but the state has {rho.n_qubits}"
            )
    kets = setting_kets(settings)
    probabilities = np.real(np.einsum("id,de,ie->i", kets.conj(), rho.matrix, kets))
    return np.clip(probabilities, 0.0, 1.0)


def projection_probability(rho: Union[PureState, DensityMatrix], setting: MeasurementSetting) -> float:
    """Born probability of the product projector |s><s|"""
    return float(setting_probabilities(_as_density(rho), [setting])[0])


# ---------------------------------------------------------------------------
# Forward simulation
# ---------------------------------------------------------------------------

def _per_setting(value, count: int, name: str) -> np.ndarray:
    array = np.broadcast_to(np.asarray(value, dtype=float), (count,)) if np.ndim(value) == 0 \
        else np.asarray(value, dtype=float)
    if array.shape != (count,):
        raise InvalidArgumentError(f"{name} must be a scalar or have one entry per setting ({count})")
    return array


def simulate_counts(
    rho: Union[PureState, DensityMatrix],
    shots_per_setting: float,
    noise: str = "poisson",
    background_rate: Union[float, Sequence[float]] = 0.0,
    drift_model: Optional[Sequence[float]] = None,
    rng_seed: Optional[int] = None,
    settings: Optional[Sequence[MeasurementSetting]] = None,
) -> List[CountRecord]:
    """
    Simulate coincidence counts for every tomography setting.

    Expected counts are drift * (shots * p + background). With noise='poisson'
    the raw counts are Poisson draws, otherwise the rounded expectation.
    Records carry the accidentals (scaled by drift) as background and the
    drift multiplier as normalizer, ready for ingest_counts.
    """
    rho = _as_density(rho)
    if not shots_per_setting > 0:
        raise InvalidArgumentError(f"shots_per_setting must be positive, got {shots_per_setting}")
    if noise not in NOISE_MODELS:
        raise InvalidArgumentError(f"noise must be one of {NOISE_MODELS}, got {noise!r}")

    settings = list(settings) if settings is not None else enumerate_settings(rho.n_qubits)
    probabilities = setting_probabilities(rho, settings)
    background = _per_setting(background_rate, len(settings), "background_rate")
    drift = _per_setting(1.0 if drift_model is None else drift_model, len(settings), "drift_model")
    if np.any(background < 0):
        raise InvalidArgumentError("background_rate must be nonnegative")
    if np.any(drift <= 0):
        raise InvalidArgumentError("drift multipliers must be positive")

    expected = drift * (shots_per_setting * probabilities + background)
    if noise == "poisson":
        rng = np.random.default_rng(rng_seed)
        raw = rng.poisson(expected)
    else:
        raw = np.rint(expected).astype(np.int64)

    logger.info(
        f"Simulated {len(settings)} settings ({noise} noise, {shots_per_setting:g} shots/setting, "
        f"peak {int(np.max(raw))} counts)"
    )
    return [
        CountRecord(setting=s, raw_counts=int(c), background=float(d * b), drift_normalizer=float(d))
        for s, c, b, d in zip(settings, raw, background, drift)
    ]


def shots_for_peak(rho: Union[PureState, DensityMatrix], peak_counts: float,
                   settings: Optional[Sequence[MeasurementSetting]] = None) -> float:
    """Shots per setting such that the most probable setting expects `peak_counts`"""
    rho = _as_density(rho)
    settings = list(settings) if settings is not None else enumerate_settings(rho.n_qubits)
    p_max = float(np.max(setting_probabilities(rho, settings)))
    if p_max <= 0.0:
        raise DegenerateDataError("all setting probabilities vanish")
    return peak_counts / p_max


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

def ingest_counts(records: Sequence[CountRecord]) -> FrequencyTable:
    """
    Background-subtract, clamp at zero and drift-normalize every record.

    Raises:
        InvalidArgumentError: empty input or a setting appears twice
        DegenerateDataError: every corrected count is zero
    """
    if not records:
        raise InvalidArgumentError("no count records supplied")
    seen = set()
    for record in records:
        key = str(record.setting)
        if key in seen:
            raise InvalidArgumentError(f"duplicate setting {key}")
        seen.add(key)

    clamped = [r for r in records if r.raw_counts < r.background]
    if clamped:
        logger.warning(f"{len(clamped)} setting(s) had counts below background; clamped to zero")

    corrected = np.array([r.corrected for r in records], dtype=float)
    if not np.any(corrected > 0):
        raise DegenerateDataError("all corrected counts are zero")
    return FrequencyTable(settings=[r.setting for r in records], corrected_counts=corrected)


# ---------------------------------------------------------------------------
# Linear inversion and physical projection
# ---------------------------------------------------------------------------

def _design_matrix(kets: np.ndarray) -> np.ndarray:
    """Row i maps row-major vec(X) to tr(|s_i><s_i| X)"""
    # tr(P X) = sum_jk conj(s_j) X_jk s_k
    return np.einsum("ij,ik->ijk", kets.conj(), kets).reshape(kets.shape[0], -1)


def _check_complete(settings: Sequence[MeasurementSetting], n: int) -> np.ndarray:
    for s in settings:
        if s.n_qubits != n:
            raise InvalidArgumentError(f"setting {s} does not match n_qubits={n}")
    kets = setting_kets(settings)
    dim = 2 ** n
    if len(settings) < dim * dim or np.linalg.matrix_rank(_design_matrix(kets)) < dim * dim:
        raise InvalidArgumentError(
            f"settings are not tomographically complete for {n} qubits "
            f"({len(settings)} settings supplied, {dim * dim} independent ones needed)"
        )
    return kets


def project_to_physical(matrix: np.ndarray) -> DensityMatrix:
    """Hermitize, clip negative eigenvalues and renormalize; I/d if nothing survives"""
    matrix = np.asarray(matrix, dtype=complex)
    n = int(round(np.log2(matrix.shape[0])))
    hermitian = 0.5 * (matrix + matrix.conj().T)
    values, vectors = np.linalg.eigh(hermitian)
    values = np.clip(values, 0.0, None)
    if values.sum() <= 0.0:
        logger.warning("Physical projection left no positive weight; using the maximally mixed state")
        return maximally_mixed(n)
    projected = (vectors * (values / values.sum())) @ vectors.conj().T
    return DensityMatrix(n, 0.5 * (projected + projected.conj().T))


def linear_inversion(records: Sequence[CountRecord], n: int) -> Optional[np.ndarray]:
    """
    Least-squares inversion of the corrected counts, normalized to unit trace.

    Returns:
        The (possibly unphysical) Hermitian estimate, or None when the
        inversion is singular.
    """
    table = ingest_counts(records)
    kets = setting_kets(table.settings)
    design = _design_matrix(kets)
    dim = 2 ** n
    solution, _, rank, _ = np.linalg.lstsq(design, table.corrected_counts.astype(complex), rcond=None)
    if rank < dim * dim:
        return None
    estimate = solution.reshape(dim, dim)
    estimate = 0.5 * (estimate + estimate.conj().T)
    trace = float(np.real(np.trace(estimate)))
    if trace <= 0.0:
        return None
    return estimate / trace


# ---------------------------------------------------------------------------
# Maximum likelihood
# ---------------------------------------------------------------------------

class _CholeskyLikelihood:
    """Profile Poisson log-likelihood over the lower-triangular parameters of T"""

    def __init__(self, kets: np.ndarray, counts: np.ndarray):
        self.kets = kets
        self.dim = kets.shape[1]
        self.total = float(np.sum(counts))
        self.weights = counts / self.total
        self.observed = self.weights > 0
        self.lower = np.tril_indices(self.dim, -1)
        self.n_lower = self.lower[0].size

    def unpack(self, params: np.ndarray) -> np.ndarray:
        t = np.zeros((self.dim, self.dim), dtype=complex)
        t[np.diag_indices(self.dim)] = params[:self.dim]
        t[self.lower] = params[self.dim:self.dim + self.n_lower] + 1j * params[self.dim + self.n_lower:]
        return t

    def pack(self, t: np.ndarray) -> np.ndarray:
        lower = t[self.lower]
        return np.concatenate([np.real(np.diag(t)), np.real(lower), np.imag(lower)])

    def rho(self, params: np.ndarray) -> np.ndarray:
        t = self.unpack(params)
        a = t.conj().T @ t
        a = 0.5 * (a + a.conj().T)
        return a / np.real(np.trace(a))

    def _q(self, a: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("id,de,ie->i", self.kets.conj(), a, self.kets))

    def objective(self, params: np.ndarray):
        """Negative per-count profile likelihood and its gradient"""
        t = self.unpack(params)
        a = t.conj().T @ t
        q = np.maximum(self._q(a), 1e-300)
        q_total = float(np.sum(q))
        value = float(np.sum(self.weights[self.observed] * np.log(q[self.observed]))) - np.log(q_total)

        coefficients = np.where(self.observed, self.weights / q, 0.0) - 1.0 / q_total
        g = (self.kets.T * coefficients) @ self.kets.conj()
        gamma = 2.0 * t @ g
        gradient = np.concatenate([
            np.real(np.diag(gamma)),
            np.real(gamma[self.lower]),
            np.imag(gamma[self.lower]),
        ])
        return -value, -gradient

    def log_likelihood(self, params: np.ndarray) -> float:
        """Full Poisson log-likelihood (without the ln c! constant) at the fitted scale"""
        value, _ = self.objective(params)
        return self.total * (-value) + self.total * np.log(self.total) - self.total

    def scale(self, params: np.ndarray) -> float:
        p = np.clip(self._q(self.rho(params)), 0.0, None)
        return self.total / float(np.sum(p))


def _initial_density(records, n, initializer) -> DensityMatrix:
    if isinstance(initializer, DensityMatrix):
        if initializer.n_qubits != n:
            raise InvalidArgumentError("initializer has the wrong number of qubits")
        return initializer
    if initializer not in INITIALIZERS:
        raise InvalidArgumentError(f"initializer must be one of {INITIALIZERS} or a DensityMatrix")
    if initializer == "linear":
        estimate = linear_inversion(records, n)
        if estimate is not None:
            return project_to_physical(estimate)
        logger.warning("Linear inversion is singular; starting from the maximally mixed state")
    return maximally_mixed(n)


def _lower_cholesky(rho: np.ndarray) -> np.ndarray:
    """Lower-triangular T with rho = T^dag T"""
    flipped = np.linalg.cholesky(rho[::-1, ::-1])
    return flipped[::-1, ::-1].conj().T


def reconstruct_mle(
    records: Sequence[CountRecord],
    n: int,
    max_iterations: Optional[int] = None,
    tolerance: Optional[float] = None,
    gradient_tolerance: Optional[float] = None,
    initializer: Union[str, DensityMatrix] = "linear",
) -> ReconstructionResult:
    """
    Most-likely physical density matrix for the given count records.

    Args:
        records: one CountRecord per setting, tomographically complete
        n: number of qubits
        max_iterations: optimizer iteration cap (settings default 5000)
        tolerance: relative log-likelihood change that stops the ascent
        gradient_tolerance: gradient magnitude that stops the ascent
        initializer: 'linear', 'mixed' or an explicit starting DensityMatrix

    Returns:
        ReconstructionResult; converged=False is reported, not raised
    """
    settings = get_settings()
    max_iterations = max_iterations or settings.mle_max_iterations
    tolerance = tolerance or settings.mle_tolerance
    gradient_tolerance = gradient_tolerance or settings.mle_gradient_tolerance

    table = ingest_counts(records)
    kets = _check_complete(table.settings, n)
    likelihood = _CholeskyLikelihood(kets, table.corrected_counts)

    start = _initial_density(records, n, initializer)
    dim = 2 ** n
    blended = (1.0 - INITIAL_MIXING) * start.matrix + INITIAL_MIXING * np.eye(dim) / dim
    x0 = likelihood.pack(_lower_cholesky(blended))

    history = [likelihood.log_likelihood(x0)]

    def _record_step(xk):
        history.append(likelihood.log_likelihood(xk))

    with tomography_perf_logger.track("reconstruct_mle", {"n_qubits": n, "settings": len(records)}) as perf:
        result = minimize(
            likelihood.objective,
            x0,
            jac=True,
            method="L-BFGS-B",
            callback=_record_step,
            options={
                "maxiter": max_iterations,
                "maxfun": max(15000, 20 * max_iterations),
                "ftol": tolerance,
                "gtol": gradient_tolerance,
            },
        )
        perf.update({"iterations": int(result.nit), "status": int(result.status)})

    _, gradient = likelihood.objective(result.x)
    residual = float(np.linalg.norm(gradient))

    drops = np.diff(history)
    if np.any(drops < -1e-9 * max(1.0, abs(history[-1]))):
        logger.warning("Log-likelihood decreased on an accepted step")

    last_change = abs(drops[-1]) / max(1.0, abs(history[-1])) if drops.size else 0.0
    converged = bool(
        result.success
        or np.max(np.abs(gradient)) <= gradient_tolerance
        # line search stalls at machine precision right at the optimum
        or (result.status == 2 and result.nit < max_iterations and last_change <= STALL_TOLERANCE)
    )
    if not converged:
        logger.warning(f"MLE did not converge after {result.nit} iterations: {result.message}")
    else:
        logger.info(f"MLE converged in {result.nit} iterations (log-likelihood {history[-1]:.6f})")

    return ReconstructionResult(
        rho=DensityMatrix(n, likelihood.rho(result.x)),
        log_likelihood=float(likelihood.log_likelihood(result.x)),
        iterations=int(result.nit),
        converged=converged,
        residual=residual,
        scale=float(likelihood.scale(result.x)),
        history=[float(v) for v in history],
    )

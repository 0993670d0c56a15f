"""
Routes for tomography simulation and reconstruction
"""
from fastapi import APIRouter, HTTPException
import logging
from typing import List

from app.core.errors import QuantumToolkitError, http_status_for
from app.schemas.tomography import (
    CountRecordData,
    ReconstructionResponse,
    ReconstructRequest,
    SimulateRequest,
)
from app.services import tomography_service
from app.utils.performance_logger import api_perf_logger
from app.utils.serialization import (
    reconstruction_to_dict,
    records_from_dicts,
    records_to_dicts,
    state_from_dict,
)

# Set up logging
logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/tomography",
    tags=["tomography"],
    responses={400: {"description": "Invalid argument"}, 422: {"description": "Did not converge"}},
)


@router.post("/simulate", response_model=List[CountRecordData])
async def simulate(request: SimulateRequest):
    """
    Simulated coincidence counts for every setting
    """
    try:
        state = state_from_dict(request.state.model_dump())
        records = tomography_service.simulate_counts(
            state,
            shots_per_setting=request.shots,
            noise=request.noise,
            background_rate=request.background_rate,
            rng_seed=request.seed,
        )
        return records_to_dicts(records)
    except QuantumToolkitError as e:
        logger.error(f"Error simulating counts: {e.message}")
        raise HTTPException(status_code=http_status_for(e), detail=e.message)


@router.post("/reconstruct", response_model=ReconstructionResponse)
async def reconstruct(request: ReconstructRequest):
    """
    Maximum-likelihood density matrix for a complete count table
    """
    try:
        records = records_from_dicts([r.model_dump() for r in request.records])
        with api_perf_logger.track("reconstruct", {"n_qubits": request.n_qubits}) as perf:
            result = tomography_service.reconstruct_mle(
                records,
                request.n_qubits,
                max_iterations=request.max_iterations,
                tolerance=request.tolerance,
            )
            perf["converged"] = result.converged
    except QuantumToolkitError as e:
        logger.error(f"Error reconstructing state: {e.message}")
        raise HTTPException(status_code=http_status_for(e), detail=e.message)

    if not result.converged:
        logger.warning(f"Reconstruction stopped without converging after {result.iterations} iterations")
    return reconstruction_to_dict(result)

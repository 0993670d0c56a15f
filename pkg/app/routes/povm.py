"""
Routes for the local filtering operation
"""
from fastapi import APIRouter, HTTPException, Query
import logging

from app.core.errors import QuantumToolkitError, http_status_for
from app.schemas.povm import AnalyticResponse, FilterOutcomeResponse, FilterRequest
from app.services import povm_service
from app.utils.serialization import filter_outcome_to_dict, state_from_dict

# Set up logging
logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/povm",
    tags=["povm"],
    responses={400: {"description": "Invalid argument"}},
)


@router.post("/filter", response_model=FilterOutcomeResponse)
async def apply_filter(request: FilterRequest):
    """
    Apply the filter on every qubit and post-select the keep branch
    """
    try:
        state = state_from_dict(request.state.model_dump())
        outcome = povm_service.apply_filter_all(state, request.a_squared, request.basis)
        return filter_outcome_to_dict(outcome)
    except QuantumToolkitError as e:
        logger.error(f"Error applying filter: {e.message}")
        raise HTTPException(status_code=http_status_for(e), detail=e.message)


@router.get("/analytic", response_model=AnalyticResponse)
async def analytic(
    n: int = Query(3, description="number of qubits"),
    a_squared: float = Query(..., gt=0.0, le=1.0),
):
    """
    Closed-form fidelities and success probability of the GHZ -> W conversion
    """
    try:
        return AnalyticResponse(
            n_qubits=n,
            a_squared=a_squared,
            fidelity_w=povm_service.fidelity_wN_analytic(n, a_squared),
            fidelity_ghz=povm_service.fidelity_ghz_analytic(n, a_squared),
            fidelity_ghz3=povm_service.fidelity_ghz3_analytic(a_squared) if n == 3 else None,
            success_probability=povm_service.success_probability_analytic(n, a_squared),
        )
    except QuantumToolkitError as e:
        logger.error(f"Error computing analytic figures: {e.message}")
        raise HTTPException(status_code=http_status_for(e), detail=e.message)

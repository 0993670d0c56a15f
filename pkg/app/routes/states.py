"""
Routes for canonical states
"""
from fastapi import APIRouter, HTTPException, Query
import logging
from typing import Literal

from app.core.errors import QuantumToolkitError, http_status_for
from app.schemas.state import StateData
from app.services import state_service
from app.utils.serialization import state_to_dict

# Set up logging
logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/states",
    tags=["states"],
    responses={400: {"description": "Invalid argument"}},
)

_BUILDERS = {
    "ghz": state_service.make_ghz,
    "w": lambda n, sign: state_service.make_w_hv(n),
    "wprime": lambda n, sign: state_service.make_w_prime(n),
}


@router.get("/{kind}", response_model=StateData)
async def get_state(
    kind: Literal["ghz", "w", "wprime"],
    n: int = Query(3, description="number of qubits"),
    sign: Literal["+", "-"] = "+",
):
    """
    Canonical GHZ, W (H/V form) or W' (D/A form) state
    """
    try:
        return state_to_dict(_BUILDERS[kind](n, sign))
    except QuantumToolkitError as e:
        logger.error(f"Error building {kind} state with n={n}: {e.message}")
        raise HTTPException(status_code=http_status_for(e), detail=e.message)

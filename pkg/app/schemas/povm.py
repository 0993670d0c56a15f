from pydantic import BaseModel, Field
from typing import List, Literal, Optional
import logging

from app.schemas.state import StateData

# Set up logging
logger = logging.getLogger(__name__)


class FilterRequest(BaseModel):
    """Schema for applying the local filter to a state"""
    state: StateData
    a_squared: float = Field(..., gt=0.0, le=1.0)
    basis: Literal["DA", "HV"] = "DA"


class FilterOutcomeResponse(BaseModel):
    """Schema for the post-selected filter output"""
    success_probability: float
    state: StateData
    a_squared: float
    basis: str
    per_qubit_outcome: List[str]


class AnalyticResponse(BaseModel):
    """Schema for the closed-form conversion figures"""
    n_qubits: int
    a_squared: float
    fidelity_w: float
    fidelity_ghz: float
    fidelity_ghz3: Optional[float] = None
    success_probability: float

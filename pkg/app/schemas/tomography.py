from pydantic import BaseModel, Field, field_validator
from typing import List, Literal, Optional
import logging

from app.schemas.state import StateData

# Set up logging
logger = logging.getLogger(__name__)


class CountRecordData(BaseModel):
    """Schema for one row of a count table"""
    setting: str = Field(..., min_length=1)
    raw_counts: int = Field(..., ge=0)
    background: float = Field(0.0, ge=0.0)
    drift_normalizer: float = Field(1.0, gt=0.0)

    @field_validator("setting")
    @classmethod
    def setting_must_use_projector_labels(cls, v):
        v = v.strip().upper()
        if any(ch not in "HVDR" for ch in v):
            logger.warning(f"Invalid setting label attempted: {v}")
            raise ValueError("setting must be a string over H, V, D, R")
        return v


class SimulateRequest(BaseModel):
    """Schema for simulating tomography counts"""
    state: StateData
    shots: float = Field(..., gt=0.0)
    noise: Literal["none", "poisson"] = "poisson"
    background_rate: float = Field(0.0, ge=0.0)
    seed: Optional[int] = Field(None, ge=0)


class ReconstructRequest(BaseModel):
    """Schema for a maximum-likelihood reconstruction"""
    records: List[CountRecordData]
    n_qubits: int = Field(..., ge=1, le=6)
    max_iterations: Optional[int] = Field(None, ge=1)
    tolerance: Optional[float] = Field(None, gt=0.0)


class ReconstructionResponse(BaseModel):
    """Schema for a reconstruction result"""
    rho: StateData
    log_likelihood: float
    iterations: int
    converged: bool
    residual: float
    scale: float

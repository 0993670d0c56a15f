from pydantic import BaseModel, Field, field_validator
from typing import List, Literal
import logging

# Set up logging
logger = logging.getLogger(__name__)


class StateData(BaseModel):
    """Schema for the shared state JSON format"""
    n_qubits: int = Field(..., ge=1, le=12)
    kind: Literal["pure", "density"]
    data: List[List[float]] = Field(..., description="[re, im] pairs; density matrices row-major")

    @field_validator("data")
    @classmethod
    def pairs_must_have_two_entries(cls, v):
        if any(len(pair) != 2 for pair in v):
            logger.warning("State data with malformed [re, im] pairs rejected")
            raise ValueError("every entry of data must be an [re, im] pair")
        return v

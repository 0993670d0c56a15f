"""
Validated parameter sets for the CLI subcommands.
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Literal, Optional
import logging

# Set up logging
logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    """Options shared by every subcommand"""
    seed: Optional[int] = Field(None, ge=0)
    threads: int = Field(1, ge=1, le=64)
    json_output: bool = False


class StateConfig(RunConfig):
    kind: Literal["ghz", "w", "wprime"]
    n: int
    sign: Literal["+", "-"] = "+"
    white_noise: float = Field(0.0, ge=0.0, le=1.0)
    out: Optional[str] = None

    @field_validator("n")
    @classmethod
    def n_at_least_two(cls, v):
        if v < 2:
            logger.warning(f"State requested with n={v}")
            raise ValueError("n must be ≥ 2")
        return v


class FilterConfig(RunConfig):
    input: str
    a_squared: float = Field(..., gt=0.0, le=1.0)
    basis: Literal["DA", "HV"] = "DA"
    out: Optional[str] = None


class TomoSimConfig(RunConfig):
    input: str
    shots: Optional[float] = Field(None, gt=0.0)
    peak: Optional[float] = Field(None, gt=0.0, description="scale shots so the largest setting expects this many counts")
    noise: Literal["none", "poisson"] = "poisson"
    background: float = Field(0.0, ge=0.0)
    out: Optional[str] = None

    @model_validator(mode="after")
    def shots_or_peak(self):
        if (self.shots is None) == (self.peak is None):
            raise ValueError("give exactly one of --shots or --peak")
        return self


class TomoReconstructConfig(RunConfig):
    counts: str
    n: Optional[int] = Field(None, ge=1, le=6)
    max_iterations: Optional[int] = Field(None, ge=1)
    tolerance: Optional[float] = Field(None, gt=0.0)
    initializer: Literal["linear", "mixed"] = "linear"
    out: Optional[str] = None


class AnalyzeConfig(RunConfig):
    input: str
    counts: Optional[str] = None
    montecarlo: Optional[int] = Field(None, ge=2)
    statistic: str = "fidelity_w_canonical"
    starts: Optional[int] = Field(None, ge=0)
    plot_data: Optional[str] = None
    basis: Literal["HV", "DA"] = "HV"
    out: Optional[str] = None

    @model_validator(mode="after")
    def montecarlo_needs_counts(self):
        if self.montecarlo is not None and self.counts is None:
            raise ValueError("--montecarlo needs --counts")
        return self


class PipelineConfig(RunConfig):
    n: int = 3
    a_squared: float = Field(0.38, gt=0.0, le=1.0)
    shots: float = Field(100000.0, gt=0.0)
    noise: Literal["none", "poisson"] = "poisson"
    background: float = Field(0.0, ge=0.0)
    white_noise: float = Field(0.0, ge=0.0, le=1.0)
    montecarlo: Optional[int] = Field(None, ge=2)
    starts: Optional[int] = Field(None, ge=0)
    out_dir: Optional[str] = None

    @field_validator("n")
    @classmethod
    def n_at_least_two(cls, v):
        if v < 2:
            raise ValueError("n must be ≥ 2")
        return v

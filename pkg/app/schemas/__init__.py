from app.schemas.state import StateData
from app.schemas.povm import FilterRequest, FilterOutcomeResponse, AnalyticResponse
from app.schemas.tomography import CountRecordData, SimulateRequest, ReconstructRequest, ReconstructionResponse
from app.schemas.run_config import (
    RunConfig, StateConfig, FilterConfig, TomoSimConfig, TomoReconstructConfig, AnalyzeConfig, PipelineConfig
)

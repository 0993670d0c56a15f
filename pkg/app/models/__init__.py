from app.models.state import PureState, DensityMatrix, LocalUnitary
from app.models.povm import FilterBasis, FilterStrength, KrausFilter, FilterOutcome, Outcome
from app.models.tomography import MeasurementSetting, CountRecord, FrequencyTable, ReconstructionResult
from app.models.analysis import TargetFamily, LocalRotationParams, UncertaintyReport, FidelityEntry, ConversionReport

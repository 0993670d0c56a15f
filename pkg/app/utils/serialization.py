"""
File formats shared by the CLI and the HTTP routes.

States:   {"n_qubits": int, "kind": "pure"|"density", "data": [[re, im], ...]}
          density matrices flattened row-major.
Counts:   CSV with header setting,raw_counts,background,drift_normalizer
          (or the same records as a JSON list).
"""
import json
import logging
import os
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from app.core.errors import DataFileError, InvalidArgumentError
from app.models.povm import FilterOutcome
from app.models.state import DensityMatrix, PureState
from app.models.tomography import CountRecord, MeasurementSetting, ReconstructionResult

logger = logging.getLogger(__name__)

COUNT_COLUMNS = ["setting", "raw_counts", "background", "drift_normalizer"]


def convert_numpy_to_python(obj):
    """Convert NumPy types to Python native types for JSON serialization."""
    if isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, np.ndarray):
        return convert_numpy_to_python(obj.tolist())
    elif isinstance(obj, dict):
        return {k: convert_numpy_to_python(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [convert_numpy_to_python(i) for i in obj]
    else:
        return obj


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def state_to_dict(state: Union[PureState, DensityMatrix]) -> Dict[str, Any]:
    if isinstance(state, PureState):
        values, kind = state.amplitudes, "pure"
    else:
        values, kind = state.matrix.reshape(-1), "density"
    return {
        "n_qubits": state.n_qubits,
        "kind": kind,
        "data": [[float(v.real), float(v.imag)] for v in values],
    }


def state_from_dict(payload: Dict[str, Any]) -> Union[PureState, DensityMatrix]:
    try:
        n = int(payload["n_qubits"])
        kind = payload["kind"]
        pairs = np.asarray(payload["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidArgumentError(f"malformed state JSON: {e}")
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise InvalidArgumentError("state data must be a list of [re, im] pairs")
    values = pairs[:, 0] + 1j * pairs[:, 1]
    if kind == "pure":
        return PureState(n, values)
    if kind == "density":
        dim = 2 ** n
        if values.size != dim * dim:
            raise InvalidArgumentError(f"density data needs {dim * dim} entries, got {values.size}")
        return DensityMatrix(n, values.reshape(dim, dim))
    raise InvalidArgumentError(f"state kind must be 'pure' or 'density', got {kind!r}")


def filter_outcome_to_dict(outcome: FilterOutcome) -> Dict[str, Any]:
    return {
        "success_probability": outcome.success_probability,
        "state": state_to_dict(outcome.output_state),
        "a_squared": outcome.strength.a_squared,
        "basis": outcome.basis.value,
        "per_qubit_outcome": [o.value for o in outcome.per_qubit_outcome],
    }


def reconstruction_to_dict(result: ReconstructionResult) -> Dict[str, Any]:
    return {
        "rho": state_to_dict(result.rho),
        "log_likelihood": result.log_likelihood,
        "iterations": result.iterations,
        "converged": result.converged,
        "residual": result.residual,
        "scale": result.scale,
    }


# ---------------------------------------------------------------------------
# Count tables
# ---------------------------------------------------------------------------

def records_to_frame(records: Sequence[CountRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [[str(r.setting), r.raw_counts, r.background, r.drift_normalizer] for r in records],
        columns=COUNT_COLUMNS,
    )


def records_from_frame(frame: pd.DataFrame) -> List[CountRecord]:
    missing = [c for c in ("setting", "raw_counts") if c not in frame.columns]
    if missing:
        raise InvalidArgumentError(f"count table is missing column(s) {missing}")
    frame = frame.copy()
    if "background" not in frame.columns:
        frame["background"] = 0.0
    if "drift_normalizer" not in frame.columns:
        frame["drift_normalizer"] = 1.0
    return [
        CountRecord(
            setting=MeasurementSetting.parse(row.setting),
            raw_counts=int(row.raw_counts),
            background=float(row.background),
            drift_normalizer=float(row.drift_normalizer),
        )
        for row in frame.itertuples(index=False)
    ]


def records_to_dicts(records: Sequence[CountRecord]) -> List[Dict[str, Any]]:
    return convert_numpy_to_python(records_to_frame(records).to_dict(orient="records"))


def records_from_dicts(rows: Sequence[Dict[str, Any]]) -> List[CountRecord]:
    return records_from_frame(pd.DataFrame(list(rows)))


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def write_json(payload: Any, path: str) -> None:
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w") as f:
            json.dump(convert_numpy_to_python(payload), f, indent=2)
    except OSError as e:
        raise DataFileError(f"could not write {path}: {e}")
    logger.info(f"Wrote {path}")


def read_json(path: str) -> Any:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except OSError as e:
        raise DataFileError(f"could not read {path}: {e}")
    except json.JSONDecodeError as e:
        raise DataFileError(f"{path} is not valid JSON: {e}")


def write_state(state: Union[PureState, DensityMatrix], path: str) -> None:
    write_json(state_to_dict(state), path)


def read_state(path: str) -> Union[PureState, DensityMatrix]:
    payload = read_json(path)
    # Filter and reconstruction outputs embed the state
    if isinstance(payload, dict) and "state" in payload:
        payload = payload["state"]
    elif isinstance(payload, dict) and "rho" in payload:
        payload = payload["rho"]
    return state_from_dict(payload)


def write_counts(records: Sequence[CountRecord], path: str) -> None:
    if path.lower().endswith(".json"):
        write_json(records_to_dicts(records), path)
        return
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        records_to_frame(records).to_csv(path, index=False)
    except OSError as e:
        raise DataFileError(f"could not write {path}: {e}")
    logger.info(f"Wrote {len(records)} count records to {path}")


def read_counts(path: str) -> List[CountRecord]:
    if path.lower().endswith(".json"):
        payload = read_json(path)
        if isinstance(payload, dict):
            payload = payload.get("records", [])
        return records_from_dicts(payload)
    try:
        frame = pd.read_csv(path, dtype={"setting": str})
    except FileNotFoundError as e:
        raise DataFileError(f"could not read {path}: {e}")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFileError(f"could not parse count table {path}: {e}")
    return records_from_frame(frame)

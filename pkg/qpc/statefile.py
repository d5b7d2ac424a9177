"""
Reading and writing state files and simulation configs.
Includes input validation and explicit error handling.

State file layout (JSON):
    {"d1": 2, "d2": 2, "matrix": [[[re, im], ...], ...]}
``matrix`` holds (d1*d2)^2 [re, im] pairs, either as rows or as one flat
row-major list.
"""

import json
import logging
from pathlib import Path
from typing import List, Union

import numpy as np

from .config import QPCError
from .dynamics import SimConfig, SimConfigError
from .linops import hermitian_eigendecomposition
from .states import DensityMatrix, InvalidStateError, PureState, purity

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SUPPORTED_SUFFIXES = [".json"]

# Purity a state file must reach to be used as a pure initial state
PURE_STATE_TOLERANCE = 1e-9


class StateFileError(QPCError):
    """Base exception for state and config file errors"""
    pass


class StateFileNotFoundError(StateFileError):
    """File not found, empty or of an unsupported type"""
    pass


class StateFileParseError(StateFileError):
    """File is not valid JSON or does not follow the expected layout"""
    pass


class StateFileValidationError(StateFileError):
    """File parses but violates a state or config invariant"""

    def __init__(self, invariant: str, message: str):
        self.invariant = invariant
        super().__init__(message)


def validate_input_file(input_file: PathLike) -> Path:
    """Validates that the input file exists, is non-empty and is JSON."""
    file_path = Path(input_file)

    if not file_path.exists():
        raise StateFileNotFoundError(f"File does not exist: {input_file}")

    if not file_path.is_file():
        raise StateFileNotFoundError(f"Path is not a file: {input_file}")

    if file_path.suffix.lower() not in SUPPORTED_SUFFIXES:
        raise StateFileNotFoundError(f"Only .json files are supported, received: {file_path.suffix or '(none)'}")

    if file_path.stat().st_size == 0:
        raise StateFileNotFoundError(f"File is empty: {input_file}")

    return file_path


def parse_json(raw_bytes: bytes, filename: str) -> dict:
    """Parses strict UTF-8 JSON; anything else is a parse error."""
    try:
        return json.loads(raw_bytes.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise StateFileParseError(f"File {filename} is not UTF-8: {e}")
    except json.JSONDecodeError as e:
        raise StateFileParseError(f"Error parsing JSON in {filename}: {e}")


def _read_json(input_file: PathLike) -> dict:
    file_path = validate_input_file(input_file)
    return parse_json(file_path.read_bytes(), file_path.name)


def _parse_pair(entry, position: int) -> complex:
    if not isinstance(entry, (list, tuple)) or len(entry) != 2:
        raise StateFileParseError(f"Matrix entry {position} must be a [re, im] pair, received: {entry!r}")
    re_part, im_part = entry
    for value in (re_part, im_part):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise StateFileParseError(f"Matrix entry {position} must hold numbers, received: {entry!r}")
    return complex(float(re_part), float(im_part))


def parse_matrix_entries(entries, size: int) -> np.ndarray:
    """Converts row-major [re, im] pairs (nested rows or flat) into a size x size array."""
    if not isinstance(entries, list):
        raise StateFileParseError("The 'matrix' key must be a list")

    nested = bool(entries) and all(
        isinstance(row, list) and bool(row) and isinstance(row[0], (list, tuple)) for row in entries
    )
    if nested:
        if len(entries) != size or any(len(row) != size for row in entries):
            raise StateFileParseError(f"Matrix rows must form a {size} x {size} grid")
        flat = [pair for row in entries for pair in row]
    else:
        flat = entries

    if len(flat) != size * size:
        raise StateFileParseError(f"Matrix must hold {size * size} entries for dimension {size}, received {len(flat)}")

    values = [_parse_pair(entry, i) for i, entry in enumerate(flat)]
    return np.array(values, dtype=np.complex128).reshape(size, size)


def validate_state_structure(data: dict) -> None:
    """Validates that the parsed JSON has the state file keys and types."""
    if not isinstance(data, dict):
        raise StateFileParseError("State file must contain a JSON object")

    required_keys = ["d1", "d2", "matrix"]
    missing_keys = [key for key in required_keys if key not in data]
    if missing_keys:
        raise StateFileParseError(f"State file does not contain required keys: {', '.join(missing_keys)}")

    for key in ("d1", "d2"):
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise StateFileParseError(f"'{key}' must be a positive integer, received: {value!r}")


def state_from_dict(data: dict) -> DensityMatrix:
    """Builds a validated DensityMatrix from parsed state-file JSON.

    Raises:
        StateFileParseError: If the layout is wrong
        StateFileValidationError: If the matrix violates a density-matrix invariant
    """
    validate_state_structure(data)
    d1, d2 = data["d1"], data["d2"]
    matrix = parse_matrix_entries(data["matrix"], d1 * d2)
    try:
        return DensityMatrix(d1, d2, matrix)
    except InvalidStateError as e:
        raise StateFileValidationError(e.invariant, f"Invalid density matrix ({e.invariant}): {e}")


def read_state_file(input_file: PathLike) -> DensityMatrix:
    """Reads and validates a state file.

    Args:
        input_file: Path to the .json state file

    Returns:
        DensityMatrix: The validated state

    Raises:
        StateFileNotFoundError: If the file does not exist or is not valid
        StateFileParseError: If the JSON or its layout is malformed
        StateFileValidationError: If the matrix is not a valid density matrix
    """
    rho = state_from_dict(_read_json(input_file))
    logger.debug(f"State loaded from {input_file}: {rho.d1} x {rho.d2}")
    return rho


def read_pure_state(input_file: PathLike) -> PureState:
    """Reads a state file holding a pure state and returns its dominant eigenvector."""
    rho = read_state_file(input_file)
    purity_error = abs(purity(rho) - 1.0)
    if purity_error > PURE_STATE_TOLERANCE:
        raise StateFileValidationError("pure", f"State in {input_file} is not pure: 1 - Tr rho^2 = {purity_error:.3e}")
    _, vectors = hermitian_eigendecomposition(rho.matrix)
    vector = vectors[:, 0]
    return PureState(rho.d1, rho.d2, vector / np.linalg.norm(vector))


def state_to_dict(rho: DensityMatrix) -> dict:
    rows: List[list] = [
        [[float(entry.real), float(entry.imag)] for entry in row]
        for row in rho.matrix
    ]
    return {"d1": rho.d1, "d2": rho.d2, "matrix": rows}


def write_state_file(output_file: PathLike, rho: DensityMatrix) -> Path:
    """Writes a state file (floats serialized with round-trip precision)."""
    path = Path(output_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(state_to_dict(rho), f, indent=1)
        f.write("\n")
    logger.info(f"State saved to: {path}")
    return path


def read_sim_config(input_file: PathLike) -> dict:
    """Reads a simulation config file and returns its raw mapping, checked against SimConfig."""
    data = _read_json(input_file)
    if not isinstance(data, dict):
        raise StateFileParseError("Simulation config must contain a JSON object")
    try:
        SimConfig.from_dict(data)
    except SimConfigError as e:
        raise StateFileValidationError("config", f"Invalid simulation config: {e}")
    except TypeError as e:
        raise StateFileParseError(f"Invalid simulation config: {e}")
    return data

"""
Shared JSON formats for matrices, matrix lists and report payloads.

A matrix document is ``{"dim": n, "entries": [[[re, im], ...], ...]}`` with
row-major [re, im] pairs of finite doubles. Values are re-validated on load.
"""

import json
import logging
from pathlib import Path
from typing import Any, List, Optional, Union

import numpy as np

from src.errors import MalformedInput

logger = logging.getLogger(__name__)

SCHEMA = 'iqprob/1'

PathLike = Union[str, Path]


def matrix_to_document(matrix) -> dict:
    matrix = np.asarray(getattr(matrix, 'matrix', matrix), dtype=complex)
    entries = [[[float(z.real), float(z.imag)] for z in row] for row in matrix]
    return {'dim': int(matrix.shape[0]), 'entries': entries}


def matrix_from_document(document: Any, path: Optional[PathLike] = None) -> np.ndarray:
    """Parse a matrix document into a complex ndarray."""
    where = str(path) if path is not None else None

    if not isinstance(document, dict) or 'entries' not in document:
        raise MalformedInput("Matrix document must be an object with an 'entries' field", where)

    entries = document['entries']
    try:
        pairs = np.array(entries, dtype=float)
    except (TypeError, ValueError) as e:
        raise MalformedInput(f"Matrix entries are not numeric [re, im] pairs: {e}", where) from e

    if pairs.ndim != 3 or pairs.shape[2] != 2 or pairs.shape[0] != pairs.shape[1]:
        raise MalformedInput(
            f"Expected an n x n array of [re, im] pairs, got shape {pairs.shape}", where
        )

    dim = document.get('dim', pairs.shape[0])
    if dim != pairs.shape[0]:
        raise MalformedInput(f"Declared dim {dim} does not match entries ({pairs.shape[0]})", where)

    if not np.all(np.isfinite(pairs)):
        raise MalformedInput("Matrix entries must be finite doubles", where)

    return pairs[..., 0] + 1j * pairs[..., 1]


def read_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise MalformedInput(f"File not found: {path}", str(path)) from e
    except json.JSONDecodeError as e:
        raise MalformedInput(f"Invalid JSON: {e}", str(path)) from e


def load_matrix(path: PathLike) -> np.ndarray:
    matrix = matrix_from_document(read_json(path), path)
    logger.debug(f"Loaded {matrix.shape[0]}x{matrix.shape[0]} matrix from {path}")
    return matrix


def load_matrix_list(path: PathLike, key: str = 'projectors') -> List[np.ndarray]:
    """Load a list of matrices, given either as a bare list or under ``key``."""
    document = read_json(path)
    if isinstance(document, dict):
        document = document.get(key)
    if not isinstance(document, list) or not document:
        raise MalformedInput(f"Expected a non-empty list of matrices under '{key}'", str(path))
    return [matrix_from_document(item, path) for item in document]


def save_matrix(matrix, path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(matrix_to_document(matrix), f, indent=2)
    logger.info(f"Matrix saved to {path}")


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy and report objects to plain JSON values."""
    if hasattr(obj, 'to_dict') and not isinstance(obj, type):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj) and obj.ndim == 2:
            return matrix_to_document(obj)
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        # NaN and inf are not JSON
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(payload: dict) -> str:
    """Deterministic JSON rendering with the schema tag."""
    document = {'schema': SCHEMA}
    document.update(to_jsonable(payload))
    return json.dumps(document, sort_keys=True, indent=2)

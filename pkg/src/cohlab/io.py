"""JSON (de)serialisation of matrices, states and channels.

Matrix schema: ``{"rows": r, "cols": c, "entries": [[re, im], ...]}`` in
row-major order.  States add ``"kind"`` (``density``, ``pure`` or
``diagonal``; pure and diagonal states are stored as ``d x 1`` columns).
Channels are ``{"d_in": d, "kraus": [matrix, ...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channels import IncoherentChannel, validate_channel
from .exceptions import DimensionMismatchError
from .states import diagonal_to_density, pure_to_density, validate_density

STATE_KINDS = ("density", "pure", "diagonal")


def matrix_to_dict(M) -> dict:
    A = np.atleast_2d(np.asarray(M, dtype=complex))
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in A.ravel()],
    }


def matrix_from_dict(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = obj["entries"]
    if len(entries) != rows * cols:
        raise DimensionMismatchError(f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return flat.reshape(rows, cols)


def state_to_dict(state, kind: str = "density") -> dict:
    if kind not in STATE_KINDS:
        raise ValueError(f"unknown state kind {kind!r}")
    A = np.asarray(state, dtype=complex)
    if kind != "density":
        A = A.reshape(-1, 1)
    return {**matrix_to_dict(A), "kind": kind}


def state_from_dict(obj: dict) -> np.ndarray:
    """Density matrix described by a state object."""
    kind = obj.get("kind", "density")
    A = matrix_from_dict(obj)
    if kind == "density":
        return validate_density(A)
    if kind == "pure":
        return pure_to_density(A.ravel())
    if kind == "diagonal":
        return diagonal_to_density(np.real(A.ravel()))
    raise ValueError(f"unknown state kind {kind!r}")


def channel_to_dict(ch) -> dict:
    ops = ch.kraus if isinstance(ch, IncoherentChannel) else ch
    return {"d_in": int(np.asarray(ops[0]).shape[1]), "kraus": [matrix_to_dict(K) for K in ops]}


def channel_from_dict(obj: dict) -> IncoherentChannel:
    ops = [matrix_from_dict(K) for K in obj["kraus"]]
    if any(K.shape[1] != int(obj["d_in"]) for K in ops):
        raise DimensionMismatchError(f"Kraus column count differs from d_in={obj['d_in']}")
    return validate_channel(ops)


def _load(path):
    return json.loads(Path(path).read_text())


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def load_matrix(path) -> np.ndarray:
    return matrix_from_dict(_load(path))


def save_matrix(M, path):
    _dump(matrix_to_dict(M), path)


def load_state(path) -> np.ndarray:
    return state_from_dict(_load(path))


def save_state(state, path, kind: str = "density"):
    _dump(state_to_dict(state, kind), path)


def load_channel(path) -> IncoherentChannel:
    return channel_from_dict(_load(path))


def save_channel(ch, path):
    _dump(channel_to_dict(ch), path)

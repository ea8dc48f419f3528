"""Input validation helpers used by every estimator and pipeline stage.

All numeric entry points funnel through these so that shape, finiteness,
and zero-row violations raise the same errors with the same wording no
matter which stage hit them first.
"""

from __future__ import annotations

import numpy as np


def as_float_matrix(x, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting empty or non-finite input."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        bad = int(np.argwhere(~np.isfinite(arr).all(axis=1))[0, 0])
        raise ValueError(f"{name} contains non-finite entries (first bad row: {bad})")
    return arr


def check_no_zero_rows(arr: np.ndarray, name: str = "X") -> np.ndarray:
    """Row L2 norms, erroring on the first exactly-zero row."""
    norms = np.linalg.norm(arr, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"{name} has an all-zero row at index {int(zero[0])}")
    return norms


def check_same_dim(a: np.ndarray, b: np.ndarray, a_name: str = "a", b_name: str = "b") -> None:
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"dimension mismatch: {a_name} has dim {a.shape[1]}, {b_name} has dim {b.shape[1]}"
        )


def as_label_vector(y, name: str = "labels") -> np.ndarray:
    """Coerce to a 1-D array of nonnegative integers."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={arr.ndim}")
    if arr.size < 1:
        raise ValueError(f"{name} must be nonempty")
    if not np.issubdtype(arr.dtype, np.integer):
        cast = arr.astype(np.int64)
        if not np.array_equal(cast, arr):
            raise ValueError(f"{name} must contain integers")
        arr = cast
    if (arr < 0).any():
        raise ValueError(f"{name} must be nonnegative")
    return arr.astype(np.int64, copy=False)


def check_unit_rows(arr: np.ndarray, name: str = "X", tol: float = 1e-6) -> None:
    norms = np.linalg.norm(arr, axis=1)
    off = np.abs(norms - 1.0)
    if off.max() > tol:
        bad = int(np.argmax(off))
        raise ValueError(
            f"{name} rows must be unit-norm within {tol}; row {bad} has norm {norms[bad]:.6g}"
        )

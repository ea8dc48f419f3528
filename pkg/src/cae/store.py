"""Embedding matrices and the EMB1/LBL1 on-disk formats.

EMB1 layout (little-endian):
    bytes 0-3   magic ``EMB1``
    byte  4     modality code (0=image, 1=noun, 2=caption, 3=fused)
    bytes 5-7   zero padding
    bytes 8-11  u32 rows
    bytes 12-15 u32 dim
    bytes 16-   rows*dim IEEE-754 binary32 values, row-major

LBL1 layout (little-endian):
    bytes 0-3   magic ``LBL1``
    bytes 4-7   u32 count
    bytes 8-    count u32 labels

Values are stored as float32 and promoted to float64 in memory, so a
save/load round-trip of float32-representable data is bitwise exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .validation import as_float_matrix, check_no_zero_rows, check_same_dim

EMB1_MAGIC = b"EMB1"
LBL1_MAGIC = b"LBL1"

MODALITY_CODES = {"image": 0, "noun": 1, "caption": 2, "fused": 3}
MODALITY_NAMES = {code: name for name, code in MODALITY_CODES.items()}


@dataclass(frozen=True)
class EmbeddingMatrix:
    """A dense matrix of row vectors for one modality.

    ``data`` is always float64 in memory regardless of storage precision.
    """

    data: np.ndarray
    modality: str = "image"

    def __post_init__(self):
        arr = as_float_matrix(self.data, "embedding matrix")
        object.__setattr__(self, "data", arr)
        if self.modality not in MODALITY_CODES:
            raise ValueError(
                f"unknown modality {self.modality!r}; expected one of {sorted(MODALITY_CODES)}"
            )

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def normalized(self) -> "EmbeddingMatrix":
        return EmbeddingMatrix(l2_normalize(self.data), self.modality)


def l2_normalize(x):
    """Scale every row to unit L2 norm.

    Accepts an array or an :class:`EmbeddingMatrix` and returns the same
    kind. Zero rows are an error: a zero embedding is always an upstream
    bug, never something to skip silently.
    """
    if isinstance(x, EmbeddingMatrix):
        return EmbeddingMatrix(l2_normalize(x.data), x.modality)
    arr = as_float_matrix(x, "matrix")
    norms = check_no_zero_rows(arr, "matrix")
    return arr / norms[:, None]


def cosine_similarity(a, b) -> np.ndarray:
    """Pairwise cosine similarity between the rows of ``a`` and ``b``."""
    a_arr = a.data if isinstance(a, EmbeddingMatrix) else as_float_matrix(a, "a")
    b_arr = b.data if isinstance(b, EmbeddingMatrix) else as_float_matrix(b, "b")
    check_same_dim(a_arr, b_arr, "a", "b")
    a_norms = check_no_zero_rows(a_arr, "a")
    b_norms = check_no_zero_rows(b_arr, "b")
    return (a_arr @ b_arr.T) / np.outer(a_norms, b_norms)


def save_embeddings(matrix: EmbeddingMatrix, path) -> None:
    """Write an EMB1 file. Data is cast to float32 on disk."""
    payload = np.ascontiguousarray(matrix.data, dtype="<f4")
    header = struct.pack(
        "<4sB3xII", EMB1_MAGIC, MODALITY_CODES[matrix.modality], matrix.rows, matrix.dim
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def load_embeddings(path) -> EmbeddingMatrix:
    """Read an EMB1 file, validating structure byte by byte.

    Does not normalize; callers decide when to call :func:`l2_normalize`.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16:
        raise DataFormatError(
            f"{path}: header truncated at byte {len(blob)} (need 16 header bytes)"
        )
    magic = blob[:4]
    if magic != EMB1_MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r} at byte 0 (expected {EMB1_MAGIC!r})")
    code = blob[4]
    if code not in MODALITY_NAMES:
        raise DataFormatError(f"{path}: unknown modality code {code} at byte 4")
    if blob[5:8] != b"\x00\x00\x00":
        raise DataFormatError(f"{path}: nonzero padding at bytes 5-7")
    rows, dim = struct.unpack_from("<II", blob, 8)
    if rows == 0:
        raise DataFormatError(f"{path}: zero rows declared at byte 8")
    if dim == 0:
        raise DataFormatError(f"{path}: zero dim declared at byte 12")
    expected = 16 + 4 * rows * dim
    if len(blob) < expected:
        raise DataFormatError(
            f"{path}: payload truncated at byte {len(blob)} (expected {expected} bytes "
            f"for {rows}x{dim} float32 values)"
        )
    if len(blob) > expected:
        raise DataFormatError(
            f"{path}: {len(blob) - expected} trailing bytes after byte {expected}"
        )
    values = np.frombuffer(blob, dtype="<f4", offset=16).reshape(rows, dim)
    finite_rows = np.isfinite(values).all(axis=1)
    if not finite_rows.all():
        bad = int(np.flatnonzero(~finite_rows)[0])
        raise DataFormatError(f"{path}: non-finite value in row {bad}")
    return EmbeddingMatrix(values.astype(np.float64), MODALITY_NAMES[code])


def save_labels(labels, path) -> None:
    """Write an LBL1 label file."""
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("labels must be a nonempty 1-D sequence")
    if (arr < 0).any():
        raise ValueError("labels must be nonnegative")
    payload = np.ascontiguousarray(arr, dtype="<u4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sI", LBL1_MAGIC, arr.size))
        fh.write(payload.tobytes())


def load_labels(path) -> np.ndarray:
    """Read an LBL1 label file into an int64 vector."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8:
        raise DataFormatError(f"{path}: header truncated at byte {len(blob)} (need 8 header bytes)")
    magic = blob[:4]
    if magic != LBL1_MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r} at byte 0 (expected {LBL1_MAGIC!r})")
    (count,) = struct.unpack_from("<I", blob, 4)
    if count == 0:
        raise DataFormatError(f"{path}: zero label count declared at byte 4")
    expected = 8 + 4 * count
    if len(blob) < expected:
        raise DataFormatError(
            f"{path}: payload truncated at byte {len(blob)} (expected {expected} bytes "
            f"for {count} u32 labels)"
        )
    if len(blob) > expected:
        raise DataFormatError(f"{path}: {len(blob) - expected} trailing bytes after byte {expected}")
    return np.frombuffer(blob, dtype="<u4", offset=8).astype(np.int64)

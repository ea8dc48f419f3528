"""Producer side of the EMB1 embedding file contract.

Layout (little-endian): magic ``EMB1``, u8 modality code (0=image,
1=noun, 2=caption, 3=fused), 3 zero bytes, u32 rows, u32 dim, then
rows*dim float32 values row-major. Files written here are consumed by
the clustering package's loader, which validates the same contract.
"""

from __future__ import annotations

import struct

import numpy as np

MODALITY_CODES = {"image": 0, "noun": 1, "caption": 2, "fused": 3}


def write_emb1(matrix: np.ndarray, modality: str, path) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise ValueError("matrix contains non-finite values")
    header = struct.pack(
        "<4sB3xII", b"EMB1", MODALITY_CODES[modality], matrix.shape[0], matrix.shape[1]
    )
    payload = np.ascontiguousarray(matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())

"""Extraction jobs: images, templated nouns, and caption files to EMB1.

Image rows follow stable filename-sorted order (the canonical pairing
with label files); text rows follow input order. Rows are always
L2-normalized. Undecodable images are skipped with a warning and
recorded in a JSON sidecar manifest next to the output file, together
with the row-to-filename mapping.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .emb1 import write_emb1
from .encoders import DEFAULT_MODEL, make_encoder

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp", ".tiff"}
CLASS_SLOT = "[CLASS]"
DEFAULT_TEMPLATE = "a photo of [CLASS]"


@dataclass(frozen=True)
class ExtractionJob:
    source: str  # image_folder | class_name_list | caption_text_file
    input_path: str
    output_path: str
    model: str = DEFAULT_MODEL
    batch_size: int = 256
    template: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        if self.source not in ("image_folder", "class_name_list", "caption_text_file"):
            raise ValueError(f"unknown source {self.source!r}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.source == "class_name_list" and self.template.count(CLASS_SLOT) != 1:
            raise ValueError(
                f"template must contain exactly one {CLASS_SLOT} slot, got {self.template!r}"
            )


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if (norms == 0).any():
        raise ValueError("encoder produced a zero embedding")
    return matrix / norms


def _batched(encode, items, batch_size):
    parts = [encode(items[i : i + batch_size]) for i in range(0, len(items), batch_size)]
    return np.vstack(parts)


def extract_images(job: ExtractionJob, encoder=None) -> Path:
    """Encode every decodable image in a folder, filename-sorted."""
    folder = Path(job.input_path)
    if not folder.is_dir():
        raise ValueError(f"not a directory: {folder}")
    files = sorted(
        path for path in folder.iterdir() if path.suffix.lower() in IMAGE_EXTENSIONS
    )
    if not files:
        raise ValueError(f"no image files in {folder}")

    encoder = encoder or make_encoder(job.model)
    images = []
    encoded_names = []
    skipped = []
    for path in files:
        try:
            with Image.open(path) as handle:
                images.append(handle.convert("RGB").copy())
            encoded_names.append(path.name)
        except Exception as exc:  # undecodable: skip, warn, record
            warnings.warn(f"skipping undecodable image {path.name}: {exc}", stacklevel=2)
            skipped.append(path.name)
    if not images:
        raise ValueError(f"no decodable images in {folder}")

    matrix = _normalize_rows(_batched(encoder.encode_images, images, job.batch_size))
    out = Path(job.output_path)
    write_emb1(matrix, "image", out)
    manifest = {"rows": encoded_names, "skipped": skipped, "model": job.model}
    out.with_name(out.name + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    logger.info("encoded %d images (%d skipped) -> %s", len(images), len(skipped), out)
    return out


def _read_lines(path: Path):
    lines = [line.strip() for line in path.read_text().splitlines()]
    return [line for line in lines if line]


def extract_text(job: ExtractionJob, encoder=None) -> Path:
    """Encode terms (templated) or captions, one row per input line.

    Duplicate lines produce duplicate rows; deduplication is the
    consumer's job.
    """
    path = Path(job.input_path)
    if not path.is_file():
        raise ValueError(f"not a file: {path}")
    lines = _read_lines(path)
    if not lines:
        raise ValueError(f"no terms or captions in {path}")

    if job.source == "class_name_list":
        texts = [job.template.replace(CLASS_SLOT, line) for line in lines]
        modality = "noun"
    else:
        texts = lines
        modality = "caption"

    encoder = encoder or make_encoder(job.model)
    matrix = _normalize_rows(_batched(encoder.encode_texts, texts, job.batch_size))
    out = Path(job.output_path)
    write_emb1(matrix, modality, out)
    logger.info("encoded %d %s rows -> %s", len(texts), modality, out)
    return out


def run_job(job: ExtractionJob, encoder=None) -> Path:
    if job.source == "image_folder":
        return extract_images(job, encoder)
    return extract_text(job, encoder)

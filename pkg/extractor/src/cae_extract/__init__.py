"""Produce EMB1 embedding banks from a pretrained vision-language model."""

from .emb1 import write_emb1
from .encoders import ClipEncoder, HashEncoder, make_encoder
from .extract import ExtractionJob, extract_images, extract_text, run_job

__version__ = "0.1.0"

__all__ = [
    "ClipEncoder",
    "ExtractionJob",
    "HashEncoder",
    "extract_images",
    "extract_text",
    "make_encoder",
    "run_job",
    "write_emb1",
]

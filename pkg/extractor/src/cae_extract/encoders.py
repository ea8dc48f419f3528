"""Embedding encoders.

The default is the ViT-B/32 CLIP checkpoint via ``transformers`` (the
``clip`` extra). ``debug-hash-<dim>`` encoders are available everywhere:
they derive deterministic pseudo-embeddings from content hashes, which
makes offline smoke tests and pipeline dry-runs possible without model
weights. Image and text embeddings from one encoder always share a
dimension.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEFAULT_MODEL = "openai/clip-vit-base-patch32"

_HASH_MODEL = re.compile(r"^debug-hash-(\d+)$")


class HashEncoder:
    """Deterministic content-hash embeddings for offline use."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim

    def _embed(self, payload: bytes) -> np.ndarray:
        digest = hashlib.sha256(payload).digest()
        seed = int.from_bytes(digest[:8], "little")
        return np.random.default_rng(seed).standard_normal(self.dim)

    def encode_images(self, images) -> np.ndarray:
        return np.stack([self._embed(image.tobytes()) for image in images])

    def encode_texts(self, texts) -> np.ndarray:
        return np.stack([self._embed(text.encode("utf-8")) for text in texts])


class ClipEncoder:
    """Vision-language model encoder backed by ``transformers``.

    Loads lazily; inference runs batched under ``torch.no_grad`` in eval
    mode, so repeated runs over the same inputs are deterministic.
    """

    def __init__(self, model_id: str = DEFAULT_MODEL):
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise RuntimeError(
                "the default encoder needs the 'clip' extra (torch + transformers); "
                "pip install 'cae-extract[clip]'"
            ) from exc
        self._torch = torch
        self._model = CLIPModel.from_pretrained(model_id)
        self._model.eval()
        self._processor = CLIPProcessor.from_pretrained(model_id)
        self.dim = int(self._model.config.projection_dim)

    def encode_images(self, images) -> np.ndarray:
        inputs = self._processor(images=list(images), return_tensors="pt")
        with self._torch.no_grad():
            features = self._model.get_image_features(**inputs)
        return features.cpu().numpy().astype(np.float64)

    def encode_texts(self, texts) -> np.ndarray:
        inputs = self._processor(
            text=list(texts), return_tensors="pt", padding=True, truncation=True
        )
        with self._torch.no_grad():
            features = self._model.get_text_features(**inputs)
        return features.cpu().numpy().astype(np.float64)


def make_encoder(model_id: str):
    match = _HASH_MODEL.match(model_id)
    if match:
        return HashEncoder(int(match.group(1)))
    return ClipEncoder(model_id)

"""Prototype-guided adaptive fusion of image, noun, and caption features.

Each instance gets a prototype (the plain average of its three modality
vectors) and per-modality weights from a temperature-scaled softmax over
cosine similarities to that prototype. The fused vector is the weighted
combination. Concat and plain-sum baselines are provided for ablations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .store import l2_normalize
from .validation import as_float_matrix, check_unit_rows

MODALITY_ORDER = ("image", "noun", "caption")


@dataclass(frozen=True)
class ModalityBundle:
    """Per-instance image, noun-counterpart, and caption-counterpart rows."""

    image: np.ndarray
    noun: np.ndarray
    caption: np.ndarray

    def __post_init__(self):
        image = as_float_matrix(self.image, "image")
        noun = as_float_matrix(self.noun, "noun")
        caption = as_float_matrix(self.caption, "caption")
        if not (image.shape == noun.shape == caption.shape):
            raise ValueError(
                f"modalities must share shape; got image {image.shape}, "
                f"noun {noun.shape}, caption {caption.shape}"
            )
        for name, arr in (("image", image), ("noun", noun), ("caption", caption)):
            check_unit_rows(arr, name)
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "noun", noun)
        object.__setattr__(self, "caption", caption)

    @property
    def n(self) -> int:
        return self.image.shape[0]

    def stacked(self) -> np.ndarray:
        """Shape (n, 3, dim), modality axis ordered image/noun/caption."""
        return np.stack([self.image, self.noun, self.caption], axis=1)


@dataclass(frozen=True)
class FusionWeights:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: float


@dataclass(frozen=True)
class FusedRepresentation:
    vectors: np.ndarray
    weights: FusionWeights


def prototype(bundle: ModalityBundle) -> np.ndarray:
    """Per-instance average of the three modality vectors, not renormalized.

    It only ever feeds a cosine similarity, which is scale-invariant, so
    renormalizing would be a wasted division.
    """
    return (bundle.image + bundle.noun + bundle.caption) / 3.0


def temperature_softmax(alpha: np.ndarray, gamma: float) -> np.ndarray:
    """Row-wise softmax of alpha/gamma with max-subtraction.

    At gamma 0.01 and alpha entries in [-1, 1], exponent arguments reach
    +-200, so the max subtraction is mandatory for overflow safety.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    scores = np.asarray(alpha, dtype=np.float64) / gamma
    scores = scores - scores.max(axis=1, keepdims=True)
    beta = np.exp(scores)
    beta /= beta.sum(axis=1, keepdims=True)
    return beta


def fusion_weights(bundle: ModalityBundle, gamma: float = 0.01) -> FusionWeights:
    """Cosine-to-prototype similarities and their temperature softmax.

    A zero prototype (mutually cancelling modalities) indicates corrupted
    counterparts and is an error rather than a silent uniform fallback.
    """
    proto = prototype(bundle)
    proto_norms = np.linalg.norm(proto, axis=1)
    zero = np.flatnonzero(proto_norms == 0.0)
    if zero.size:
        raise ValueError(
            f"prototype for instance {int(zero[0])} is the zero vector "
            "(modalities cancel exactly)"
        )
    stacked = bundle.stacked()
    # rows are unit-norm, so cosine reduces to dot / ||prototype||
    alpha = np.einsum("nmd,nd->nm", stacked, proto) / proto_norms[:, None]
    return FusionWeights(alpha=alpha, beta=temperature_softmax(alpha, gamma), gamma=gamma)


def fuse(bundle: ModalityBundle, weights: FusionWeights, renormalize: bool = True) -> FusedRepresentation:
    """Weighted combination of the modality vectors per instance.

    Rows are L2-normalized by default so the final clustering sees
    comparable scales across instances.
    """
    beta = as_float_matrix(weights.beta, "beta")
    if beta.shape != (bundle.n, 3):
        raise ValueError(f"beta shape {beta.shape} does not match bundle ({bundle.n}, 3)")
    fused = np.einsum("nm,nmd->nd", beta, bundle.stacked())
    if renormalize:
        fused = l2_normalize(fused)
    return FusedRepresentation(vectors=fused, weights=weights)


def baseline_concat(bundle: ModalityBundle) -> np.ndarray:
    """Row-wise image|noun|caption concatenation, L2-normalized."""
    return l2_normalize(np.hstack([bundle.image, bundle.noun, bundle.caption]))


def baseline_sum(bundle: ModalityBundle) -> np.ndarray:
    """Unweighted row sum, L2-normalized.

    Equal in direction to fusing with uniform weights; a zero-sum row is
    an error (the normalizer would divide by zero).
    """
    total = bundle.image + bundle.noun + bundle.caption
    return l2_normalize(total)

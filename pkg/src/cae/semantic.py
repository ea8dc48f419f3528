"""Selecting the relevant noun and caption subsets for an image collection.

Images are clustered into a small number of semantic centers (one per
~300 images by default). Every text in a bank gets a softmax probability
of belonging to each center, the top-K texts per center are retrieved,
and the union over centers becomes the working text set for transport.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .kmeans import KMeansConfig, kmeans_fit
from .validation import as_float_matrix, check_same_dim


@dataclass(frozen=True)
class SpaceConfig:
    centers_divisor: int = 300
    topk: int = 10
    kmeans: KMeansConfig = field(default_factory=lambda: KMeansConfig(k=1))

    def __post_init__(self):
        if self.centers_divisor < 1:
            raise ValueError(f"centers_divisor must be >= 1, got {self.centers_divisor}")
        if self.topk < 1:
            raise ValueError(f"topk must be >= 1, got {self.topk}")


@dataclass(frozen=True)
class SemanticSpace:
    noun_indices: np.ndarray
    caption_indices: np.ndarray
    noun_embeddings: np.ndarray
    caption_embeddings: np.ndarray
    centers: np.ndarray


def default_num_centers(n_images: int, divisor: int) -> int:
    """Number of coarse image centers: floor(N / divisor), at least 1."""
    if n_images < 1:
        raise ValueError(f"n_images must be >= 1, got {n_images}")
    if divisor < 1:
        raise ValueError(f"divisor must be >= 1, got {divisor}")
    return max(1, n_images // divisor)


def assignment_probability(texts, centers) -> np.ndarray:
    """Per-text softmax over centers of the dot product with each center.

    Inputs are used as given: text rows are expected unit-norm, centers are
    the raw cluster means (not renormalized). Each output row sums to 1.
    """
    texts = as_float_matrix(texts, "texts")
    centers = as_float_matrix(centers, "centers")
    check_same_dim(texts, centers, "texts", "centers")
    scores = texts @ centers.T
    scores -= scores.max(axis=1, keepdims=True)
    np.exp(scores, out=scores)
    scores /= scores.sum(axis=1, keepdims=True)
    return scores


def select_topk(probs: np.ndarray, topk: int) -> list[np.ndarray]:
    """Indices of the topk highest-probability texts for each center.

    Ties break toward the lower text index. If topk covers the whole bank,
    every index is returned for every center.
    """
    probs = as_float_matrix(probs, "probs")
    if topk < 1:
        raise ValueError(f"topk must be >= 1, got {topk}")
    k = min(topk, probs.shape[0])
    picks = []
    for j in range(probs.shape[1]):
        order = np.argsort(-probs[:, j], kind="stable")
        picks.append(np.sort(order[:k]))
    return picks


def select_relevant(bank, centers, topk: int) -> np.ndarray:
    """Union of per-center top-K bank indices, deduplicated and sorted."""
    probs = assignment_probability(bank, centers)
    return np.unique(np.concatenate(select_topk(probs, topk)))


def build_semantic_space(images, noun_bank, caption_bank, cfg: SpaceConfig) -> SemanticSpace:
    """Cluster images into centers and retrieve top-K texts per center.

    The selected set for each bank is the deduplicated union over centers,
    sorted by bank index so downstream matrix layout is deterministic.
    """
    images = as_float_matrix(images, "images")
    noun_bank = as_float_matrix(noun_bank, "noun_bank")
    caption_bank = as_float_matrix(caption_bank, "caption_bank")
    check_same_dim(images, noun_bank, "images", "noun_bank")
    check_same_dim(images, caption_bank, "images", "caption_bank")

    n_centers = default_num_centers(images.shape[0], cfg.centers_divisor)
    result = kmeans_fit(images, replace(cfg.kmeans, k=n_centers))
    centers = result.centers

    noun_indices = select_relevant(noun_bank, centers, cfg.topk)
    caption_indices = select_relevant(caption_bank, centers, cfg.topk)
    return SemanticSpace(
        noun_indices=noun_indices,
        caption_indices=caption_indices,
        noun_embeddings=noun_bank[noun_indices].copy(),
        caption_embeddings=caption_bank[caption_indices].copy(),
        centers=centers,
    )

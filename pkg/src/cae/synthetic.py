"""Seeded synthetic benchmark: spherical class mixtures with text banks.

A desk-scale stand-in for real embedding exports. Classes are nearly
orthogonal unit directions. Images are normalized noisy copies of their
class direction; the Gaussian noise is anisotropic, with a shared
low-rank nuisance component on top of an isotropic floor, mimicking the
modality-specific structure of real image embeddings that text is free
of. A configurable fraction of each text bank is aligned to class
directions (captions twice as noisy as nouns, mimicking attribute
variation) and the rest are uniform-sphere distractors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MAX_DIRECTION_TRIES = 10000

# bank noise relative to the image noise floor: nouns are canonical
# category anchors, captions vary with attributes (2x noisier)
_NOUN_NOISE_FACTOR = 0.25
_CAPTION_NOISE_FACTOR = 0.5


@dataclass(frozen=True)
class SynthSpec:
    n_classes: int = 5
    per_class: int = 300
    dim: int = 64
    class_separation: float = 1.0
    noise_sigma: float = 0.1
    nuisance_rank: int | None = None  # default: dim // 2
    nuisance_scale: float = 0.7
    text_alignment: float = 0.9
    bank_sizes: tuple = (384, 384)
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 1 or self.per_class < 1 or self.dim < 1:
            raise ValueError("n_classes, per_class, and dim must all be >= 1")
        if not self.noise_sigma > 0:
            raise ValueError(f"noise_sigma must be > 0, got {self.noise_sigma}")
        if not self.class_separation > 0:
            raise ValueError(f"class_separation must be > 0, got {self.class_separation}")
        if self.nuisance_rank is not None and not 0 <= self.nuisance_rank <= self.dim:
            raise ValueError(f"nuisance_rank must be in [0, dim], got {self.nuisance_rank}")
        if self.nuisance_scale < 0:
            raise ValueError(f"nuisance_scale must be >= 0, got {self.nuisance_scale}")
        if not 0.0 <= self.text_alignment <= 1.0:
            raise ValueError(f"text_alignment must be in [0, 1], got {self.text_alignment}")
        if len(self.bank_sizes) != 2 or min(self.bank_sizes) < 1:
            raise ValueError(f"bank_sizes must be two positive counts, got {self.bank_sizes}")


@dataclass(frozen=True)
class SynthData:
    images: np.ndarray
    noun_bank: np.ndarray
    caption_bank: np.ndarray
    labels: np.ndarray
    class_directions: np.ndarray


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _class_directions(rng: np.random.Generator, n_classes: int, dim: int) -> np.ndarray:
    """Unit directions with pairwise cosine <= 0.2, by rejection."""
    directions = []
    tries = 0
    while len(directions) < n_classes:
        tries += 1
        if tries > _MAX_DIRECTION_TRIES:
            raise ValueError(
                f"dim={dim} is too small to place {n_classes} directions "
                "with pairwise cosine <= 0.2"
            )
        cand = rng.standard_normal(dim)
        cand /= np.linalg.norm(cand)
        if all(float(cand @ d) <= 0.2 for d in directions):
            directions.append(cand)
    return np.asarray(directions)


def _bank(rng, directions, size, alignment, sigma, dim):
    n_aligned = int(round(alignment * size))
    rows = np.empty((size, dim))
    if n_aligned:
        classes = np.arange(n_aligned) % directions.shape[0]
        rows[:n_aligned] = directions[classes] + sigma * rng.standard_normal((n_aligned, dim))
    if size - n_aligned:
        rows[n_aligned:] = rng.standard_normal((size - n_aligned, dim))
    return _normalize_rows(rows)[rng.permutation(size)]


def generate_synthetic(spec: SynthSpec) -> SynthData:
    """Deterministic benchmark data for one seed.

    The label histogram is exactly ``per_class`` for every class. Image
    noise is Gaussian with covariance sigma^2 I + scale^2 B B^T for a
    random rank-``nuisance_rank`` orthonormal basis B; text banks carry
    only isotropic noise, so text-anchored features are nuisance-free.
    """
    rng = np.random.default_rng(spec.seed)
    directions = _class_directions(rng, spec.n_classes, spec.dim)

    n = spec.n_classes * spec.per_class
    labels = np.repeat(np.arange(spec.n_classes), spec.per_class)
    noise = spec.noise_sigma * rng.standard_normal((n, spec.dim))
    rank = spec.dim // 2 if spec.nuisance_rank is None else spec.nuisance_rank
    if rank and spec.nuisance_scale > 0:
        basis, _ = np.linalg.qr(rng.standard_normal((spec.dim, rank)))
        noise += spec.nuisance_scale * rng.standard_normal((n, rank)) @ basis.T
    images = _normalize_rows(spec.class_separation * directions[labels] + noise)

    noun_bank = _bank(
        rng,
        directions,
        spec.bank_sizes[0],
        spec.text_alignment,
        _NOUN_NOISE_FACTOR * spec.noise_sigma,
        spec.dim,
    )
    caption_bank = _bank(
        rng,
        directions,
        spec.bank_sizes[1],
        spec.text_alignment,
        _CAPTION_NOISE_FACTOR * spec.noise_sigma,
        spec.dim,
    )
    return SynthData(
        images=images,
        noun_bank=noun_bank,
        caption_bank=caption_bank,
        labels=labels,
        class_directions=directions,
    )

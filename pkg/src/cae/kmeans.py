"""Seeded, deterministic k-means with D^2 initialization and restarts.

Used twice in the pipeline: once to find coarse image semantic centers
that drive text retrieval, and once to cluster the fused features. Both
uses need reproducible assignments, so every source of randomness is
derived from an explicit seed and all ties break toward the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import as_float_matrix


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    seed: int = 0
    restarts: int = 10
    max_iter: int = 300
    rel_tol: float = 1e-4
    empty_cluster_policy: str = "reseed_farthest"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.empty_cluster_policy != "reseed_farthest":
            raise ValueError(f"unknown empty_cluster_policy {self.empty_cluster_policy!r}")


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int
    inertia_history: np.ndarray = field(repr=False, default=None)


def _squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # ||x - c||^2 expanded; clip tiny negatives introduced by cancellation
    d2 = (
        np.einsum("ij,ij->i", x, x)[:, None]
        - 2.0 * (x @ centers.T)
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    return np.maximum(d2, 0.0)


def kmeans_pp_init(x, k: int, seed) -> np.ndarray:
    """Pick k distinct rows of x by the D^2 weighting scheme.

    ``seed`` may be an int or a ``numpy.random.Generator``. Rows already
    chosen get probability zero, so the k indices are always distinct even
    when the data contains duplicate points.
    """
    x = as_float_matrix(x, "x")
    n = x.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds number of rows {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = _squared_distances(x, x[chosen[0]][None, :])[:, 0]
    d2[chosen[0]] = 0.0
    taken = np.zeros(n, dtype=bool)
    taken[chosen[0]] = True
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining rows duplicate a chosen one; fall back to uniform
            idx = int(rng.choice(np.flatnonzero(~taken)))
        chosen[j] = idx
        taken[idx] = True
        d2 = np.minimum(d2, _squared_distances(x, x[idx][None, :])[:, 0])
        d2[taken] = 0.0
    return x[chosen].copy()


def _reseed_empty(x, centers, labels, point_d2, counts):
    """Move each empty cluster onto the point farthest from its current center.

    Points that are the sole member of their cluster are not eligible,
    otherwise relocating them would empty another cluster in turn.
    """
    for j in np.flatnonzero(counts == 0):
        eligible = counts[labels] > 1
        candidates = np.where(eligible, point_d2, -1.0)
        farthest = int(np.argmax(candidates))
        counts[labels[farthest]] -= 1
        counts[j] = 1
        centers[j] = x[farthest]
        labels[farthest] = j
        point_d2[farthest] = 0.0


def _lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int, rel_tol: float):
    n, _ = x.shape
    k = centers.shape[0]
    centers = centers.copy()
    labels_prev = None
    history = []
    labels = None
    point_d2 = None

    for it in range(1, max_iter + 1):
        d2 = _squared_distances(x, centers)
        labels = np.argmin(d2, axis=1)  # ties break to the lowest index
        point_d2 = d2[np.arange(n), labels]
        counts = np.bincount(labels, minlength=k)
        if (counts == 0).any():
            _reseed_empty(x, centers, labels, point_d2, counts)
        history.append(point_d2.sum())

        if labels_prev is not None and np.array_equal(labels, labels_prev):
            return labels, centers, float(history[-1]), it, np.asarray(history)

        new_centers = np.zeros_like(centers)
        np.add.at(new_centers, labels, x)
        new_centers /= counts[:, None]

        shift = np.linalg.norm(new_centers - centers)
        scale = np.linalg.norm(centers)
        centers = new_centers
        labels_prev = labels
        if shift <= rel_tol * max(scale, np.finfo(float).tiny):
            break

    # final assignment so returned labels are optimal for returned centers
    d2 = _squared_distances(x, centers)
    labels = np.argmin(d2, axis=1)
    point_d2 = d2[np.arange(n), labels]
    counts = np.bincount(labels, minlength=k)
    if (counts == 0).any():
        _reseed_empty(x, centers, labels, point_d2, counts)
    history.append(point_d2.sum())
    return labels, centers, float(history[-1]), len(history), np.asarray(history)


def kmeans_fit(x, cfg: KMeansConfig) -> KMeansResult:
    """Run k-means with restarts; return the restart with the lowest inertia.

    Deterministic given (x, cfg): restart r uses the r-th child of
    ``SeedSequence(cfg.seed)`` and ties in inertia keep the earlier restart.
    """
    x = as_float_matrix(x, "x")
    if cfg.k > x.shape[0]:
        raise ValueError(f"k={cfg.k} exceeds number of rows {x.shape[0]}")

    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng(seeds[r])
        init = kmeans_pp_init(x, cfg.k, rng)
        labels, centers, inertia, n_iter, history = _lloyd(x, init, cfg.max_iter, cfg.rel_tol)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels, centers, inertia, n_iter, history)
    return best


def nearest_center(x, centers) -> np.ndarray:
    """Assign each row of x to its nearest center (lowest index on ties)."""
    x = as_float_matrix(x, "x")
    centers = as_float_matrix(centers, "centers")
    return np.argmin(_squared_distances(x, centers), axis=1)

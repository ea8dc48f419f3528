"""Scikit-learn style estimators for the full clustering pipeline.

``CAE`` runs the whole training-free flow on in-memory arrays: select
relevant nouns and captions, build transport-aligned text counterparts,
fuse modalities adaptively, and cluster the result. ``SeededKMeans`` is
the deterministic k-means used for both the coarse semantic centers and
the final assignment, exposed with the usual fit/predict/transform API.
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin

from .fusion import ModalityBundle, baseline_concat, baseline_sum, fuse, fusion_weights
from .kmeans import KMeansConfig, kmeans_fit, nearest_center
from .semantic import default_num_centers, select_relevant
from .store import l2_normalize
from .transport import SinkhornConfig, counterpart, sinkhorn, softmax_counterpart
from .validation import as_float_matrix, check_same_dim

MODES = ("cae", "image_only", "noun_only", "caption_only", "concat", "sum", "softmax_cae")

_NEEDS_NOUNS = {"cae", "softmax_cae", "concat", "sum", "noun_only"}
_NEEDS_CAPTIONS = {"cae", "softmax_cae", "concat", "sum", "caption_only"}
_FUSION_MODES = {"cae", "softmax_cae"}


class SeededKMeans(TransformerMixin, ClusterMixin, BaseEstimator):
    """Deterministic k-means with D^2 init, restarts, and stable tie-breaks."""

    def __init__(self, n_clusters=8, random_state=0, restarts=10, max_iter=300, rel_tol=1e-4):
        self.n_clusters = n_clusters
        self.random_state = random_state
        self.restarts = restarts
        self.max_iter = max_iter
        self.rel_tol = rel_tol

    def fit(self, X, y=None):
        result = kmeans_fit(
            X,
            KMeansConfig(
                k=self.n_clusters,
                seed=self.random_state,
                restarts=self.restarts,
                max_iter=self.max_iter,
                rel_tol=self.rel_tol,
            ),
        )
        self.labels_ = result.assignments
        self.cluster_centers_ = result.centers
        self.inertia_ = result.inertia
        self.n_iter_ = result.n_iter
        return self

    def predict(self, X):
        return nearest_center(X, self.cluster_centers_)

    def transform(self, X):
        """Euclidean distances to each cluster center."""
        X = as_float_matrix(X, "X")
        diffs = X[:, None, :] - self.cluster_centers_[None, :, :]
        return np.linalg.norm(diffs, axis=2)


class CAE(ClusterMixin, BaseEstimator):
    """Training-free clustering of image embeddings with text semantics.

    Parameters mirror the pipeline configuration: ``mode`` picks the
    feature space that gets clustered (adaptive fusion by default, with
    single-modality and concat/sum ablations), ``epsilon`` is the
    entropic regularization of the transport solver, and ``gamma`` the
    fusion softmax temperature. All randomness derives from
    ``random_state``.

    Text banks are passed to :meth:`fit` rather than the constructor
    because they are data, not hyperparameters.
    """

    def __init__(
        self,
        n_clusters=2,
        mode="cae",
        topk=10,
        centers_divisor=300,
        epsilon=0.05,
        gamma=0.01,
        softmax_temperature=1.0,
        normalize_counterparts=True,
        renormalize_fused=True,
        restarts=10,
        max_iter=300,
        rel_tol=1e-4,
        sinkhorn_max_iter=1000,
        marginal_tol=1e-6,
        log_domain=True,
        random_state=0,
    ):
        self.n_clusters = n_clusters
        self.mode = mode
        self.topk = topk
        self.centers_divisor = centers_divisor
        self.epsilon = epsilon
        self.gamma = gamma
        self.softmax_temperature = softmax_temperature
        self.normalize_counterparts = normalize_counterparts
        self.renormalize_fused = renormalize_fused
        self.restarts = restarts
        self.max_iter = max_iter
        self.rel_tol = rel_tol
        self.sinkhorn_max_iter = sinkhorn_max_iter
        self.marginal_tol = marginal_tol
        self.log_domain = log_domain
        self.random_state = random_state

    def _validate_mode(self, nouns, captions):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode in _NEEDS_NOUNS and nouns is None:
            raise ValueError(f"mode {self.mode!r} requires a noun bank")
        if self.mode in _NEEDS_CAPTIONS and captions is None:
            raise ValueError(f"mode {self.mode!r} requires a caption bank")

    def _counterpart_for(self, X, selected):
        """Counterpart matrix plus solver diagnostics for one text set."""
        if self.mode == "softmax_cae":
            vectors, weights = softmax_counterpart(X, selected, self.softmax_temperature)
            if self.normalize_counterparts:
                vectors = l2_normalize(vectors)
            col_violation = np.abs(
                (weights / X.shape[0]).sum(axis=0) - 1.0 / selected.shape[0]
            ).max()
            return vectors, {"column_violation": float(col_violation)}
        sims = X @ selected.T
        plan = sinkhorn(
            1.0 - sims,
            SinkhornConfig(
                epsilon=self.epsilon,
                max_iter=self.sinkhorn_max_iter,
                marginal_tol=self.marginal_tol,
                log_domain=self.log_domain,
            ),
        )
        vectors = counterpart(X, selected, plan, sims, self.normalize_counterparts)
        return vectors, {
            "marginal_error": plan.marginal_error,
            "iterations": plan.iterations_used,
        }

    def fit(self, X, y=None, *, nouns=None, captions=None):
        """Cluster image embeddings, optionally enriched by text banks.

        X, nouns, and captions are row-wise embedding matrices sharing one
        dimension; all are L2-normalized internally before use.
        """
        self._validate_mode(nouns, captions)
        if self.n_clusters < 1:
            raise ValueError(f"n_clusters must be >= 1, got {self.n_clusters}")
        X = l2_normalize(as_float_matrix(X, "X"))
        timings = {}
        diagnostics = {}
        seeds = np.random.SeedSequence(self.random_state).generate_state(2)

        if self.mode == "image_only":
            features = X
            self.noun_counterpart_ = None
            self.caption_counterpart_ = None
            self.fusion_weights_ = None
            self.semantic_centers_ = None
            self.noun_indices_ = None
            self.caption_indices_ = None
        else:
            started = time.perf_counter()
            n_centers = default_num_centers(X.shape[0], self.centers_divisor)
            center_result = kmeans_fit(
                X,
                KMeansConfig(
                    k=n_centers,
                    seed=int(seeds[0]),
                    restarts=self.restarts,
                    max_iter=self.max_iter,
                    rel_tol=self.rel_tol,
                ),
            )
            self.semantic_centers_ = center_result.centers
            banks = {}
            if self.mode in _NEEDS_NOUNS:
                banks["noun"] = l2_normalize(as_float_matrix(nouns, "nouns"))
                check_same_dim(X, banks["noun"], "X", "nouns")
            if self.mode in _NEEDS_CAPTIONS:
                banks["caption"] = l2_normalize(as_float_matrix(captions, "captions"))
                check_same_dim(X, banks["caption"], "X", "captions")

            indices = {
                name: select_relevant(bank, self.semantic_centers_, self.topk)
                for name, bank in banks.items()
            }
            timings["semantic_space"] = time.perf_counter() - started

            started = time.perf_counter()
            counterparts = {}
            for name, bank in banks.items():
                selected = bank[indices[name]]
                vectors, stats = self._counterpart_for(X, selected)
                counterparts[name] = vectors
                diagnostics[f"n_selected_{name}s"] = int(indices[name].size)
                for key, value in stats.items():
                    diagnostics[f"{name}_{key}"] = value
            timings["transport"] = time.perf_counter() - started

            self.noun_indices_ = indices.get("noun")
            self.caption_indices_ = indices.get("caption")
            self.noun_counterpart_ = counterparts.get("noun")
            self.caption_counterpart_ = counterparts.get("caption")
            self.fusion_weights_ = None

            started = time.perf_counter()
            if self.mode == "noun_only":
                features = self.noun_counterpart_
            elif self.mode == "caption_only":
                features = self.caption_counterpart_
            else:
                bundle = ModalityBundle(X, self.noun_counterpart_, self.caption_counterpart_)
                if self.mode in _FUSION_MODES:
                    weights = fusion_weights(bundle, self.gamma)
                    features = fuse(bundle, weights, self.renormalize_fused).vectors
                    self.fusion_weights_ = weights
                    diagnostics["mean_beta"] = weights.beta.mean(axis=0).tolist()
                elif self.mode == "sum":
                    features = baseline_sum(bundle)
                else:
                    features = baseline_concat(bundle)
            timings["fusion"] = time.perf_counter() - started

        started = time.perf_counter()
        final = kmeans_fit(
            features,
            KMeansConfig(
                k=self.n_clusters,
                seed=int(seeds[1]),
                restarts=self.restarts,
                max_iter=self.max_iter,
                rel_tol=self.rel_tol,
            ),
        )
        timings["cluster"] = time.perf_counter() - started

        self.features_ = features
        self.labels_ = final.assignments
        self.cluster_centers_ = final.centers
        self.inertia_ = final.inertia
        self.timings_ = timings
        self.diagnostics_ = diagnostics
        return self

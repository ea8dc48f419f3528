"""Entropic optimal transport between images and a selected text set.

The transport plan couples the uniform empirical distribution over N
images with the uniform distribution over the selected texts, using
1 - cosine similarity as cost. Per-image text counterparts are then the
plan-and-similarity weighted sums of text vectors. A softmax-weighted
aggregation baseline is included for comparison: it satisfies the row
marginals by construction but, unlike the plan, not the column marginals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import NumericalStabilityError
from .store import cosine_similarity, l2_normalize
from .validation import as_float_matrix, check_same_dim


@dataclass(frozen=True)
class SinkhornConfig:
    epsilon: float = 0.05
    max_iter: int = 1000
    marginal_tol: float = 1e-6
    log_domain: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.marginal_tol > 0:
            raise ValueError(f"marginal_tol must be > 0, got {self.marginal_tol}")


@dataclass(frozen=True)
class TransportPlan:
    values: np.ndarray
    epsilon: float
    iterations_used: int
    marginal_error: float


def cost_matrix(images, texts) -> np.ndarray:
    """Pairwise cost 1 - cosine(image, text); entries live in [0, 2]."""
    return 1.0 - cosine_similarity(images, texts)


def _marginal_error(plan: np.ndarray) -> float:
    n, m = plan.shape
    row_err = np.abs(plan.sum(axis=1) - 1.0 / n).max()
    col_err = np.abs(plan.sum(axis=0) - 1.0 / m).max()
    return float(max(row_err, col_err))


def _sinkhorn_log(cost: np.ndarray, cfg: SinkhornConfig):
    n, m = cost.shape
    log_row = -np.log(n)
    log_col = -np.log(m)
    kernel = -cost / cfg.epsilon
    col_pot = np.zeros(m)
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        # row projection first: rows become exact up to rounding
        row_pot = log_row - logsumexp(kernel + col_pot[None, :], axis=1)
        plan = np.exp(kernel + row_pot[:, None] + col_pot[None, :])
        if _marginal_error(plan) <= cfg.marginal_tol:
            return plan, iterations
        col_pot = log_col - logsumexp(kernel + row_pot[:, None], axis=0)
    # out of budget: report the best iterate after a final row projection
    row_pot = log_row - logsumexp(kernel + col_pot[None, :], axis=1)
    plan = np.exp(kernel + row_pot[:, None] + col_pot[None, :])
    return plan, iterations


def _sinkhorn_scaling(cost: np.ndarray, cfg: SinkhornConfig):
    n, m = cost.shape
    kernel = np.exp(-cost / cfg.epsilon)
    if not np.isfinite(kernel).all() or (kernel.sum(axis=1) == 0).any():
        raise NumericalStabilityError(
            f"exp(-cost/epsilon) under/overflowed at epsilon={cfg.epsilon}; "
            "enable log_domain mode"
        )
    row_target = 1.0 / n
    col_target = 1.0 / m
    col_scale = np.ones(m)
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        denom = kernel @ col_scale
        if (denom == 0).any() or not np.isfinite(denom).all():
            raise NumericalStabilityError(
                "Sinkhorn scaling factors left the representable range; enable log_domain mode"
            )
        row_scale = row_target / denom
        plan = row_scale[:, None] * kernel * col_scale[None, :]
        if _marginal_error(plan) <= cfg.marginal_tol:
            return plan, iterations
        denom = kernel.T @ row_scale
        if (denom == 0).any() or not np.isfinite(denom).all():
            raise NumericalStabilityError(
                "Sinkhorn scaling factors left the representable range; enable log_domain mode"
            )
        col_scale = col_target / denom
    row_scale = row_target / (kernel @ col_scale)
    plan = row_scale[:, None] * kernel * col_scale[None, :]
    return plan, iterations


def sinkhorn(cost, cfg: SinkhornConfig = SinkhornConfig()) -> TransportPlan:
    """Solve entropic OT by alternate marginal scaling.

    Rows are scaled first within each iteration and the returned plan
    always follows a row projection, so row marginals are exact and the
    reported ``marginal_error`` is dominated by the column residual.
    When the budget runs out the best iterate is returned with its error.
    """
    cost = as_float_matrix(cost, "cost")
    solver = _sinkhorn_log if cfg.log_domain else _sinkhorn_scaling
    plan, iterations = solver(cost, cfg)
    return TransportPlan(
        values=plan,
        epsilon=cfg.epsilon,
        iterations_used=iterations,
        marginal_error=_marginal_error(plan),
    )


def counterpart(images, texts, plan: TransportPlan, sims, normalize_output: bool = True):
    """Per-image text counterpart: sum_j plan[i,j] * sim[i,j] * text[j].

    The raw vectors have magnitude on the order of 1/N because plan mass
    is spread over all texts; by default each row is L2-normalized so the
    counterpart is scale-compatible with the other modalities. A zero raw
    row means the plan and similarities cancelled entirely and is an error.
    """
    images = as_float_matrix(images, "images")
    texts = as_float_matrix(texts, "texts")
    sims = as_float_matrix(sims, "sims")
    values = plan.values
    expected = (images.shape[0], texts.shape[0])
    if values.shape != expected:
        raise ValueError(f"plan shape {values.shape} does not match (images, texts) {expected}")
    if sims.shape != expected:
        raise ValueError(f"sims shape {sims.shape} does not match (images, texts) {expected}")
    raw = (values * sims) @ texts
    norms = np.linalg.norm(raw, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(
            f"counterpart for instance {int(zero[0])} is the zero vector "
            "(degenerate transport plan or similarities)"
        )
    if normalize_output:
        return l2_normalize(raw)
    return raw


def softmax_counterpart(images, texts, temperature: float = 1.0):
    """Similarity-softmax aggregation baseline.

    Weights are softmax over texts of sim/temperature, so each image's
    weights sum to 1. Returns (counterparts, weights). Temperature 1
    reproduces plain exp(similarity) weighting.
    """
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    images = as_float_matrix(images, "images")
    texts = as_float_matrix(texts, "texts")
    check_same_dim(images, texts, "images", "texts")
    sims = cosine_similarity(images, texts)
    scores = sims / temperature
    scores -= scores.max(axis=1, keepdims=True)
    weights = np.exp(scores)
    weights /= weights.sum(axis=1, keepdims=True)
    return weights @ texts, weights


def transport_cost(plan_or_weights, cost) -> float:
    """Frobenius inner product of a nonnegative coupling with the cost.

    For a mass-1 comparison against a transport plan, divide row-stochastic
    softmax weights by the number of rows before calling.
    """
    values = plan_or_weights.values if isinstance(plan_or_weights, TransportPlan) else None
    if values is None:
        values = as_float_matrix(plan_or_weights, "plan_or_weights")
    cost = as_float_matrix(cost, "cost")
    if values.shape != cost.shape:
        raise ValueError(f"shape mismatch: plan {values.shape} vs cost {cost.shape}")
    if (values < 0).any():
        raise ValueError("plan entries must be nonnegative")
    return float((values * cost).sum())


def save_transport_plan(plan: TransportPlan, path) -> None:
    """Dump a plan as an EMB1 matrix plus a text sidecar with solver stats."""
    from .store import EmbeddingMatrix, save_embeddings

    save_embeddings(EmbeddingMatrix(plan.values, "fused"), path)
    sidecar = f"{path}.meta"
    with open(sidecar, "w") as fh:
        fh.write(f"epsilon = {plan.epsilon!r}\n")
        fh.write(f"iterations_used = {plan.iterations_used}\n")
        fh.write(f"marginal_error = {plan.marginal_error!r}\n")

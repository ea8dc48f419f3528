"""Clustering evaluation: NMI, Hungarian-matched accuracy, and ARI.

All three are computed from the contingency table and are invariant to
relabeling on either side. Entropies use natural logs; the normalization
cancels the base.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .validation import as_label_vector

NMI_VARIANTS = ("arithmetic", "geometric", "min", "max")


@dataclass(frozen=True)
class MetricReport:
    nmi: float
    acc: float
    ari: float

    def as_dict(self) -> dict:
        return {"nmi": self.nmi, "acc": self.acc, "ari": self.ari}


def _checked_pair(y_true, y_pred):
    t = as_label_vector(y_true, "y_true")
    p = as_label_vector(y_pred, "y_pred")
    if t.size != p.size:
        raise ValueError(f"length mismatch: y_true has {t.size} labels, y_pred has {p.size}")
    return t, p


def contingency(y_true, y_pred) -> np.ndarray:
    """Counts[a][b] = number of samples with true class a and predicted cluster b.

    Rows/columns follow the sorted distinct labels of each side.
    """
    t, p = _checked_pair(y_true, y_pred)
    _, ti = np.unique(t, return_inverse=True)
    _, pi = np.unique(p, return_inverse=True)
    table = np.zeros((ti.max() + 1, pi.max() + 1), dtype=np.int64)
    np.add.at(table, (ti, pi), 1)
    return table


def _entropy(counts_1d: np.ndarray, n: int) -> float:
    probs = counts_1d[counts_1d > 0] / n
    return float(-(probs * np.log(probs)).sum())


def _mutual_information(table: np.ndarray, n: int) -> float:
    idx_a, idx_b = np.nonzero(table)
    pab = table[idx_a, idx_b] / n
    pa = table.sum(axis=1)[idx_a] / n
    pb = table.sum(axis=0)[idx_b] / n
    return float((pab * (np.log(pab) - np.log(pa) - np.log(pb))).sum())


def nmi(y_true, y_pred, average: str = "arithmetic") -> float:
    """Normalized mutual information in [0, 1].

    ``average`` picks the entropy normalizer (arithmetic mean by default;
    geometric/min/max selectable so numbers can be compared against
    conventions that differ between papers). Returns 0 when either side is
    a single cluster, with 0/0 -> 0.
    """
    if average not in NMI_VARIANTS:
        raise ValueError(f"average must be one of {NMI_VARIANTS}, got {average!r}")
    table = contingency(y_true, y_pred)
    n = int(table.sum())
    h_true = _entropy(table.sum(axis=1), n)
    h_pred = _entropy(table.sum(axis=0), n)
    mi = _mutual_information(table, n)
    if average == "arithmetic":
        normalizer = 0.5 * (h_true + h_pred)
    elif average == "geometric":
        normalizer = np.sqrt(h_true * h_pred)
    elif average == "min":
        normalizer = min(h_true, h_pred)
    else:
        normalizer = max(h_true, h_pred)
    if normalizer <= 0.0 or mi <= 0.0:
        return 0.0
    return float(min(mi / normalizer, 1.0))


def accuracy(y_true, y_pred) -> float:
    """Best-match accuracy over injective cluster-to-class mappings.

    Solved as a rectangular assignment problem on the contingency table,
    so predicted cluster count may differ from the true class count.
    """
    table = contingency(y_true, y_pred)
    row_ind, col_ind = linear_sum_assignment(table, maximize=True)
    return float(table[row_ind, col_ind].sum() / table.sum())


def ari(y_true, y_pred) -> float:
    """Adjusted Rand index: 1 on identical partitions, ~0 for independent ones."""
    t, p = _checked_pair(y_true, y_pred)
    if t.size < 2:
        raise ValueError("ari requires at least 2 samples")
    table = contingency(t, p)
    n = t.size

    def comb2(v):
        return v * (v - 1) / 2.0

    sum_ij = comb2(table.astype(np.float64)).sum()
    sum_a = comb2(table.sum(axis=1).astype(np.float64)).sum()
    sum_b = comb2(table.sum(axis=0).astype(np.float64)).sum()
    total = comb2(float(n))
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        # both partitions degenerate in the same way (all-singletons or single cluster)
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))


def evaluate(y_true, y_pred, nmi_average: str = "arithmetic") -> MetricReport:
    return MetricReport(
        nmi=nmi(y_true, y_pred, average=nmi_average),
        acc=accuracy(y_true, y_pred),
        ari=ari(y_true, y_pred),
    )


def format_report(report: MetricReport) -> str:
    """Fixed-width table for terminal output."""
    lines = [f"{'metric':<8}{'value':>10}", "-" * 18]
    for name, value in report.as_dict().items():
        lines.append(f"{name:<8}{value:>10.4f}")
    return "\n".join(lines)

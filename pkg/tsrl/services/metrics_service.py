"""Binary-classification metrics on real-valued scores (higher means class 1)."""
from __future__ import annotations

import numpy as np

from tsrl.core.errors import RejectedInput, UndefinedMetric
from tsrl.schemas.task_schema import MetricSet


def _split_scores(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise RejectedInput(f"scores {scores.shape} and labels {labels.shape} must be equal-length vectors")
    pos, neg = scores[labels == 1], scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise UndefinedMetric("metric needs both classes present in the labels")
    return pos, neg


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    order = np.argsort(values, kind="mergesort")
    _, first, counts = np.unique(values[order], return_index=True, return_counts=True)
    ranks = np.empty(values.shape[0])
    ranks[order] = np.repeat(first + (counts + 1) / 2.0, counts)
    return ranks


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) with ties counted 1/2."""
    pos, neg = _split_scores(scores, labels)
    ranks = _average_ranks(np.concatenate([pos, neg]))
    u = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def accuracy(scores, labels, threshold: float = 0.5) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise RejectedInput(f"scores {scores.shape} and labels {labels.shape} must have equal shapes")
    if scores.size == 0:
        return float("nan")
    return float(np.mean((scores > threshold).astype(np.int64) == labels))


def roc_rates(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """False-positive and false-negative rates, thresholds swept high to low.

    The first point is the empty acceptance set (FPR 0, FNR 1); a sample is
    called positive when its score is at or above the threshold.
    """
    pos, neg = _split_scores(scores, labels)
    thresholds = np.unique(np.concatenate([pos, neg]))[::-1]
    pos_sorted, neg_sorted = np.sort(pos), np.sort(neg)
    fn = np.searchsorted(pos_sorted, thresholds, side="left")
    fp = neg.size - np.searchsorted(neg_sorted, thresholds, side="left")
    fpr = np.concatenate([[0.0], fp / neg.size])
    fnr = np.concatenate([[1.0], fn / pos.size])
    return fpr, fnr


def eer(scores, labels) -> float:
    """Rate where FPR and FNR cross, linearly interpolated between ROC points."""
    fpr, fnr = roc_rates(scores, labels)
    gap = fpr - fnr
    k = int(np.argmax(gap >= 0.0))
    if gap[k] == 0.0:
        return float(fpr[k])
    a, b = gap[k - 1], gap[k]
    t = a / (a - b)
    return float(fpr[k - 1] + t * (fpr[k] - fpr[k - 1]))


def metric_set(scores, labels) -> MetricSet:
    return MetricSet(
        auc=auc(scores, labels),
        acc=accuracy(scores, labels),
        eer=eer(scores, labels),
        n=int(np.asarray(labels).shape[0]),
    )

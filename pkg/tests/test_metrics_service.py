import numpy as np
import pytest

from tsrl.core.errors import UndefinedMetric
from tsrl.services.metrics_service import accuracy, auc, eer, metric_set


def _pairwise_auc(scores, labels) -> float:
    pos, neg = scores[labels == 1], scores[labels == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (pos.size * neg.size)


def _sweep_eer(scores, labels) -> float:
    """Walks every threshold from high to low with explicit counting loops."""
    thresholds = [np.inf] + sorted(set(scores.tolist()), reverse=True)
    n_pos, n_neg = int(np.sum(labels == 1)), int(np.sum(labels == 0))
    rates = []
    for t in thresholds:
        fp = sum(1 for s, y in zip(scores, labels) if y == 0 and s >= t)
        fn = sum(1 for s, y in zip(scores, labels) if y == 1 and s < t)
        rates.append((fp / n_neg, fn / n_pos))
    for (f0, n0), (f1, n1) in zip(rates, rates[1:]):
        g0, g1 = f0 - n0, f1 - n1
        if g1 == 0.0:
            return f1
        if g0 < 0.0 < g1:
            return f0 + g0 / (g0 - g1) * (f1 - f0)
    raise AssertionError("rates never crossed")


def _grid_eer(scores, labels, n_thresholds=100_000) -> float:
    """Reads FPR and FNR off a fixed grid of thresholds from high to low.

    Grid points sit at half-steps, so scores on a coarser grid inside (0, 1)
    never coincide with a threshold and every ROC point is visited.
    """
    grid = (np.arange(n_thresholds, -1, -1) + 0.5) / n_thresholds
    neg, pos = np.sort(scores[labels == 0]), np.sort(scores[labels == 1])
    fpr = (neg.size - np.searchsorted(neg, grid, side="left")) / neg.size
    fnr = np.searchsorted(pos, grid, side="left") / pos.size
    gap = fpr - fnr
    k = int(np.argmax(gap >= 0.0))
    if gap[k] == 0.0:
        return float(fpr[k])
    a, b = gap[k - 1], gap[k]
    return float(fpr[k - 1] + a / (a - b) * (fpr[k] - fpr[k - 1]))


def _random_case(rng):
    n = int(rng.integers(2, 51))
    labels = rng.integers(0, 2, size=n)
    labels[0], labels[1] = 0, 1
    scores = rng.uniform(0, 1, size=n)
    if rng.uniform() < 0.5:
        scores = np.round(scores, 1)
    return scores, labels


def test_perfect_separation():
    scores, labels = np.array([0.1, 0.2, 0.8, 0.9]), np.array([0, 0, 1, 1])
    assert auc(scores, labels) == 1.0
    assert eer(scores, labels) == 0.0
    assert accuracy(scores, labels) == 1.0


def test_all_equal_scores():
    scores, labels = np.full(6, 0.3), np.array([0, 1, 0, 1, 1, 0])
    assert auc(scores, labels) == 0.5
    assert eer(scores, labels) == pytest.approx(0.5)


def test_auc_matches_pairwise_oracle(rng):
    for _ in range(200):
        scores, labels = _random_case(rng)
        assert auc(scores, labels) == _pairwise_auc(scores, labels)


def test_eer_matches_threshold_sweep(rng):
    for _ in range(200):
        scores, labels = _random_case(rng)
        assert eer(scores, labels) == pytest.approx(_sweep_eer(scores, labels), abs=1e-9)


def test_eer_matches_dense_threshold_grid(rng):
    for _ in range(200):
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, size=n)
        labels[0], labels[1] = 0, 1
        if rng.uniform() < 0.5:
            scores = rng.integers(1, 1000, size=n) / 1000.0
        else:
            scores = rng.integers(1, 10, size=n) / 10.0
        assert eer(scores, labels) == pytest.approx(_grid_eer(scores, labels), abs=1e-9)


def test_auc_invariant_under_monotone_transform(rng):
    scores, labels = rng.standard_normal(40), rng.integers(0, 2, 40)
    labels[:2] = [0, 1]
    assert auc(np.exp(3 * scores) + 1, labels) == auc(scores, labels)


def test_auc_of_complemented_labels(rng):
    scores, labels = rng.standard_normal(30), rng.integers(0, 2, 30)
    labels[:2] = [0, 1]
    assert auc(scores, labels) + auc(scores, 1 - labels) == pytest.approx(1.0, abs=1e-12)


def test_eer_below_half_on_informative_scores(rng):
    for _ in range(50):
        labels = rng.integers(0, 2, 60)
        labels[:2] = [0, 1]
        scores = rng.standard_normal(60) + 2.0 * labels
        assert auc(scores, labels) >= 0.5
        assert eer(scores, labels) <= 0.5


def test_accuracy_matches_loop_oracle(rng):
    scores, labels = rng.uniform(0, 1, 100), rng.integers(0, 2, 100)
    expected = sum(1 for s, y in zip(scores, labels) if (1 if s > 0.5 else 0) == y) / 100
    assert accuracy(scores, labels) == expected
    assert accuracy(scores, 1 - labels) == pytest.approx(1 - expected)


@pytest.mark.parametrize("metric", [auc, eer, metric_set])
def test_single_class_is_undefined(metric):
    with pytest.raises(UndefinedMetric):
        metric(np.array([0.2, 0.4]), np.array([1, 1]))


def test_metric_set_bundles_all_three():
    result = metric_set(np.array([0.1, 0.9, 0.4, 0.6]), np.array([0, 1, 0, 1]))
    assert result.model_dump() == {"auc": 1.0, "acc": 1.0, "eer": 0.0, "n": 4}

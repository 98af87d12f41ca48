"""Synthetic two-class task with easy, hard and noisy samples plus a shifted test split.

Geometry, along the first input axis ("margin axis"):
  easy   class centres at +-margin/2, spread 0.6; other axes standard normal
  hard   inside a band of width ``hard_band`` around a sinusoidal boundary in
         the first two axes, so they need the hidden layers to be separated
  noise  easy-region points with the label flipped
The shifted split rotates the test geometry in the first two axes and
translates it.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from tsrl.schemas.config_schema import TaskSpec
from tsrl.schemas.imports import Difficulty
from tsrl.schemas.task_schema import LabeledDataset, TaskSplits

logger = logging.getLogger(__name__)

EASY_SPREAD = 0.6
BOUNDARY_FREQ = 1.5


def split_counts(n: int, fractions: list[float]) -> list[int]:
    """Integer counts summing to ``n``; remainders go to the largest fractional parts."""
    raw = [n * f for f in fractions]
    counts = [math.floor(r) for r in raw]
    leftovers = sorted(range(len(raw)), key=lambda i: raw[i] - counts[i], reverse=True)
    for i in leftovers[: n - sum(counts)]:
        counts[i] += 1
    return counts


def _boundary(x1: np.ndarray, spec: TaskSpec) -> np.ndarray:
    return 0.5 * spec.hard_band * np.sin(BOUNDARY_FREQ * x1)


def _sample(rng: np.random.Generator, kinds: np.ndarray, spec: TaskSpec) -> tuple[np.ndarray, np.ndarray]:
    n = kinds.shape[0]
    labels = rng.integers(0, 2, size=n)
    sign = 2.0 * labels - 1.0
    x = rng.standard_normal((n, spec.input_dim))

    easy_t = sign * spec.margin / 2.0 + EASY_SPREAD * rng.standard_normal(n)
    offset = rng.uniform(0.05, 1.0, size=n) * spec.hard_band / 2.0
    hard_t = _boundary(x[:, 1], spec) + sign * offset

    x[:, 0] = np.where(kinds == Difficulty.HARD.value, hard_t, easy_t)
    labels = np.where(kinds == Difficulty.NOISE.value, 1 - labels, labels)
    return x, labels.astype(np.int64)


def shift_inputs(inputs: np.ndarray, spec: TaskSpec) -> np.ndarray:
    c, s = math.cos(spec.shift_angle), math.sin(spec.shift_angle)
    shifted = inputs.copy()
    shifted[:, 0] = c * inputs[:, 0] - s * inputs[:, 1]
    shifted[:, 1] = s * inputs[:, 0] + c * inputs[:, 1]
    return shifted + spec.translation_vector()


def generate_task(spec: TaskSpec, seed: int | None = None) -> TaskSplits:
    """Train, in-distribution test and shifted test splits; deterministic in the seed."""
    seed = spec.seed if seed is None else seed
    train_rng, test_rng = [np.random.default_rng(s) for s in np.random.SeedSequence(seed or 0).spawn(2)]

    counts = split_counts(spec.n_train, [spec.easy_fraction, spec.hard_fraction, spec.noise_fraction])
    kinds = np.repeat([d.value for d in Difficulty], counts)
    kinds = kinds[train_rng.permutation(spec.n_train)]
    x_train, y_train = _sample(train_rng, kinds, spec)

    clean = spec.easy_fraction + spec.hard_fraction
    test_fractions = [spec.easy_fraction / clean, spec.hard_fraction / clean] if clean > 0 else [1.0, 0.0]
    test_counts = split_counts(spec.n_test, test_fractions)
    test_kinds = np.repeat([Difficulty.EASY.value, Difficulty.HARD.value], test_counts)
    test_kinds = test_kinds[test_rng.permutation(spec.n_test)]
    x_test, y_test = _sample(test_rng, test_kinds, spec)

    logger.debug("generated task seed=%s counts easy/hard/noise=%s", seed, counts)
    return TaskSplits(
        train=LabeledDataset(inputs=x_train, labels=y_train, tags=kinds),
        test_in=LabeledDataset(inputs=x_test, labels=y_test),
        test_shift=LabeledDataset(inputs=shift_inputs(x_test, spec), labels=y_test.copy()),
    )

import math

import numpy as np
import pytest
from pydantic import ValidationError

from tsrl.schemas.config_schema import TaskSpec
from tsrl.schemas.imports import Difficulty
from tsrl.services.task_service import generate_task, shift_inputs, split_counts


def test_split_counts_sum_to_total():
    assert split_counts(2000, [0.65, 0.25, 0.10]) == [1300, 500, 200]
    assert sum(split_counts(7, [0.5, 0.3, 0.2])) == 7
    assert split_counts(3, [1 / 3, 1 / 3, 1 / 3]) == [1, 1, 1]


def test_tags_partition_training_set():
    spec = TaskSpec(n_train=1000, n_test=200)
    splits = generate_task(spec, seed=0)
    counts = {tag: int(splits.train.tag_mask(tag).sum()) for tag in Difficulty}
    assert counts == {Difficulty.EASY: 650, Difficulty.HARD: 250, Difficulty.NOISE: 100}
    assert splits.test_in.tags is None
    assert splits.test_shift.tags is None
    assert len(splits.test_in) == len(splits.test_shift) == 200


def test_generation_is_seed_deterministic():
    spec = TaskSpec(n_train=300, n_test=100)
    a, b = generate_task(spec, seed=11), generate_task(spec, seed=11)
    assert np.array_equal(a.train.inputs, b.train.inputs)
    assert np.array_equal(a.train.labels, b.train.labels)
    assert np.array_equal(a.test_shift.inputs, b.test_shift.inputs)
    assert not np.array_equal(a.train.inputs, generate_task(spec, seed=12).train.inputs)


def test_spec_seed_is_used_when_none_given():
    spec = TaskSpec(n_train=50, n_test=20, seed=5)
    assert np.array_equal(generate_task(spec).train.inputs, generate_task(spec, seed=5).train.inputs)


def test_identity_shift_reproduces_test_split():
    spec = TaskSpec(n_train=100, n_test=100, shift_angle=0.0, shift_translation=0.0)
    splits = generate_task(spec, seed=3)
    assert np.array_equal(splits.test_in.inputs, splits.test_shift.inputs)
    assert np.array_equal(splits.test_in.labels, splits.test_shift.labels)


def test_shift_rotates_first_two_axes_and_translates():
    spec = TaskSpec(input_dim=3, shift_angle=math.pi / 2, shift_translation=[1.0, 0.0, -1.0])
    shifted = shift_inputs(np.array([[1.0, 0.0, 2.0]]), spec)
    np.testing.assert_allclose(shifted, [[1.0, 1.0, 1.0]], atol=1e-12)


def test_clean_large_margin_task_is_linearly_separable():
    spec = TaskSpec(n_train=1000, n_test=100, easy_fraction=1.0, hard_fraction=0.0, noise_fraction=0.0, margin=8.0)
    train = generate_task(spec, seed=0).train
    probe = (train.inputs[:, 0] > 0).astype(np.int64)
    assert np.mean(probe == train.labels) >= 0.99


def test_noise_samples_sit_on_the_wrong_side():
    spec = TaskSpec(n_train=2000, n_test=100, margin=8.0)
    train = generate_task(spec, seed=1).train
    noise = train.tag_mask(Difficulty.NOISE)
    margin_side = (train.inputs[noise, 0] > 0).astype(np.int64)
    assert np.mean(margin_side != train.labels[noise]) > 0.99


def test_hard_samples_lie_in_the_band():
    spec = TaskSpec(n_train=1000, n_test=100)
    train = generate_task(spec, seed=2).train
    hard = train.tag_mask(Difficulty.HARD)
    boundary = 0.5 * spec.hard_band * np.sin(1.5 * train.inputs[hard, 1])
    assert np.all(np.abs(train.inputs[hard, 0] - boundary) <= spec.hard_band / 2 + 1e-12)


def test_fractions_must_sum_to_one():
    with pytest.raises(ValidationError):
        TaskSpec(easy_fraction=0.5, hard_fraction=0.25, noise_fraction=0.1)

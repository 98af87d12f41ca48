import numpy as np
import pytest

from tsrl.core.errors import ContractViolation
from tsrl.schemas.config_schema import RewardConfig
from tsrl.schemas.reward_schema import SampleTransition
from tsrl.schemas.student_schema import EvalSnapshot
from tsrl.services.reward_service import compute_reward, compute_rewards, reward_table


def _reward(correct_init, conf_init, correct_upd, conf_upd, c_rew=0.5):
    transition = SampleTransition(
        correct_init=correct_init, conf_init=conf_init, correct_upd=correct_upd, conf_upd=conf_upd
    )
    return compute_reward(transition, RewardConfig(c_rew=c_rew))


@pytest.mark.parametrize("conf_init, conf_upd", [(0.1, 0.9), (0.45, 0.55), (0.3, 0.2)])
def test_error_to_correct_is_plus_one(conf_init, conf_upd):
    assert _reward(False, conf_init, True, conf_upd) == 1.0


@pytest.mark.parametrize("conf_init, conf_upd", [(0.9, 0.1), (0.55, 0.45)])
def test_correct_to_error_is_minus_one(conf_init, conf_upd):
    assert _reward(True, conf_init, False, conf_upd) == -1.0


def test_correct_stay_rewards_confidence_gain():
    assert _reward(True, 0.6, True, 0.8) == pytest.approx(0.1, abs=1e-12)


def test_error_stay_penalises_rising_confidence():
    assert _reward(False, 0.2, False, 0.4) == pytest.approx(-0.1, abs=1e-12)


def test_no_change_gives_zero():
    assert _reward(True, 0.7, True, 0.7) == 0.0
    assert _reward(False, 0.3, False, 0.3) == 0.0


def test_out_of_range_confidence_is_rejected():
    with pytest.raises(ContractViolation):
        _reward(True, 1.2, True, 0.5)


def test_reward_table_sweep(rng):
    n = 10_000
    conf_init, conf_upd = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
    c_rew = rng.uniform(1e-3, 1.0, n)
    correct_init = rng.integers(0, 2, n).astype(bool)
    correct_upd = rng.integers(0, 2, n).astype(bool)

    rewards = np.array(
        [reward_table(correct_init[i], conf_init[i], correct_upd[i], conf_upd[i], c_rew[i]) for i in range(n)]
    )
    delta = c_rew * (conf_upd - conf_init)
    expected = np.where(
        correct_init & correct_upd, delta, np.where(~correct_init & ~correct_upd, -delta, 0.0)
    )
    expected = np.where(~correct_init & correct_upd, 1.0, expected)
    expected = np.where(correct_init & ~correct_upd, -1.0, expected)

    flips = correct_init != correct_upd
    assert np.array_equal(rewards[flips], expected[flips])
    np.testing.assert_allclose(rewards[~flips], expected[~flips], rtol=0, atol=1e-12)
    assert np.all(np.abs(rewards) <= 1.0)
    assert np.all(rewards[correct_init & correct_upd] <= c_rew[correct_init & correct_upd])


def test_stay_cases_are_antisymmetric(rng):
    for d_init, d_upd in rng.uniform(0, 1, size=(50, 2)):
        assert _reward(True, d_init, True, d_upd) == pytest.approx(-_reward(False, d_init, False, d_upd), abs=1e-15)


def test_compute_rewards_over_snapshots():
    before = EvalSnapshot(
        correct=np.array([False, True, True, False]),
        confidence=np.array([0.4, 0.8, 0.6, 0.2]),
        loss=np.zeros(4),
    )
    after = EvalSnapshot(
        correct=np.array([True, False, True, False]),
        confidence=np.array([0.6, 0.3, 0.8, 0.4]),
        loss=np.zeros(4),
    )
    np.testing.assert_allclose(compute_rewards(before, after, RewardConfig()), [1.0, -1.0, 0.1, -0.1], atol=1e-12)


def test_snapshot_lengths_must_match():
    snap = EvalSnapshot(correct=np.ones(2, dtype=bool), confidence=np.ones(2), loss=np.zeros(2))
    short = EvalSnapshot(correct=np.ones(1, dtype=bool), confidence=np.ones(1), loss=np.zeros(1))
    with pytest.raises(ContractViolation):
        compute_rewards(snap, short, RewardConfig())

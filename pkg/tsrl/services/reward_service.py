"""State-change reward for one weighted Student update.

    error   -> correct : +1
    correct -> error   : -1
    correct -> correct : +c_rew * (conf_upd - conf_init)
    error   -> error   : -c_rew * (conf_upd - conf_init)

Confidence is the true-class probability on both sides.
"""
from __future__ import annotations

import numpy as np

from tsrl.core.errors import ContractViolation
from tsrl.schemas.config_schema import RewardConfig
from tsrl.schemas.reward_schema import SampleTransition
from tsrl.schemas.student_schema import EvalSnapshot


def _check_confidence(*values: np.ndarray) -> None:
    for v in values:
        if not np.all(np.isfinite(v)) or np.any(v < 0.0) or np.any(v > 1.0):
            raise ContractViolation("confidences must lie in [0, 1]")


def reward_table(correct_init, conf_init, correct_upd, conf_upd, c_rew: float) -> np.ndarray:
    correct_init = np.asarray(correct_init, dtype=bool)
    correct_upd = np.asarray(correct_upd, dtype=bool)
    conf_init = np.asarray(conf_init, dtype=np.float64)
    conf_upd = np.asarray(conf_upd, dtype=np.float64)
    _check_confidence(conf_init, conf_upd)

    delta = c_rew * (conf_upd - conf_init)
    return np.select(
        [~correct_init & correct_upd, correct_init & ~correct_upd, correct_init & correct_upd],
        [1.0, -1.0, delta],
        default=-delta,
    )


def compute_reward(t: SampleTransition, cfg: RewardConfig) -> float:
    return float(reward_table(t.correct_init, t.conf_init, t.correct_upd, t.conf_upd, cfg.c_rew))


def compute_rewards(before: EvalSnapshot, after: EvalSnapshot, cfg: RewardConfig) -> np.ndarray:
    """Per-sample rewards for snapshots bracketing one optimizer step."""
    if len(before) != len(after):
        raise ContractViolation("before/after snapshots must cover the same samples")
    return reward_table(before.correct, before.confidence, after.correct, after.confidence, cfg.c_rew)

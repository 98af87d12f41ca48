"""State manager: longitudinal per-sample history and Tutor state assembly.

Records are updated once per epoch. The registry keeps its columns as numpy
arrays so a whole epoch folds in with one call; ``record``/``records`` give the
SampleRecord view of the same data.
"""
from __future__ import annotations

import logging
from typing import Iterable

import numpy as np

from tsrl.core.errors import ContractViolation
from tsrl.schemas.config_schema import StateConfig
from tsrl.schemas.imports import ForgetDefinition
from tsrl.schemas.state_schema import SampleRecord, TutorState
from tsrl.schemas.student_schema import StudentOutput

logger = logging.getLogger(__name__)

STATE_EXTRA_DIMS = 5  # confidence, 2-dim one-hot, ema norm, forget norm
_UNSET = -1


def _forget_events(last_correct: np.ndarray, correct: np.ndarray, definition: ForgetDefinition) -> np.ndarray:
    """Boolean mask of forgetting events; ``last_correct`` uses -1 for unknown."""
    seen = last_correct != _UNSET
    was = last_correct == 1
    if definition == ForgetDefinition.CORRECT_TO_ERROR:
        return seen & was & ~correct
    if definition == ForgetDefinition.ERROR_TO_CORRECT:
        return seen & ~was & correct
    return seen & (was != correct)


class SampleRegistry:
    def __init__(self, n_samples: int):
        if n_samples <= 0:
            raise ContractViolation(f"registry needs at least one sample, got {n_samples}")
        self.ema_loss = np.full(n_samples, np.nan)
        self.forget_count = np.zeros(n_samples, dtype=np.int64)
        self.last_correct = np.full(n_samples, _UNSET, dtype=np.int8)
        self.epochs_observed = np.zeros(n_samples, dtype=np.int64)

    def __len__(self) -> int:
        return self.ema_loss.shape[0]

    @property
    def initialized(self) -> bool:
        return bool(np.all(self.epochs_observed > 0))

    def record(self, sample_id: int) -> SampleRecord:
        last = int(self.last_correct[sample_id])
        ema = float(self.ema_loss[sample_id])
        return SampleRecord(
            sample_id=sample_id,
            ema_loss=None if np.isnan(ema) else ema,
            forget_count=int(self.forget_count[sample_id]),
            last_correct=None if last == _UNSET else bool(last),
            epochs_observed=int(self.epochs_observed[sample_id]),
        )

    def records(self) -> list[SampleRecord]:
        return [self.record(i) for i in range(len(self))]

    def update_epoch(self, losses, correct, config: StateConfig) -> None:
        """Fold one epoch of per-sample CE and correctness into every record."""
        losses = np.asarray(losses, dtype=np.float64)
        correct = np.asarray(correct, dtype=bool)
        if losses.shape != (len(self),) or correct.shape != (len(self),):
            raise ContractViolation("epoch statistics must cover every sample exactly once")
        if not np.all(np.isfinite(losses)) or np.any(losses < 0):
            raise ContractViolation("epoch losses must be finite and non-negative")

        first = np.isnan(self.ema_loss)
        self.ema_loss = np.where(
            first, losses, config.beta * self.ema_loss + (1.0 - config.beta) * losses
        )
        self.forget_count += _forget_events(self.last_correct, correct, config.forget_definition)
        self.last_correct = correct.astype(np.int8)
        self.epochs_observed += 1


def init_registry(n_samples: int) -> SampleRegistry:
    return SampleRegistry(n_samples)


def update_after_epoch(record: SampleRecord, epoch_loss: float, correct: bool, config: StateConfig) -> SampleRecord:
    if not np.isfinite(epoch_loss) or epoch_loss < 0:
        raise ContractViolation(f"epoch loss must be finite and non-negative, got {epoch_loss}")

    if record.ema_loss is None:
        ema = float(epoch_loss)
    else:
        ema = config.beta * record.ema_loss + (1.0 - config.beta) * epoch_loss

    last = np.array([_UNSET if record.last_correct is None else int(record.last_correct)])
    event = bool(_forget_events(last, np.array([correct]), config.forget_definition)[0])
    return SampleRecord(
        sample_id=record.sample_id,
        ema_loss=ema,
        forget_count=record.forget_count + int(event),
        last_correct=bool(correct),
        epochs_observed=record.epochs_observed + 1,
    )


def correct_onehot(correct: np.ndarray) -> np.ndarray:
    """``[1, 0]`` for a correct prediction, ``[0, 1]`` for an error."""
    correct = np.asarray(correct, dtype=bool)
    return np.stack([correct, ~correct], axis=-1).astype(np.float64)


def normalize_history(ema_loss, forget_count, epochs_observed, config: StateConfig) -> tuple[np.ndarray, np.ndarray]:
    ema_norm = np.clip(np.asarray(ema_loss, dtype=np.float64) / config.ema_norm_cap, 0.0, 1.0)
    forget_norm = np.clip(
        np.asarray(forget_count, dtype=np.float64) / np.maximum(epochs_observed, 1), 0.0, 1.0
    )
    return ema_norm, forget_norm


def build_state(record: SampleRecord, output: StudentOutput, label: int, config: StateConfig) -> TutorState:
    """Tutor state of one sample; ``output`` holds that sample's forward result."""
    if not record.initialized:
        raise ContractViolation(f"sample {record.sample_id} has no history yet; run warmup first")
    probs = np.asarray(output.probabilities).reshape(-1)
    hidden = np.asarray(output.hidden).reshape(-1)
    predicted = int(np.argmax(probs))
    ema_norm, forget_norm = normalize_history(
        record.ema_loss, record.forget_count, record.epochs_observed, config
    )
    return TutorState(
        feature=hidden.astype(np.float64),
        confidence=float(probs[label]),
        correct_onehot=correct_onehot(predicted == label),
        ema_loss_norm=float(ema_norm),
        forget_norm=float(forget_norm),
    )


def build_states(
    registry: SampleRegistry,
    sample_ids,
    output: StudentOutput,
    labels,
    config: StateConfig,
) -> np.ndarray:
    """Row-stacked state vectors, same layout as ``TutorState.vector``."""
    sample_ids = np.asarray(sample_ids)
    if np.any(registry.epochs_observed[sample_ids] == 0):
        raise ContractViolation("states requested for samples with no history; run warmup first")
    labels = np.asarray(labels, dtype=np.int64)
    rows = np.arange(len(sample_ids))
    ema_norm, forget_norm = normalize_history(
        registry.ema_loss[sample_ids],
        registry.forget_count[sample_ids],
        registry.epochs_observed[sample_ids],
        config,
    )
    return np.column_stack(
        [
            output.hidden,
            output.probabilities[rows, labels],
            correct_onehot(output.predicted == labels),
            ema_norm,
            forget_norm,
        ]
    )


def hard_fraction(registry: SampleRegistry | Iterable[SampleRecord], config: StateConfig) -> float:
    """Share of samples whose raw EMA loss exceeds ``config.hard_threshold``."""
    if isinstance(registry, SampleRegistry):
        ema = registry.ema_loss
    else:
        ema = np.array([np.nan if r.ema_loss is None else r.ema_loss for r in registry], dtype=np.float64)
    if ema.size == 0 or np.any(np.isnan(ema)):
        raise ContractViolation("hard fraction needs every record initialised")
    return float(np.mean(ema > config.hard_threshold))

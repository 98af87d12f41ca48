from __future__ import annotations

from tsrl.schemas.imports import *


class StudentOutput(ArrayModel):
    logits: np.ndarray
    probabilities: np.ndarray
    hidden: np.ndarray
    predicted: np.ndarray
    # probability of the true class; only known when labels were supplied
    confidence: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.logits.shape[0]

    def select(self, index: np.ndarray) -> "StudentOutput":
        return StudentOutput(
            logits=self.logits[index],
            probabilities=self.probabilities[index],
            hidden=self.hidden[index],
            predicted=self.predicted[index],
            confidence=None if self.confidence is None else self.confidence[index],
        )


class StepReport(ArrayModel):
    loss: float
    grad_norm: float
    per_sample_loss: np.ndarray
    correct: np.ndarray
    confidence: np.ndarray
    updated: bool = True


class EvalSnapshot(ArrayModel):
    correct: np.ndarray
    confidence: np.ndarray
    loss: np.ndarray

    def __len__(self) -> int:
        return self.correct.shape[0]

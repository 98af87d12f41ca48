from __future__ import annotations

from tsrl.schemas.imports import *
from tsrl.schemas.state_schema import TutorState


class ActionSample(BaseModel):
    weight: float = Field(ge=0, le=1)
    logit: float
    log_prob: float
    value: float


class ActionBatch(ArrayModel):
    """Vectorised ActionSample for a batch of states."""

    weights: np.ndarray
    logits: np.ndarray
    log_probs: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return self.weights.shape[0]

    def sample(self, i: int) -> ActionSample:
        return ActionSample(
            weight=float(self.weights[i]),
            logit=float(self.logits[i]),
            log_prob=float(self.log_probs[i]),
            value=float(self.values[i]),
        )


class Experience(BaseModel):
    state: TutorState
    action: ActionSample
    reward: float = Field(ge=-1, le=1)
    done: bool = True


class BCReport(BaseModel):
    initial_mse: float
    final_mse: float
    holdout_mse: float
    n_train: int
    n_holdout: int
    steps: int


class PPOReport(BaseModel):
    mean_ratio: float
    clip_fraction: float
    actor_loss: float
    critic_loss: float
    entropy: float
    first_ratio_mean: float
    first_clip_fraction: float
    n_experiences: int
    gradient_steps: int

from __future__ import annotations

from tsrl.schemas.imports import *


class SampleRecord(BaseModel):
    sample_id: int = Field(ge=0)
    ema_loss: Optional[float] = None
    forget_count: int = Field(default=0, ge=0)
    last_correct: Optional[bool] = None
    epochs_observed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def consistent_history(self):
        if self.ema_loss is not None and self.ema_loss < 0:
            raise ValueError("ema_loss must be non-negative")
        if self.forget_count > self.epochs_observed:
            raise ValueError("forget_count cannot exceed epochs_observed")
        return self

    @property
    def initialized(self) -> bool:
        return self.ema_loss is not None


class TutorState(ArrayModel):
    feature: np.ndarray
    confidence: float = Field(ge=0, le=1)
    correct_onehot: np.ndarray
    ema_loss_norm: float = Field(ge=0, le=1)
    forget_norm: float = Field(ge=0, le=1)

    @model_validator(mode="after")
    def onehot_is_valid(self):
        onehot = np.asarray(self.correct_onehot)
        if onehot.shape != (2,) or set(onehot.tolist()) - {0.0, 1.0} or onehot.sum() != 1:
            raise ValueError(f"correct_onehot must be a 2-dim one-hot, got {onehot}")
        return self

    @property
    def dim(self) -> int:
        return self.feature.shape[0] + 5

    def vector(self) -> np.ndarray:
        return np.concatenate(
            [
                np.asarray(self.feature, dtype=np.float64),
                [self.confidence],
                np.asarray(self.correct_onehot, dtype=np.float64),
                [self.ema_loss_norm, self.forget_norm],
            ]
        )

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "TutorState":
        vec = np.asarray(vec, dtype=np.float64)
        return cls(
            feature=vec[:-5],
            confidence=float(vec[-5]),
            correct_onehot=vec[-4:-2],
            ema_loss_norm=float(vec[-2]),
            forget_norm=float(vec[-1]),
        )

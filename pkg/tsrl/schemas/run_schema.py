from __future__ import annotations

from tsrl.schemas.config_schema import RunConfig
from tsrl.schemas.imports import *
from tsrl.schemas.task_schema import MetricSet, TaskSplits
from tsrl.schemas.tutor_schema import BCReport


class EpochRow(BaseModel):
    epoch: int = Field(ge=1)
    phase: str
    train_loss: float
    in_auc: float = Field(ge=0, le=1)
    in_acc: float = Field(ge=0, le=1)
    in_eer: float = Field(ge=0, le=1)
    shift_auc: float = Field(ge=0, le=1)
    shift_acc: float = Field(ge=0, le=1)
    shift_eer: float = Field(ge=0, le=1)
    hard_fraction: float = Field(ge=0, le=1)
    mean_weight: float = Field(ge=0, le=1)
    mean_reward: Optional[float] = None
    clip_fraction: Optional[float] = None
    weight_easy: Optional[float] = None
    weight_hard: Optional[float] = None
    weight_noise: Optional[float] = None

    @classmethod
    def columns(cls) -> list[str]:
        return list(cls.model_fields)


class PhaseBoundaries(BaseModel):
    warmup_first: int
    warmup_last: int
    bc_after_epoch: Optional[int]
    main_first: int
    main_last: int


class RunSummary(BaseModel):
    mode: RunMode
    seed: int
    task_seed: int
    phases: PhaseBoundaries
    final_in: MetricSet
    final_shift: MetricSet
    final_hard_fraction: float
    ppo_updates: int
    bc_updates: int
    bc: Optional[BCReport] = None
    config: dict[str, Any]


class RunArtifacts(ArrayModel):
    config: RunConfig
    rows: List[EpochRow]
    step_losses: List[float]
    summary: RunSummary
    student: Any
    policy: Any = None
    splits: Optional[TaskSplits] = None

from __future__ import annotations

from pydantic import ValidationError

from tsrl.core.errors import ConfigError
from tsrl.schemas.imports import *


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class StudentConfig(StrictModel):
    hidden_sizes: List[int] = Field(default_factory=lambda: [32, 32])
    activation: str = "relu"
    optimizer: str = "adam"
    lr: float = Field(default=1e-3, gt=0)

    @field_validator("hidden_sizes")
    @classmethod
    def at_least_one_hidden(cls, v):
        if not v or any(h <= 0 for h in v):
            raise ValueError("hidden_sizes needs at least one positive width")
        return v

    @field_validator("activation")
    @classmethod
    def known_activation(cls, v):
        if v not in ("relu", "tanh", "identity"):
            raise ValueError(f"unknown activation '{v}'")
        return v

    @field_validator("optimizer")
    @classmethod
    def known_optimizer(cls, v):
        if v not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer '{v}'")
        return v


class StateConfig(StrictModel):
    beta: float = Field(default=0.9, gt=0, lt=1)
    ema_norm_cap: float = Field(default=1.5, gt=0)
    hard_threshold: float = Field(default=0.7, gt=0)
    forget_definition: ForgetDefinition = ForgetDefinition.CORRECT_TO_ERROR


class ExpertConfig(StrictModel):
    """Self-paced expert: a bump over moderate normalised EMA loss."""

    center: float = 0.5
    width: float = Field(default=0.15, gt=0)
    floor: float = Field(default=0.05, ge=0, le=1)
    forget_penalty: float = Field(default=0.0, ge=0, le=1)


class BCConfig(StrictModel):
    epochs: int = Field(default=400, ge=1)
    lr: float = Field(default=5e-3, gt=0)
    minibatch_size: int = Field(default=256, ge=1)
    holdout_fraction: float = Field(default=0.2, ge=0, lt=1)


class PPOConfig(StrictModel):
    clip_eps: float = Field(default=0.2, gt=0, lt=1)
    actor_lr: float = Field(default=1e-4, gt=0)
    critic_lr: float = Field(default=3e-4, gt=0)
    ppo_epochs: int = Field(default=4, ge=1)
    minibatch_size: int = Field(default=64, ge=1)
    entropy_coef: float = Field(default=0.01, ge=0)
    value_coef: float = Field(default=0.5, ge=0)
    advantage_norm: bool = True
    hidden_sizes: List[int] = Field(default_factory=lambda: [32, 32])
    log_std_init: float = math.log(0.5)


class RewardConfig(StrictModel):
    c_rew: float = Field(default=0.5, gt=0, le=1)


class TaskSpec(StrictModel):
    n_train: int = Field(default=2000, ge=2)
    n_test: int = Field(default=1000, ge=2)
    input_dim: int = Field(default=8, ge=2)
    easy_fraction: float = Field(default=0.65, ge=0)
    hard_fraction: float = Field(default=0.25, ge=0)
    noise_fraction: float = Field(default=0.10, ge=0)
    margin: float = Field(default=5.0, gt=0)
    hard_band: float = Field(default=1.0, gt=0)
    shift_angle: float = math.radians(25.0)
    shift_translation: float | List[float] = 0.5
    seed: Optional[int] = None

    @model_validator(mode="after")
    def fractions_partition(self):
        total = self.easy_fraction + self.hard_fraction + self.noise_fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"easy/hard/noise fractions must sum to 1, got {total}")
        if isinstance(self.shift_translation, list) and len(self.shift_translation) != self.input_dim:
            raise ValueError("shift_translation list must have input_dim entries")
        return self

    def translation_vector(self) -> np.ndarray:
        if isinstance(self.shift_translation, list):
            return np.asarray(self.shift_translation, dtype=np.float64)
        return np.full(self.input_dim, float(self.shift_translation))


class RunConfig(StrictModel):
    mode: RunMode = RunMode.TSRL
    n_warmup_epochs: int = Field(default=5, ge=1)
    n_total_epochs: int = Field(default=40, ge=2)
    batch_size: int = Field(default=64, ge=1)
    seed: int = 0
    dump_registry: bool = False
    student: StudentConfig = Field(default_factory=StudentConfig)
    state: StateConfig = Field(default_factory=StateConfig)
    expert: ExpertConfig = Field(default_factory=ExpertConfig)
    bc: BCConfig = Field(default_factory=BCConfig)
    ppo: PPOConfig = Field(default_factory=PPOConfig)
    reward: RewardConfig = Field(default_factory=RewardConfig)
    task: TaskSpec = Field(default_factory=TaskSpec)

    @model_validator(mode="after")
    def warmup_before_end(self):
        if self.n_warmup_epochs >= self.n_total_epochs:
            raise ValueError(
                f"n_warmup_epochs ({self.n_warmup_epochs}) must be below n_total_epochs ({self.n_total_epochs})"
            )
        return self

    @property
    def task_seed(self) -> int:
        return self.seed if self.task.seed is None else self.task.seed

    @property
    def run_name(self) -> str:
        return f"{self.mode.value}-seed{self.seed}"


def load_run_config(text: str | None = None, **overrides) -> RunConfig:
    """Parse a JSON config document and apply CLI overrides.

    Overrides with value ``None`` are ignored. Validation problems surface as
    ``ConfigError``.
    """
    try:
        config = RunConfig.model_validate_json(text) if text else RunConfig()
        updates = {k: v for k, v in overrides.items() if v is not None}
        if updates:
            config = RunConfig.model_validate({**config.model_dump(), **updates})
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    return config

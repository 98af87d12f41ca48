from __future__ import annotations

from tsrl.schemas.imports import *


class LabeledDataset(ArrayModel):
    inputs: np.ndarray
    labels: np.ndarray
    # generator ground truth; None on test splits
    tags: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def equal_lengths(self):
        n = self.inputs.shape[0]
        if self.labels.shape[0] != n or (self.tags is not None and self.tags.shape[0] != n):
            raise ValueError("inputs, labels and tags must have equal lengths")
        return self

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    def tag_mask(self, tag: Difficulty) -> np.ndarray:
        if self.tags is None:
            return np.zeros(len(self), dtype=bool)
        return self.tags == tag.value


class TaskSplits(ArrayModel):
    train: LabeledDataset
    test_in: LabeledDataset
    test_shift: LabeledDataset


class MetricSet(BaseModel):
    auc: float
    acc: float
    eer: float
    n: int

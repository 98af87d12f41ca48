from __future__ import annotations

from tsrl.schemas.imports import *


class SampleTransition(BaseModel):
    """Correctness and true-class confidence of one sample around an update."""

    correct_init: bool
    conf_init: float
    correct_upd: bool
    conf_upd: float

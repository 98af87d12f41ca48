import math
from enum import Enum
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class RunMode(str, Enum):
    BASELINE = "baseline"
    CL = "cl"
    TSRL = "tsrl"


class ForgetDefinition(str, Enum):
    CORRECT_TO_ERROR = "correct_to_error"
    ERROR_TO_CORRECT = "error_to_correct"
    ANY_FLIP = "any_flip"


class Difficulty(str, Enum):
    EASY = "easy"
    HARD = "hard"
    NOISE = "noise"


class ArrayModel(BaseModel):
    """Base for models that carry numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

import json

import numpy as np
import pytest

from tsrl.schemas.config_schema import RunConfig

SMALL_RUN = {
    "n_warmup_epochs": 2,
    "n_total_epochs": 5,
    "batch_size": 32,
    "student": {"hidden_sizes": [16]},
    "bc": {"epochs": 10, "minibatch_size": 64},
    "ppo": {"hidden_sizes": [8], "minibatch_size": 64, "ppo_epochs": 2},
    "task": {"n_train": 256, "n_test": 128, "input_dim": 4},
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_config():
    """Factory for a desk-sized RunConfig; keyword arguments override top-level fields."""

    def _make(**updates) -> RunConfig:
        return RunConfig.model_validate({**SMALL_RUN, **updates})

    return _make


@pytest.fixture
def config_file(tmp_path):
    def _write(**updates):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({**SMALL_RUN, **updates}), encoding="utf-8")
        return path

    return _write

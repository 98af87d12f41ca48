import json

import numpy as np
import pytest

from tsrl.core.errors import RejectedInput
from tsrl.core.network import DenseNet
from tsrl.repositories.checkpoint_repo import HEADER, dumps_net, load_net, load_policy, loads_net, save_net, save_policy
from tsrl.repositories.dataset_repo import load_dataset, save_dataset, save_splits
from tsrl.repositories.run_repo import (
    FAILED_MARKER,
    format_cell,
    mark_failed,
    read_metrics,
    write_json,
    write_metrics,
    write_registry,
)
from tsrl.schemas.config_schema import PPOConfig, StateConfig, TaskSpec
from tsrl.schemas.imports import RunMode
from tsrl.schemas.run_schema import EpochRow
from tsrl.schemas.task_schema import LabeledDataset
from tsrl.services.state_service import init_registry
from tsrl.services.task_service import generate_task
from tsrl.services.tutor_service import TutorPolicy


def _row(epoch, **extra) -> EpochRow:
    values = dict(
        epoch=epoch,
        phase="warmup",
        train_loss=0.1 * epoch,
        in_auc=0.9,
        in_acc=0.8,
        in_eer=0.2,
        shift_auc=0.7,
        shift_acc=0.6,
        shift_eer=0.3,
        hard_fraction=0.25,
        mean_weight=1.0,
    )
    values.update(extra)
    return EpochRow(**values)


def test_checkpoint_round_trip_is_bit_exact(tmp_path, rng):
    net = DenseNet.initialize([4, 7, 2], ["relu", "identity"], rng)
    path = save_net(net, tmp_path / "student.net")
    assert path.read_text().splitlines()[0] == HEADER
    loaded = load_net(path)
    x = rng.standard_normal((5, 4))
    assert np.array_equal(loaded(x), net(x))
    assert loaded.activations == net.activations


@pytest.mark.parametrize(
    "text",
    [
        "",
        "TSRL-NET v2\nlayers 0\n",
        "TSRL-NET v1\nlayers x\n",
        "TSRL-NET v1\nlayers 1\nlayer 1 1 identity\n0.5\n",
        "TSRL-NET v1\nlayers 1\nlayer 1 2 identity\n0.5\n0.0 0.0\n",
        "TSRL-NET v1\nlayers 1\nlayer 1 1 softmax\n0.5\n0.0\n",
        "TSRL-NET v1\nlayers 1\nlayer 1 1 identity\nabc\n0.0\n",
    ],
)
def test_malformed_checkpoints_are_rejected(text):
    with pytest.raises(RejectedInput):
        loads_net(text)


def test_missing_checkpoint_is_rejected(tmp_path):
    with pytest.raises(RejectedInput):
        load_net(tmp_path / "nope.net")


def test_policy_round_trip(tmp_path, rng):
    policy = TutorPolicy.initialize(9, PPOConfig(hidden_sizes=[6]), rng)
    policy.log_std[0] = -0.123456789
    save_policy(policy, tmp_path)
    loaded = load_policy(tmp_path)
    states = rng.standard_normal((3, 9))
    assert loaded.log_std[0] == policy.log_std[0]
    assert np.array_equal(loaded.mean_logits(states), policy.mean_logits(states))
    assert np.array_equal(loaded.values(states), policy.values(states))
    assert dumps_net(loaded.critic) == dumps_net(policy.critic)


def test_dataset_round_trip(tmp_path):
    splits = generate_task(TaskSpec(n_train=40, n_test=20, input_dim=3), seed=4)
    save_splits(splits, tmp_path)
    train = load_dataset(tmp_path / "train.csv")
    assert np.array_equal(train.inputs, splits.train.inputs)
    assert np.array_equal(train.labels, splits.train.labels)
    assert np.array_equal(train.tags, splits.train.tags)
    assert load_dataset(tmp_path / "test_shift.csv").tags is None
    assert (tmp_path / "test_in.csv").read_text().splitlines()[0] == "id,label,tag,x0,x1,x2"


@pytest.mark.parametrize(
    "content",
    [
        "",
        "label,id,tag,x0\n0,0,,1.0\n",
        "id,label,tag,x0\n0,2,,1.0\n",
        "id,label,tag,x0\n0,1,,nan-ish\n",
        "id,label,tag,x0,x1\n0,1,,1.0\n",
    ],
)
def test_malformed_datasets_are_rejected(tmp_path, content):
    path = tmp_path / "data.csv"
    path.write_text(content)
    with pytest.raises(RejectedInput):
        load_dataset(path)


def test_dataset_without_tags(tmp_path):
    data = LabeledDataset(inputs=np.array([[0.5], [1.5]]), labels=np.array([0, 1]))
    loaded = load_dataset(save_dataset(data, tmp_path / "d.csv"))
    assert loaded.tags is None
    assert loaded.input_dim == 1


def test_cells_use_round_trip_formatting():
    assert format_cell(0.1) == "0.1"
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(RunMode.CL) == "cl"
    assert float(format_cell(1 / 3)) == 1 / 3


def test_metrics_csv_has_one_row_per_epoch(tmp_path):
    rows = [_row(1), _row(2, phase="main", mean_reward=0.05, clip_fraction=0.1)]
    path = write_metrics(rows, tmp_path / "metrics.csv")
    read = read_metrics(path)
    assert list(read[0]) == EpochRow.columns()
    assert [r["epoch"] for r in read] == ["1", "2"]
    assert read[0]["mean_reward"] == ""
    assert float(read[1]["train_loss"]) == 0.2


def test_registry_dump(tmp_path):
    registry = init_registry(3)
    registry.update_epoch(np.array([0.5, 1.0, 0.0]), np.array([True, False, True]), StateConfig())
    lines = write_registry(registry.records(), tmp_path / "registry" / "epoch_001.csv").read_text().splitlines()
    assert lines[0] == "sample_id,ema_loss,forget_count,epochs_observed,last_correct"
    assert lines[2] == "1,1.0,0,1,false"


def test_json_refuses_nan(tmp_path):
    with pytest.raises(ValueError):
        write_json(tmp_path / "bad.json", {"x": float("nan")})
    assert json.loads(write_json(tmp_path / "ok.json", {"b": 1, "a": 2}).read_text()) == {"a": 2, "b": 1}


def test_failed_marker(tmp_path):
    marker = mark_failed(tmp_path / "run", "loss went non-finite")
    assert marker.name == FAILED_MARKER
    assert marker.read_text() == "loss went non-finite\n"

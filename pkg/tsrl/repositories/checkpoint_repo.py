"""Plain-text network checkpoints.

    TSRL-NET v1
    layers <count>
    layer <fan_in> <fan_out> <activation>
    <fan_in*fan_out weights, row-major, space separated>
    <fan_out biases>
    ... one block per layer

Floats are written with ``repr`` so they read back bit-identical.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from tsrl.core.errors import RejectedInput
from tsrl.core.network import DenseLayer, DenseNet
from tsrl.schemas.config_schema import PPOConfig
from tsrl.services.tutor_service import TutorPolicy

HEADER = "TSRL-NET v1"


def _floats(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def _parse_floats(line: str, expected: int, where: str) -> np.ndarray:
    try:
        values = np.array([float(tok) for tok in line.split()], dtype=np.float64)
    except ValueError as e:
        raise RejectedInput(f"{where}: {e}") from e
    if values.shape[0] != expected:
        raise RejectedInput(f"{where}: expected {expected} values, found {values.shape[0]}")
    return values


def dumps_net(net: DenseNet) -> str:
    lines = [HEADER, f"layers {len(net.layers)}"]
    for layer in net.layers:
        lines.append(f"layer {layer.fan_in} {layer.fan_out} {layer.activation}")
        lines.append(_floats(layer.weight))
        lines.append(_floats(layer.bias))
    return "\n".join(lines) + "\n"


def loads_net(text: str, source: str = "<checkpoint>") -> DenseNet:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise RejectedInput(f"{source}: missing '{HEADER}' header")
    try:
        tag, count = lines[1].split()
        if tag != "layers":
            raise ValueError(f"expected 'layers', found '{tag}'")
        n_layers = int(count)
    except (IndexError, ValueError) as e:
        raise RejectedInput(f"{source}: bad layer count line ({e})") from e
    if len(lines) < 2 + 3 * n_layers:
        raise RejectedInput(f"{source}: truncated, expected {n_layers} layer blocks")

    layers = []
    for k in range(n_layers):
        head, w_line, b_line = lines[2 + 3 * k : 5 + 3 * k]
        parts = head.split()
        if len(parts) != 4 or parts[0] != "layer":
            raise RejectedInput(f"{source}: bad layer header '{head}'")
        try:
            fan_in, fan_out = int(parts[1]), int(parts[2])
        except ValueError as e:
            raise RejectedInput(f"{source}: bad layer header '{head}'") from e
        weight = _parse_floats(w_line, fan_in * fan_out, f"{source} layer {k} weights").reshape(fan_in, fan_out)
        bias = _parse_floats(b_line, fan_out, f"{source} layer {k} bias")
        layers.append(DenseLayer(weight, bias, parts[3]))
    return DenseNet(layers)


def save_net(net: DenseNet, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_net(net), encoding="utf-8")
    return path


def load_net(path: Path) -> DenseNet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise RejectedInput(f"cannot read checkpoint {path}: {e}") from e
    return loads_net(text, str(path))


def save_policy(policy: TutorPolicy, directory: Path) -> None:
    """Actor, critic and the shared log std, one file each."""
    directory = Path(directory)
    save_net(policy.actor, directory / "actor.net")
    save_net(policy.critic, directory / "critic.net")
    (directory / "log_std.txt").write_text(f"log_std {float(policy.log_std[0])!r}\n", encoding="utf-8")


def load_policy(directory: Path, config: PPOConfig | None = None) -> TutorPolicy:
    directory = Path(directory)
    try:
        record = (directory / "log_std.txt").read_text(encoding="utf-8").split()
    except OSError as e:
        raise RejectedInput(f"cannot read log std record in {directory}: {e}") from e
    if len(record) != 2 or record[0] != "log_std":
        raise RejectedInput(f"{directory / 'log_std.txt'}: expected 'log_std <value>'")
    return TutorPolicy(
        load_net(directory / "actor.net"),
        load_net(directory / "critic.net"),
        float(record[1]),
        config,
    )

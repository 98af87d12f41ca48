"""Dense feed-forward networks with exact backpropagation.

One engine serves the Student classifier and both Tutor heads. Weights are
stored as ``(fan_in, fan_out)`` so a layer computes ``x @ W + b`` on a batch of
row vectors. Everything is float64.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from tsrl.core.errors import ContractViolation, RejectedInput

Activation = Literal["relu", "tanh", "identity"]
ACTIVATIONS: tuple[str, ...] = ("relu", "tanh", "identity")


def _activate(pre: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(pre, 0.0)
    if activation == "tanh":
        return np.tanh(pre)
    return pre


def _activation_grad(pre: np.ndarray, out: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return (pre > 0.0).astype(np.float64)
    if activation == "tanh":
        return 1.0 - out * out
    return np.ones_like(pre)


@dataclass
class DenseLayer:
    weight: np.ndarray
    bias: np.ndarray
    activation: str = "identity"

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64).reshape(-1)
        if self.weight.ndim != 2:
            raise RejectedInput(f"layer weight must be a matrix, got shape {self.weight.shape}")
        if self.bias.shape[0] != self.weight.shape[1]:
            raise RejectedInput(
                f"bias length {self.bias.shape[0]} does not match weight columns {self.weight.shape[1]}"
            )
        if self.activation not in ACTIVATIONS:
            raise RejectedInput(f"unknown activation '{self.activation}'")

    @property
    def fan_in(self) -> int:
        return self.weight.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weight.shape[1]


@dataclass
class ForwardCache:
    """Intermediate values of one forward pass, consumed by ``backward``."""

    inputs: list[np.ndarray] = field(default_factory=list)
    pre: list[np.ndarray] = field(default_factory=list)
    outputs: list[np.ndarray] = field(default_factory=list)

    @property
    def penultimate(self) -> np.ndarray:
        # input of the last layer is the activation of the one before it
        return self.inputs[-1]


class DenseNet:
    def __init__(self, layers: Sequence[DenseLayer]):
        if not layers:
            raise RejectedInput("a network needs at least one layer")
        for k in range(len(layers) - 1):
            if layers[k].fan_out != layers[k + 1].fan_in:
                raise RejectedInput(
                    f"layer {k} outputs {layers[k].fan_out} values but layer {k + 1} "
                    f"expects {layers[k + 1].fan_in}"
                )
        self.layers = list(layers)
        self.check_finite()

    @classmethod
    def initialize(
        cls,
        sizes: Sequence[int],
        activations: Sequence[str],
        rng: np.random.Generator,
    ) -> "DenseNet":
        """Glorot-uniform weights, zero biases.

        ``sizes`` lists every width including input and output, so a 2-16-2
        network is ``sizes=[2, 16, 2]`` with two activations.
        """
        if len(activations) != len(sizes) - 1:
            raise ContractViolation(
                f"{len(sizes) - 1} layers need {len(sizes) - 1} activations, got {len(activations)}"
            )
        layers = []
        for fan_in, fan_out, activation in zip(sizes[:-1], sizes[1:], activations):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weight = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            layers.append(DenseLayer(weight, np.zeros(fan_out), activation))
        return cls(layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out

    @property
    def hidden_dim(self) -> int:
        return self.layers[-1].fan_in

    @property
    def sizes(self) -> list[int]:
        return [self.input_dim] + [layer.fan_out for layer in self.layers]

    @property
    def activations(self) -> list[str]:
        return [layer.activation for layer in self.layers]

    def parameters(self) -> list[np.ndarray]:
        """Parameter arrays in layer order ``[W0, b0, W1, b1, ...]``.

        The arrays are the live storage; optimizers update them in place.
        """
        params = []
        for layer in self.layers:
            params.append(layer.weight)
            params.append(layer.bias)
        return params

    def check_finite(self) -> None:
        for k, layer in enumerate(self.layers):
            if not (np.all(np.isfinite(layer.weight)) and np.all(np.isfinite(layer.bias))):
                raise ContractViolation(f"layer {k} holds non-finite parameters")

    def _as_batch(self, inputs) -> np.ndarray:
        x = np.asarray(inputs, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise RejectedInput(
                f"expected inputs of dimension {self.input_dim}, got array of shape {np.shape(inputs)}"
            )
        return x

    def forward(self, inputs) -> tuple[np.ndarray, ForwardCache]:
        x = self._as_batch(inputs)
        cache = ForwardCache()
        for layer in self.layers:
            cache.inputs.append(x)
            pre = x @ layer.weight + layer.bias
            x = _activate(pre, layer.activation)
            cache.pre.append(pre)
            cache.outputs.append(x)
        return x, cache

    def __call__(self, inputs) -> np.ndarray:
        return self.forward(inputs)[0]

    def backward(self, cache: ForwardCache, grad_output: np.ndarray) -> list[np.ndarray]:
        """Gradients of a scalar objective w.r.t. ``parameters()``.

        ``grad_output`` is d(objective)/d(network output) for the cached batch.
        """
        grad = np.asarray(grad_output, dtype=np.float64)
        grads: list[np.ndarray] = []
        for k in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[k]
            grad = grad * _activation_grad(cache.pre[k], cache.outputs[k], layer.activation)
            grads.append(grad.sum(axis=0))
            grads.append(cache.inputs[k].T @ grad)
            grad = grad @ layer.weight.T
        grads.reverse()
        return grads

    def __repr__(self) -> str:
        return f"DenseNet(sizes={self.sizes}, activations={self.activations})"

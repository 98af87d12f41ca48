from __future__ import annotations

from typing import Literal, Sequence

import numpy as np

from tsrl.core.errors import ContractViolation, NumericFailure

OptimizerKind = Literal["sgd", "adam"]


class OptimizerState:
    """SGD or Adam over a fixed list of parameter arrays.

    Parameters are updated in place, so the optimizer must be built over the
    same arrays a network exposes through ``parameters()``.
    """

    def __init__(
        self,
        params: Sequence[np.ndarray],
        kind: OptimizerKind = "adam",
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if kind not in ("sgd", "adam"):
            raise ContractViolation(f"unknown optimizer kind '{kind}'")
        if lr <= 0:
            raise ContractViolation(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.kind = kind
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]

    def step(self, grads: Sequence[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ContractViolation(
                f"got {len(grads)} gradients for {len(self.params)} parameter arrays"
            )
        for k, g in enumerate(grads):
            if not np.all(np.isfinite(g)):
                raise NumericFailure(
                    "non-finite gradient reached the optimizer",
                    {"param_index": k, "step": self.step_count},
                )

        self.step_count += 1
        if self.kind == "sgd":
            for p, g in zip(self.params, grads):
                p -= self.lr * g
            return

        t = self.step_count
        bias1 = 1.0 - self.beta1**t
        bias2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)

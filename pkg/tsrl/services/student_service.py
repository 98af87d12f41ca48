"""Student classifier: forward pass, weighted cross-entropy, one optimizer step, evaluation."""
from __future__ import annotations

import logging

import numpy as np

from tsrl.core.errors import ContractViolation, NumericFailure, RejectedInput
from tsrl.core.network import DenseNet, ForwardCache
from tsrl.core.optim import OptimizerState
from tsrl.schemas.config_schema import StudentConfig
from tsrl.schemas.student_schema import EvalSnapshot, StepReport, StudentOutput

logger = logging.getLogger(__name__)

N_CLASSES = 2


def build_student(config: StudentConfig, input_dim: int, rng: np.random.Generator) -> tuple[DenseNet, OptimizerState]:
    sizes = [input_dim, *config.hidden_sizes, N_CLASSES]
    activations = [config.activation] * len(config.hidden_sizes) + ["identity"]
    net = DenseNet.initialize(sizes, activations, rng)
    optimizer = OptimizerState(net.parameters(), kind=config.optimizer, lr=config.lr)
    return net, optimizer


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _check_labels(labels, n: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ContractViolation(f"expected {n} labels, got shape {labels.shape}")
    if not np.all((labels == 0) | (labels == 1)):
        raise ContractViolation("labels must be class indices in {0, 1}")
    return labels.astype(np.int64)


def _check_weights(weights, n: int) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (n,):
        raise ContractViolation(f"expected {n} weights, got shape {weights.shape}")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0.0) or np.any(weights > 1.0):
        raise ContractViolation("sample weights must lie in [0, 1]")
    return weights


def _assemble(logits: np.ndarray, cache: ForwardCache, labels=None) -> StudentOutput:
    if logits.shape[1] != N_CLASSES:
        raise RejectedInput(f"student head must emit {N_CLASSES} logits, got {logits.shape[1]}")
    probs = np.exp(log_softmax(logits))
    confidence = None
    if labels is not None:
        labels = _check_labels(labels, logits.shape[0])
        confidence = probs[np.arange(logits.shape[0]), labels]
    return StudentOutput(
        logits=logits,
        probabilities=probs,
        hidden=cache.penultimate,
        predicted=np.argmax(logits, axis=1),
        confidence=confidence,
    )


def forward(net: DenseNet, inputs, labels=None) -> StudentOutput:
    """Logits, softmax probabilities and penultimate features; no parameter change."""
    logits, cache = net.forward(inputs)
    return _assemble(logits, cache, labels)


def cross_entropy(output: StudentOutput, labels) -> np.ndarray:
    labels = _check_labels(labels, len(output))
    return -log_softmax(output.logits)[np.arange(len(output)), labels]


def weighted_ce_loss(output: StudentOutput, labels, weights) -> tuple[float, np.ndarray]:
    """Batch-mean of w_i * CE_i, plus the per-sample weighted terms."""
    weights = _check_weights(weights, len(output))
    per_sample = weights * cross_entropy(output, labels)
    return float(per_sample.mean()), per_sample


def train_step(
    net: DenseNet,
    optimizer: OptimizerState,
    batch,
    labels,
    weights,
) -> StepReport:
    """One optimizer update on the weighted cross-entropy of ``batch``.

    An all-zero weight vector carries no learning signal; the optimizer is not
    stepped in that case so momentum cannot move the parameters.
    """
    logits, cache = net.forward(batch)
    n = logits.shape[0]
    labels = _check_labels(labels, n)
    weights = _check_weights(weights, n)
    output = _assemble(logits, cache, labels)

    ce = cross_entropy(output, labels)
    loss = float(np.mean(weights * ce))
    if not np.isfinite(loss):
        raise NumericFailure("student loss is not finite", {"loss": loss, "batch_size": n})

    report = dict(
        loss=loss,
        per_sample_loss=ce,
        correct=output.predicted == labels,
        confidence=output.confidence,
    )
    if not np.any(weights > 0.0):
        return StepReport(grad_norm=0.0, updated=False, **report)

    onehot = np.eye(N_CLASSES)[labels]
    grad_logits = (output.probabilities - onehot) * weights[:, None] / n
    grads = net.backward(cache, grad_logits)
    grad_norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if not np.isfinite(grad_norm):
        raise NumericFailure(
            "student gradient is not finite",
            {"loss": loss, "step": optimizer.step_count, "batch_size": n},
        )
    optimizer.step(grads)
    logger.debug("student step %d loss=%.6f grad_norm=%.6f", optimizer.step_count, loss, grad_norm)
    return StepReport(grad_norm=grad_norm, **report)


def evaluate(net: DenseNet, inputs, labels) -> EvalSnapshot:
    """Per-sample correctness, true-class confidence and unweighted CE."""
    output = forward(net, inputs, labels)
    labels = np.asarray(labels, dtype=np.int64)
    return EvalSnapshot(
        correct=output.predicted == labels,
        confidence=output.confidence,
        loss=cross_entropy(output, labels),
    )

"""Three-phase training: Student warmup, behavioural cloning of the Tutor, then the TSRL loop.

BC needs states from a warmed-up Student, so it runs between warmup and the
main loop. Per-run randomness comes from one root seed split into independent
streams (student init, batch shuffling, tutor init, tutor sampling), so the
Student's trajectory does not depend on how many draws the Tutor makes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from tsrl.core.network import DenseNet
from tsrl.core.optim import OptimizerState
from tsrl.repositories.checkpoint_repo import save_net, save_policy
from tsrl.repositories.dataset_repo import save_splits
from tsrl.repositories.run_repo import write_metrics, write_registry, write_summary
from tsrl.schemas.config_schema import RunConfig
from tsrl.schemas.imports import Difficulty, RunMode
from tsrl.schemas.run_schema import EpochRow, PhaseBoundaries, RunArtifacts, RunSummary
from tsrl.schemas.student_schema import EvalSnapshot
from tsrl.schemas.task_schema import LabeledDataset, TaskSplits
from tsrl.services.metrics_service import metric_set
from tsrl.services.reward_service import compute_rewards
from tsrl.services.state_service import SampleRegistry, build_states, hard_fraction, init_registry
from tsrl.services.student_service import build_student, cross_entropy, evaluate, forward, train_step
from tsrl.services.task_service import generate_task
from tsrl.services.tutor_service import (
    FixedWeightTutor,
    RolloutBuffer,
    TutorPolicy,
    bc_pretrain,
    ppo_update,
)

logger = logging.getLogger(__name__)

Tutor = Union[TutorPolicy, FixedWeightTutor]
STREAMS = ("student_init", "shuffle", "tutor_init", "tutor")
WARMUP, MAIN = "warmup", "main"


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, children)}


@dataclass
class RunContext:
    """Mutable state of one training run."""

    config: RunConfig
    splits: TaskSplits
    student: DenseNet
    optimizer: OptimizerState
    registry: SampleRegistry
    streams: dict[str, np.random.Generator]
    step_losses: list[float] = field(default_factory=list)
    ppo_updates: int = 0
    bc_updates: int = 0
    registry_dir: Optional[Path] = None

    @classmethod
    def create(cls, config: RunConfig, registry_dir: Path | None = None) -> "RunContext":
        splits = generate_task(config.task, config.task_seed)
        streams = make_streams(config.seed)
        student, optimizer = build_student(config.student, splits.train.input_dim, streams["student_init"])
        return cls(
            config=config,
            splits=splits,
            student=student,
            optimizer=optimizer,
            registry=init_registry(len(splits.train)),
            streams=streams,
            registry_dir=registry_dir,
        )

    @property
    def train(self) -> LabeledDataset:
        return self.splits.train


def epoch_batches(n: int, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    order = rng.permutation(n)
    return [order[start : start + batch_size] for start in range(0, n, batch_size)]


def _tag_means(values: np.ndarray, data: LabeledDataset) -> dict[str, Optional[float]]:
    means = {}
    for tag in Difficulty:
        mask = data.tag_mask(tag)
        means[f"weight_{tag.value}"] = float(values[mask].mean()) if mask.any() else None
    return means


def _epoch_row(
    ctx: RunContext,
    epoch: int,
    phase: str,
    losses: np.ndarray,
    weights: np.ndarray,
    rewards: np.ndarray | None = None,
    clip_fraction: float | None = None,
) -> EpochRow:
    test_in = metric_set(forward(ctx.student, ctx.splits.test_in.inputs).probabilities[:, 1], ctx.splits.test_in.labels)
    test_shift = metric_set(
        forward(ctx.student, ctx.splits.test_shift.inputs).probabilities[:, 1], ctx.splits.test_shift.labels
    )
    row = EpochRow(
        epoch=epoch,
        phase=phase,
        train_loss=float(losses.mean()),
        in_auc=test_in.auc,
        in_acc=test_in.acc,
        in_eer=test_in.eer,
        shift_auc=test_shift.auc,
        shift_acc=test_shift.acc,
        shift_eer=test_shift.eer,
        hard_fraction=hard_fraction(ctx.registry, ctx.config.state),
        mean_weight=float(weights.mean()),
        mean_reward=None if rewards is None else float(rewards.mean()),
        clip_fraction=clip_fraction,
        **_tag_means(weights, ctx.train),
    )
    logger.info(
        "epoch %d/%d [%s] loss=%.4f shift_auc=%.4f hard=%.3f weight=%.3f",
        epoch, ctx.config.n_total_epochs, phase, row.train_loss, row.shift_auc, row.hard_fraction, row.mean_weight,
    )
    return row


def _close_epoch(ctx: RunContext, epoch: int, losses: np.ndarray, correct: np.ndarray) -> None:
    ctx.registry.update_epoch(losses, correct, ctx.config.state)
    if ctx.config.dump_registry and ctx.registry_dir is not None:
        write_registry(ctx.registry.records(), ctx.registry_dir / f"epoch_{epoch:03d}.csv")


def run_uniform_epoch(ctx: RunContext, epoch: int, phase: str = WARMUP) -> EpochRow:
    """One epoch of plain supervised training, every weight 1.0."""
    data = ctx.train
    n = len(data)
    losses, correct = np.empty(n), np.empty(n, dtype=bool)
    for idx in epoch_batches(n, ctx.config.batch_size, ctx.streams["shuffle"]):
        report = train_step(ctx.student, ctx.optimizer, data.inputs[idx], data.labels[idx], np.ones(idx.shape[0]))
        ctx.step_losses.append(report.loss)
        losses[idx] = report.per_sample_loss
        correct[idx] = report.correct
    _close_epoch(ctx, epoch, losses, correct)
    return _epoch_row(ctx, epoch, phase, losses, np.ones(n))


def harvest_states(ctx: RunContext) -> np.ndarray:
    """State vector of every training sample under the current Student and registry."""
    data = ctx.train
    output = forward(ctx.student, data.inputs, data.labels)
    return build_states(ctx.registry, np.arange(len(data)), output, data.labels, ctx.config.state)


def run_warmup(ctx: RunContext) -> tuple[list[EpochRow], np.ndarray]:
    """Warmup epochs; returns their rows and the states harvested after the last one.

    Rows of the archive follow the ``TutorState.vector`` layout.
    """
    rows = [run_uniform_epoch(ctx, epoch, WARMUP) for epoch in range(1, ctx.config.n_warmup_epochs + 1)]
    return rows, harvest_states(ctx)


def run_tsrl_epoch(
    ctx: RunContext,
    tutor: Tutor,
    epoch: int,
    stochastic: bool = True,
    learn: bool = True,
) -> tuple[EpochRow, RolloutBuffer]:
    """State -> action -> weighted update -> reward for every batch, then one PPO update.

    The returned buffer holds this epoch's experiences; the policy has already
    been updated from it when ``learn`` is set.
    """
    cfg = ctx.config
    data = ctx.train
    n = len(data)
    losses, correct, weights = np.empty(n), np.empty(n, dtype=bool), np.empty(n)
    buffer = RolloutBuffer()

    for idx in epoch_batches(n, cfg.batch_size, ctx.streams["shuffle"]):
        xb, yb = data.inputs[idx], data.labels[idx]
        output = forward(ctx.student, xb, yb)
        states = build_states(ctx.registry, idx, output, yb, cfg.state)
        actions = tutor.act(states, ctx.streams["tutor"], stochastic)

        before = EvalSnapshot(
            correct=output.predicted == yb,
            confidence=output.confidence,
            loss=cross_entropy(output, yb),
        )
        report = train_step(ctx.student, ctx.optimizer, xb, yb, actions.weights)
        after = evaluate(ctx.student, xb, yb)
        rewards = compute_rewards(before, after, cfg.reward)
        buffer.add(states, actions, rewards, idx)

        ctx.step_losses.append(report.loss)
        losses[idx], correct[idx], weights[idx] = before.loss, before.correct, actions.weights

    _close_epoch(ctx, epoch, losses, correct)

    clip_fraction = None
    if learn and tutor.learns:
        report = ppo_update(tutor, buffer, cfg.ppo, ctx.streams["tutor"])
        ctx.ppo_updates += 1
        clip_fraction = report.clip_fraction
    return _epoch_row(ctx, epoch, MAIN, losses, weights, buffer.rewards, clip_fraction), buffer


def _phases(config: RunConfig, bc_ran: bool) -> PhaseBoundaries:
    return PhaseBoundaries(
        warmup_first=1,
        warmup_last=config.n_warmup_epochs,
        bc_after_epoch=config.n_warmup_epochs if bc_ran else None,
        main_first=config.n_warmup_epochs + 1,
        main_last=config.n_total_epochs,
    )


def train(
    config: RunConfig,
    tutor: Tutor | None = None,
    registry_dir: Path | None = None,
) -> RunArtifacts:
    """Run one arm of the ablation.

    baseline: uniform weights throughout. cl: BC-initialised Tutor used
    frozen with its mean action. tsrl: BC-initialised Tutor sampling actions
    and updated by PPO after every main epoch. A ``tutor`` passed in replaces
    the BC-initialised one and skips BC.
    """
    ctx = RunContext.create(config, registry_dir)
    logger.info(
        "run %s: %d train samples, %d warmup + %d main epochs",
        config.run_name, len(ctx.train), config.n_warmup_epochs, config.n_total_epochs - config.n_warmup_epochs,
    )
    rows, archive = run_warmup(ctx)

    bc_report = None
    if config.mode != RunMode.BASELINE and tutor is None:
        tutor = TutorPolicy.initialize(archive.shape[1], config.ppo, ctx.streams["tutor_init"])
        bc_report = bc_pretrain(tutor, archive, config.expert, config.bc, ctx.streams["tutor_init"])
        ctx.bc_updates = bc_report.steps

    for epoch in range(config.n_warmup_epochs + 1, config.n_total_epochs + 1):
        if config.mode == RunMode.BASELINE:
            rows.append(run_uniform_epoch(ctx, epoch, MAIN))
            continue
        row, _ = run_tsrl_epoch(
            ctx,
            tutor,
            epoch,
            stochastic=config.mode == RunMode.TSRL,
            learn=config.mode == RunMode.TSRL,
        )
        rows.append(row)

    splits = ctx.splits
    summary = RunSummary(
        mode=config.mode,
        seed=config.seed,
        task_seed=config.task_seed,
        phases=_phases(config, bc_report is not None),
        final_in=metric_set(forward(ctx.student, splits.test_in.inputs).probabilities[:, 1], splits.test_in.labels),
        final_shift=metric_set(
            forward(ctx.student, splits.test_shift.inputs).probabilities[:, 1], splits.test_shift.labels
        ),
        final_hard_fraction=hard_fraction(ctx.registry, config.state),
        ppo_updates=ctx.ppo_updates,
        bc_updates=ctx.bc_updates,
        bc=bc_report,
        config=config.model_dump(mode="json"),
    )
    logger.info(
        "run %s finished: shift auc %.4f, hard fraction %.3f, %d PPO updates",
        config.run_name, summary.final_shift.auc, summary.final_hard_fraction, summary.ppo_updates,
    )
    return RunArtifacts(
        config=config,
        rows=rows,
        step_losses=ctx.step_losses,
        summary=summary,
        student=ctx.student,
        policy=tutor,
        splits=splits,
    )


def persist_run(artifacts: RunArtifacts, run_dir: Path, dump_data: bool = False) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    write_metrics(artifacts.rows, run_dir / "metrics.csv")
    write_summary(artifacts.summary, run_dir / "summary.json")
    save_net(artifacts.student, run_dir / "student.net")
    if isinstance(artifacts.policy, TutorPolicy):
        save_policy(artifacts.policy, run_dir)
    if dump_data:
        save_splits(artifacts.splits, run_dir)
    return run_dir

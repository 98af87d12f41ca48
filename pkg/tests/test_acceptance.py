"""End-to-end checks on the default synthetic task.

The ``slow`` ones run full 40-epoch ablations and are deselected by default;
run them with ``pytest -m slow``.
"""
import numpy as np
import pytest

from tsrl.schemas.config_schema import RunConfig
from tsrl.schemas.imports import Difficulty, RunMode
from tsrl.services.compare_service import compare
from tsrl.services.orchestrator_service import RunContext, persist_run, run_warmup, train
from tsrl.services.tutor_service import FixedWeightTutor, TutorPolicy, bc_pretrain, expert_weights, sigmoid

HARD_SEEDS = [0, 1, 2]
AUC_SEEDS = [0, 1, 2, 3, 4]


@pytest.fixture(scope="module")
def warmed_up():
    config = RunConfig()
    ctx = RunContext.create(config)
    _, archive = run_warmup(ctx)
    return config, ctx, archive


def test_bc_fidelity_on_warmup_states(warmed_up):
    config, ctx, archive = warmed_up
    policy = TutorPolicy.initialize(archive.shape[1], config.ppo, ctx.streams["tutor_init"])
    report = bc_pretrain(policy, archive, config.expert, config.bc, ctx.streams["tutor_init"])
    assert report.n_holdout == int(len(archive) * config.bc.holdout_fraction)
    assert report.holdout_mse < 0.01

    gap = sigmoid(policy.mean_logits(archive)) - expert_weights(archive, config.expert)
    assert float(np.mean(gap**2)) < 0.01


def test_expert_favours_hard_over_noise_after_warmup(warmed_up):
    config, ctx, archive = warmed_up
    hard, noise = ctx.train.tag_mask(Difficulty.HARD), ctx.train.tag_mask(Difficulty.NOISE)
    ema = ctx.registry.ema_loss
    assert ema[noise].mean() > ema[hard].mean()

    targets = expert_weights(archive, config.expert)
    assert targets[hard].mean() > targets[noise].mean()


@pytest.mark.slow
def test_constant_tutor_matches_baseline_over_full_run():
    baseline = train(RunConfig(mode=RunMode.BASELINE))
    stubbed = train(RunConfig(mode=RunMode.TSRL), tutor=FixedWeightTutor(1.0))
    np.testing.assert_allclose(stubbed.step_losses, baseline.step_losses, rtol=0, atol=1e-9)


@pytest.mark.slow
def test_repeated_runs_are_identical(tmp_path):
    config = RunConfig(seed=3)
    first = persist_run(train(config), tmp_path / "a")
    second = persist_run(train(config), tmp_path / "b")
    for name in ("metrics.csv", "summary.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


@pytest.fixture(scope="module")
def ablation(tmp_path_factory):
    out = tmp_path_factory.mktemp("ablation")
    return compare(RunConfig(), AUC_SEEDS, out, workers=len(RunMode))


def _curves(ablation, mode, field, seeds):
    outcomes = [o for o in ablation.outcomes if o.mode == mode.value and o.seed in seeds]
    return np.array([[row[field] for row in o.rows] for o in outcomes])


@pytest.mark.slow
def test_tsrl_reduces_hard_samples(ablation):
    config = RunConfig()
    tsrl = _curves(ablation, RunMode.TSRL, "hard_fraction", HARD_SEEDS).mean(axis=0)
    baseline = _curves(ablation, RunMode.BASELINE, "hard_fraction", HARD_SEEDS).mean(axis=0)
    assert tsrl[-1] <= baseline[-1]
    post = slice(config.n_warmup_epochs, config.n_total_epochs)
    assert np.mean(tsrl[post] <= baseline[post]) >= 0.7


@pytest.mark.slow
def test_tsrl_improves_shifted_auc(ablation):
    final = {mode: _curves(ablation, mode, "shift_auc", AUC_SEEDS)[:, -1].mean() for mode in RunMode}
    assert final[RunMode.TSRL] > final[RunMode.BASELINE]
    assert final[RunMode.TSRL] >= final[RunMode.CL] - 0.005


@pytest.mark.slow
def test_tutor_prefers_hard_over_noise(ablation):
    outcomes = [o for o in ablation.outcomes if o.mode == RunMode.TSRL.value]
    wins = sum(o.rows[-1]["weight_noise"] < o.rows[-1]["weight_hard"] for o in outcomes)
    assert wins >= 4

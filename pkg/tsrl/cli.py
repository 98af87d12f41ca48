import json
from pathlib import Path

import click

from tsrl.__version__ import __version__
from tsrl.core.errors import ConfigError, NumericFailure, RejectedInput, TSRLError, UndefinedMetric
from tsrl.core.logger import configure_logging
from tsrl.core.settings import default_output_root
from tsrl.repositories.checkpoint_repo import load_net
from tsrl.repositories.dataset_repo import load_dataset
from tsrl.repositories.run_repo import mark_failed, run_directory
from tsrl.schemas.config_schema import RunConfig, load_run_config
from tsrl.schemas.imports import RunMode
from tsrl.services.compare_service import compare as run_comparison
from tsrl.services.metrics_service import metric_set
from tsrl.services.orchestrator_service import persist_run
from tsrl.services.orchestrator_service import train as run_training
from tsrl.services.student_service import forward

USAGE_ERRORS = (ConfigError, RejectedInput, UndefinedMetric)


def _read_config(path, **overrides) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8") if path else None
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return load_run_config(text, **overrides)


def _fail(ctx: click.Context, error: TSRLError) -> None:
    click.secho(f"❌ {error}", fg="red", err=True)
    ctx.exit(2 if isinstance(error, USAGE_ERRORS) else 1)


@click.group()
@click.version_option(__version__, '--version', '-v', message='tsrl version %(version)s')
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Override TSRL_LOG_LEVEL.",
)
def cli(log_level):
    """🎓 TSRL CLI: train a Student classifier under a PPO Tutor's loss weights"""
    configure_logging(log_level)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON run config.")
@click.option("--mode", type=click.Choice([m.value for m in RunMode]), default=None, help="Override the config's mode.")
@click.option("--seed", type=int, default=None, help="Override the config's seed.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output root (default: $TSRL_OUT).")
@click.option("--dump-registry", is_flag=True, help="Write the per-sample registry after every epoch.")
@click.option("--dump-data", is_flag=True, help="Write train/test_in/test_shift CSVs into the run directory.")
@click.pass_context
def train(ctx, config_path, mode, seed, out, dump_registry, dump_data):
    """
    Run one training arm and write its artifacts.

    \b
    ✅ Good usage:
        tsrl train --config run.json
        tsrl train --config run.json --mode baseline --seed 7
        tsrl train --mode tsrl --dump-registry --out runs/curriculum

    ❌ Bad usage:
        tsrl train --config missing.json     # Config must exist
        tsrl train --mode curriculum         # Mode is baseline, cl or tsrl

    Notes:
        - Artifacts land in <out>/<mode>-seed<seed>/.
    """
    run_dir = None
    try:
        config = _read_config(config_path, mode=mode, seed=seed, dump_registry=dump_registry or None)
        run_dir = run_directory(Path(out) if out else default_output_root(), config.run_name)
        click.secho(f"🚀 Training {config.run_name} for {config.n_total_epochs} epochs", fg="cyan")
        artifacts = run_training(config, registry_dir=run_dir / "registry")
        persist_run(artifacts, run_dir, dump_data=dump_data)
    except NumericFailure as e:
        if run_dir is not None:
            mark_failed(run_dir, str(e))
        _fail(ctx, e)
        return
    except TSRLError as e:
        _fail(ctx, e)
        return

    summary = artifacts.summary
    click.secho(
        f"✅ {config.run_name}: shift AUC {summary.final_shift.auc:.4f}, "
        f"hard fraction {summary.final_hard_fraction:.3f} → {run_dir}",
        fg="green",
    )


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON run config.")
@click.option("--seed", "seeds", type=int, multiple=True, required=True, help="Seed to run; repeat for more.")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True, help="Parallel run processes.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output root (default: $TSRL_OUT).")
@click.pass_context
def compare(ctx, config_path, seeds, workers, out):
    """
    Run baseline, cl and tsrl for every seed and summarize them.

    \b
    ✅ Good usage:
        tsrl compare --config run.json --seed 0 --seed 1 --seed 2
        tsrl compare --seed 0 --seed 1 --workers 2

    ❌ Bad usage:
        tsrl compare --config run.json       # At least one --seed

    Notes:
        - Writes comparison.csv and comparison_summary.json next to the run directories.
        - A failed run leaves a FAILED marker and exits 1.
    """
    try:
        config = _read_config(config_path)
    except TSRLError as e:
        _fail(ctx, e)
        return

    out_root = Path(out) if out else default_output_root()
    click.secho(f"🚀 Comparing {len(RunMode)} modes × {len(seeds)} seed(s) in {out_root}", fg="cyan")
    result = run_comparison(config, seeds, out_root, workers=workers)

    for outcome in result.failures:
        click.secho(f"❌ {outcome.mode}-seed{outcome.seed}: {outcome.error}", fg="red", err=True)
    if result.failures:
        ctx.exit(1)

    for mode, entry in result.summary.items():
        auc = entry["shift_auc"]
        click.secho(f"✅ {mode:<8} shift AUC {auc['mean']:.4f} ± {auc['std']:.4f}", fg="green")


@cli.command(name="eval")
@click.option("--checkpoint", type=click.Path(exists=True), required=True, help="student.net file or run directory.")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True, help="Dataset CSV.")
@click.pass_context
def eval_command(ctx, checkpoint, dataset):
    """
    Score a Student checkpoint on a dataset CSV and print AUC/ACC/EER as JSON.

    \b
    ✅ Good usage:
        tsrl eval --checkpoint runs/tsrl-seed0 --dataset runs/tsrl-seed0/test_shift.csv
        tsrl eval --checkpoint runs/tsrl-seed0/student.net --dataset test_in.csv
    """
    path = Path(checkpoint)
    if path.is_dir():
        path = path / "student.net"
    try:
        net = load_net(path)
        data = load_dataset(dataset)
        scores = forward(net, data.inputs).probabilities[:, 1]
        metrics = metric_set(scores, data.labels)
    except TSRLError as e:
        _fail(ctx, e)
        return
    click.echo(json.dumps(metrics.model_dump(), sort_keys=True))


@cli.command(name="dump-config")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON run config.")
@click.pass_context
def dump_config(ctx, config_path):
    """Print the fully resolved run config as JSON."""
    try:
        config = _read_config(config_path)
    except TSRLError as e:
        _fail(ctx, e)
        return
    click.echo(json.dumps(config.model_dump(mode="json"), indent=2))


if __name__ == "__main__":
    cli()

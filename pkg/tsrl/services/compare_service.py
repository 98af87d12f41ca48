"""Ablation runner: baseline, cl and tsrl over a list of seeds."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from tsrl.core.errors import TSRLError
from tsrl.repositories.run_repo import mark_failed, run_directory, write_csv, write_json
from tsrl.schemas.config_schema import RunConfig
from tsrl.schemas.imports import RunMode
from tsrl.services.orchestrator_service import persist_run, train

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = ["mode", "seed", "epoch", "hard_fraction", "shift_auc"]
SUMMARY_FIELDS = ["shift_auc", "shift_acc", "shift_eer", "hard_fraction", "weight_hard", "weight_noise"]


@dataclass
class RunOutcome:
    mode: str
    seed: int
    rows: list[dict] = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class Comparison:
    outcomes: list[RunOutcome]
    summary: dict

    @property
    def failures(self) -> list[RunOutcome]:
        return [o for o in self.outcomes if o.failed]


def ablation_configs(base: RunConfig, seeds: Sequence[int]) -> list[RunConfig]:
    """One config per (seed, mode); seeds outer so each seed's three arms sit together."""
    return [base.model_copy(update={"mode": mode, "seed": seed}) for seed in seeds for mode in RunMode]


def run_one(config_json: str, out_root: str) -> RunOutcome:
    """Train and persist a single arm. Module-level so worker processes can pickle it."""
    config = RunConfig.model_validate_json(config_json)
    run_dir = run_directory(Path(out_root), config.run_name)
    registry_dir = run_dir / "registry" if config.dump_registry else None
    try:
        artifacts = train(config, registry_dir=registry_dir)
        persist_run(artifacts, run_dir)
    except TSRLError as e:
        mark_failed(run_dir, str(e))
        return RunOutcome(mode=config.mode.value, seed=config.seed, error=str(e))
    return RunOutcome(
        mode=config.mode.value,
        seed=config.seed,
        rows=[row.model_dump(mode="json") for row in artifacts.rows],
    )


def _stats(values: list[float]) -> dict[str, float | None]:
    if not values:
        return {"mean": None, "std": None}
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def summarize(outcomes: Sequence[RunOutcome]) -> dict:
    """Per-mode mean and population std of each final-epoch field across seeds."""
    summary = {}
    for mode in RunMode:
        finals = [o.rows[-1] for o in outcomes if o.mode == mode.value and not o.failed and o.rows]
        entry = {"n_seeds": len(finals)}
        for name in SUMMARY_FIELDS:
            entry[name] = _stats([r[name] for r in finals if r.get(name) is not None])
        summary[mode.value] = entry
    return summary


def compare(base: RunConfig, seeds: Sequence[int], out_root: Path, workers: int = 1) -> Comparison:
    out_root = Path(out_root)
    configs = ablation_configs(base, seeds)
    payloads = [c.model_dump_json() for c in configs]
    logger.info("comparing %d runs over seeds %s with %d worker(s)", len(configs), list(seeds), workers)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, payloads, [str(out_root)] * len(payloads)))
    else:
        outcomes = [run_one(p, str(out_root)) for p in payloads]

    write_csv(
        out_root / "comparison.csv",
        COMPARISON_COLUMNS,
        (
            [o.mode, o.seed, r["epoch"], r["hard_fraction"], r["shift_auc"]]
            for o in outcomes
            for r in o.rows
        ),
    )
    summary = summarize(outcomes)
    write_json(out_root / "comparison_summary.json", summary)

    result = Comparison(outcomes=outcomes, summary=summary)
    if result.failures:
        reason = "\n".join(f"{o.mode}-seed{o.seed}: {o.error}" for o in result.failures)
        mark_failed(out_root, reason)
        logger.error("%d of %d runs failed", len(result.failures), len(outcomes))
    return result

"""
Эксперимент Gridworld одной командой: генерация, разметка, обучение трех
режимов, оценка против полного состояния, замкнутый цикл и отчеты
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from gridworld.dataset import LABELED_FILE, MANIFEST_FILE, gen_dataset
from gridworld.environment import Gridworld, load_gridworld
from gridworld.renderer import GridRenderer
from labeler.labeler import Labeler
from learn.checkpoint import save_model
from learn.data import load_split
from learn.metrics import Metrics, evaluate
from learn.perception import ModelPerception, OraclePerception
from learn.training import TrainResult, train
from models.records import GridConfig, RunConfig, TrainConfig
from planner.loop import run_episodes
from utils.errors import LabelingError, StageError
from utils.io import write_csv
from utils.log_manager import get_log_manager
from utils.timing_decorator import timing_decorator

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("cli", logging.INFO)

REGIMES = ("oracle", "dnf", "half_dnf")
DISTURBED_EPISODES = 10
LOOP_BUDGET = 20_000


@dataclass
class ExperimentReport:
    index_hash: str
    seed: int
    count: int
    epochs: int
    metrics: dict[str, Metrics] = field(default_factory=dict)
    results: dict[str, TrainResult] = field(default_factory=dict)
    train_sizes: dict[str, int] = field(default_factory=dict)
    loop: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "index_hash": self.index_hash,
            "seed": self.seed,
            "count": self.count,
            "epochs": self.epochs,
            "regimes": {
                regime: {
                    "train_examples": self.train_sizes[regime],
                    "test": metrics.to_dict(),
                    "curves": [vars(c) for c in self.results[regime].curves],
                }
                for regime, metrics in self.metrics.items()
            },
            "loop": self.loop,
        }


def _stage(name: str, func: Callable[..., Any], *args, **kwargs) -> Any:
    logger.info(f"🚀 Этап {name}")
    try:
        return func(*args, **kwargs)
    except Exception as e:
        logger.error(f"❌ Этап {name} завершился ошибкой: {e}")
        raise StageError(name, e) from e


def _write_reports(report: ExperimentReport, out: Path) -> None:
    h, seed = report.index_hash, report.seed
    write_csv(
        out / "comparison.csv",
        ["regime", "train_examples", "precision", "recall", "f1", "accuracy"],
        [
            [
                regime,
                report.train_sizes[regime],
                f"{m.overall.precision:.4f}",
                f"{m.overall.recall:.4f}",
                f"{m.overall.f1:.4f}",
                f"{m.overall.accuracy:.4f}",
            ]
            for regime, m in report.metrics.items()
        ],
        h,
        seed,
    )
    predicates = [r.predicate for r in next(iter(report.metrics.values())).rows]
    write_csv(
        out / "f1_per_predicate.csv",
        ["predicate", *report.metrics],
        [[p, *(f"{m.row(p).f1:.4f}" for m in report.metrics.values())] for p in predicates],
        h,
        seed,
    )
    write_csv(
        out / "learning_curves.csv",
        ["regime", "epoch", "loss", "train_f1", "test_f1"],
        [
            [
                regime,
                c.epoch,
                f"{c.loss:.6f}",
                f"{c.train_f1:.4f}",
                "" if c.test_f1 is None else f"{c.test_f1:.4f}",
            ]
            for regime, result in report.results.items()
            for c in result.curves
        ],
        h,
        seed,
    )
    for regime, metrics in report.metrics.items():
        metrics.to_csv(out / f"metrics_{regime}.csv", h, seed)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


@timing_decorator
def run_experiment(config: RunConfig, world: Optional[Gridworld] = None, grid: Optional[GridConfig] = None) -> ExperimentReport:
    """
    Сравнить режимы oracle, dnf и half_dnf (с удвоенными данными)

    Промежуточные файлы остаются в config.out даже при ошибке этапа.

    Raises:
        StageError: этап завершился ошибкой, в сообщении его имя
    """
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    world = world or _stage("load", load_gridworld)
    index = world.index
    grid = grid or GridConfig()
    count, seed = config.count, config.seed

    # обучающая часть на 2·count примеров: oracle и dnf берут первую половину
    train_dir, test_dir = out / "data" / "train", out / "data" / "test"
    train_grid = grid.model_copy(update={"seed": seed})
    _stage("gen/train", gen_dataset, world, train_grid, 2 * count, "train", train_dir)
    _stage("gen/test", gen_dataset, world, train_grid, count, "test", test_dir)
    labeler = Labeler(world.domain, index, world.actions)
    summary = _stage("label", labeler.label_dataset, train_dir / MANIFEST_FILE, train_dir / LABELED_FILE)
    if summary.exit_code:
        raise StageError("label", LabelingError(f"{summary.skipped} of {summary.records} records skipped"))

    full = _stage("load/train", load_split, train_dir, index)
    test = _stage("load/test", load_split, test_dir, index, labels=False)
    report = ExperimentReport(index.digest(), seed, count, config.epochs)

    for regime in REGIMES:
        data = full if regime == "half_dnf" else full.subset(count)
        cfg = TrainConfig(epochs=config.epochs, seed=seed, regime=regime)
        result = _stage(f"train/{regime}", train, cfg, data, test.subset(cfg.curve_subset))
        _stage(
            f"save/{regime}",
            save_model,
            result.model,
            out / "models" / regime,
            cfg,
            index.digest(),
            test.renderer.channel_names,
        )
        report.results[regime] = result
        report.train_sizes[regime] = len(data)
        report.metrics[regime] = _stage(f"eval/{regime}", evaluate, ModelPerception(result.model, test.renderer), test)

    if config.episodes:
        renderer = GridRenderer(index, grid.height, grid.width)
        perceptions = {
            "oracle_perception": OraclePerception(renderer),
            "dnf_model": ModelPerception(report.results["dnf"].model, renderer),
        }
        for name, perception in perceptions.items():
            loop = _stage(
                f"loop/{name}",
                run_episodes,
                world,
                perception,
                renderer,
                config.episodes,
                config.horizon,
                seed,
                min(DISTURBED_EPISODES, config.episodes),
                LOOP_BUDGET,
            )
            report.loop[name] = loop.summary()

    _stage("report", _write_reports, report, out)
    logger.info(
        "✅ Эксперимент завершен: "
        + ", ".join(f"{regime} F1 {m.f1:.4f}" for regime, m in report.metrics.items())
    )
    return report

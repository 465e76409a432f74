"""
Оценка классификатора против полного истинного состояния: precision, recall,
F1 и accuracy по предикатам, общая (micro) строка и случайный базовый уровень
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from learn.data import PairDataset
from learn.perception import DEFAULT_THRESHOLD, Perception, threshold_logit
from logic.core import PropositionIndex
from utils.errors import LabelingError
from utils.io import write_csv
from utils.log_manager import get_log_manager
from utils.settings import get_settings
from utils.timing_decorator import timing_decorator

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("learn", logging.INFO)

OVERALL = "OVERALL"
RANDOM = "RANDOM"
CSV_HEADER = ["predicate", "dist", "precision", "recall", "f1"]


@dataclass(frozen=True)
class Score:
    predicate: str
    dist: Optional[float]
    precision: float
    recall: float
    f1: float
    accuracy: float
    positives: int
    total: int


def _ratio(num: int, den: int) -> float:
    # 0/0 -> 1
    return 1.0 if den == 0 else num / den


def score_counts(name: str, tp: int, fp: int, fn: int, tn: int, dist: Optional[float]) -> Score:
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    total = tp + fp + fn + tn
    return Score(name, dist, precision, recall, f1, _ratio(tp + tn, total), tp + fn, total)


@dataclass
class Metrics:
    rows: list[Score]
    overall: Score
    random: Score

    @property
    def f1(self) -> float:
        return self.overall.f1

    def row(self, predicate: str) -> Score:
        return next(r for r in self.rows if r.predicate == predicate)

    def csv_rows(self) -> list[list[str]]:
        def fmt(x: Optional[float]) -> str:
            return "" if x is None else f"{x:.4f}"

        return [[r.predicate, fmt(r.dist), fmt(r.precision), fmt(r.recall), fmt(r.f1)] for r in self.all_rows()]

    def all_rows(self) -> list[Score]:
        return [*self.rows, self.overall, self.random]

    def to_csv(self, path: Path, index_hash: str, seed: int) -> None:
        write_csv(Path(path), CSV_HEADER, self.csv_rows(), index_hash, seed)

    def to_dict(self) -> dict:
        return {r.predicate: {k: v for k, v in asdict(r).items() if k != "predicate"} for r in self.all_rows()}


def evaluate_predictions(predicted: np.ndarray, truth: np.ndarray, index: PropositionIndex) -> Metrics:
    """
    Метрики по булевым матрицам (K, N) предсказаний и истины

    Raises:
        ValueError: пустой набор или несовпадение форм
    """
    predicted = np.asarray(predicted, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if predicted.shape != truth.shape:
        raise ValueError(f"predictions {predicted.shape} and truth {truth.shape} differ")
    if truth.size == 0:
        raise ValueError("empty test set")

    predicate_of = np.array([index.predicate_of(i) for i in range(index.n)], dtype=np.int64)
    all_positives = int(truth.sum())
    rows = []
    for p, predicate in enumerate(index.predicates):
        columns = predicate_of == p
        pr, tr = predicted[:, columns], truth[:, columns]
        tp = int((pr & tr).sum())
        fp = int((pr & ~tr).sum())
        fn = int((~pr & tr).sum())
        tn = int((~pr & ~tr).sum())
        rows.append(score_counts(predicate.name, tp, fp, fn, tn, _ratio(tp + fn, all_positives)))

    tp = int((predicted & truth).sum())
    fp = int((predicted & ~truth).sum())
    fn = int((~predicted & truth).sum())
    tn = int((~predicted & ~truth).sum())
    overall = score_counts(OVERALL, tp, fp, fn, tn, 1.0)

    # предсказатель, который срабатывает случайно с базовой частотой r
    r = all_positives / truth.size
    random = Score(RANDOM, None, r, r, r, r * r + (1 - r) * (1 - r), all_positives, int(truth.size))
    return Metrics(rows, overall, random)


def predict_matrix(
    perception: Perception, dataset: PairDataset, threshold: float = DEFAULT_THRESHOLD, threads: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Предсказания (2K, N) для всех наблюдений до и после"""
    cut = threshold_logit(threshold)
    rows = np.concatenate([dataset.pre_rows, dataset.post_rows])

    def _predict(row: int) -> np.ndarray:
        return perception.predict_logits(dataset.observation(row)) > cut

    threads = threads or get_settings().threads
    with ThreadPoolExecutor(max_workers=threads) as executor:
        predicted = list(executor.map(_predict, rows))
    truth = np.concatenate([dataset.pre_state, dataset.post_state])
    return np.stack(predicted), truth


@timing_decorator
def evaluate(
    perception: Perception, dataset: PairDataset, threshold: float = DEFAULT_THRESHOLD, threads: Optional[int] = None
) -> Metrics:
    """Оценить восприятие на наборе с полными состояниями"""
    if not dataset.has_states:
        raise LabelingError("evaluation needs full ground-truth states (states.jsonl)")
    if len(dataset) == 0:
        raise ValueError("empty test set")
    predicted, truth = predict_matrix(perception, dataset, threshold, threads)
    metrics = evaluate_predictions(predicted, truth, dataset.index)
    logger.info(
        f"✅ Оценка на {len(dataset)} парах: F1 {metrics.f1:.4f} "
        f"(P {metrics.overall.precision:.4f}, R {metrics.overall.recall:.4f}), случайный F1 {metrics.random.f1:.4f}"
    )
    return metrics

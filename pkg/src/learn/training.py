"""
Обучение классификатора предикатов в режимах dnf / oracle / half_dnf
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from learn.data import PairDataset
from learn.losses import Weights, cb_weights, ce_dnf_grad, proposition_weights
from learn.metrics import evaluate_predictions, predict_matrix, score_counts
from learn.model import PARAM_ORDER, ModelSpec, PredicateClassifier, StateAssembler
from learn.perception import ModelPerception
from models.records import TrainConfig
from utils.errors import DivergenceError, LabelingError
from utils.log_manager import get_log_manager
from utils.settings import derive_seed, get_settings
from utils.timing_decorator import timing_decorator

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("learn", logging.INFO)


@dataclass(frozen=True)
class View:
    """Одно наблюдение с целевой разметкой: строка хранилища, s⁺, s⁻"""

    example: int
    row: int
    pos: np.ndarray
    neg: np.ndarray


@dataclass
class EpochCurve:
    epoch: int
    loss: float
    train_f1: float
    test_f1: Optional[float] = None


@dataclass
class TrainResult:
    model: PredicateClassifier
    curves: list[EpochCurve] = field(default_factory=list)
    weights: Optional[dict[tuple[str, bool], float]] = None


def build_views(dataset: PairDataset, regime: str, seed: int) -> list[list[View]]:
    """
    Целевые наблюдения каждого примера

    dnf - оба наблюдения со свернутыми метками; oracle - оба с полными
    состояниями; half_dnf - одно наблюдение, выбранное монетой один раз на пример.
    """
    views: list[list[View]] = []
    if regime == "oracle":
        if not dataset.has_states:
            raise LabelingError("oracle regime needs full-state training labels (states.jsonl)")
        for k in range(len(dataset)):
            views.append(
                [
                    View(k, int(dataset.pre_rows[k]), dataset.pre_state[k], ~dataset.pre_state[k]),
                    View(k, int(dataset.post_rows[k]), dataset.post_state[k], ~dataset.post_state[k]),
                ]
            )
        return views

    if not dataset.labeled:
        raise LabelingError(f"{regime} regime needs labeled examples (labeled.jsonl)")
    coins = np.random.default_rng(derive_seed(seed, "train/half")).random(len(dataset)) < 0.5
    for k in range(len(dataset)):
        pre = View(k, int(dataset.pre_rows[k]), dataset.pre_pos[k], dataset.pre_neg[k])
        post = View(k, int(dataset.post_rows[k]), dataset.post_pos[k], dataset.post_neg[k])
        if regime == "dnf":
            views.append([pre, post])
        elif regime == "half_dnf":
            views.append([pre if coins[k] else post])
        else:
            raise ValueError(f"unknown regime '{regime}'")
    return views


def view_counts(views: list[list[View]], dataset: PairDataset) -> dict[tuple[str, bool], int]:
    index = dataset.index
    flat = [v for group in views for v in group]
    pos = np.sum([v.pos for v in flat], axis=0) if flat else np.zeros(index.n)
    neg = np.sum([v.neg for v in flat], axis=0) if flat else np.zeros(index.n)
    predicate_of = np.array([index.predicate_of(i) for i in range(index.n)])
    counts = {}
    for p, predicate in enumerate(index.predicates):
        counts[(predicate.name, True)] = int(pos[predicate_of == p].sum())
        counts[(predicate.name, False)] = int(neg[predicate_of == p].sum())
    return counts


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        correction1 = 1 - self.beta1**self.t
        correction2 = 1 - self.beta2**self.t
        for name in PARAM_ORDER:
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            update = self.lr * (self.m[name] / correction1) / (np.sqrt(self.v[name] / correction2) + self.eps)
            params[name] -= update.astype(params[name].dtype, copy=False)


class Trainer:
    """Минибатчевый градиентный спуск с Adam, детерминированный при фиксированном сиде"""

    def __init__(
        self,
        cfg: TrainConfig,
        dataset: PairDataset,
        test: Optional[PairDataset] = None,
        threads: Optional[int] = None,
    ):
        self.cfg = cfg
        self.dataset = dataset
        self.test = test
        self.threads = threads or get_settings().threads
        index = dataset.index
        _, height, width, channels = dataset.store.meta.dims
        spec = ModelSpec(height, width, channels, index.max_arity, len(index.predicates), cfg.hidden)
        init_rng = np.random.default_rng(derive_seed(cfg.seed, "train/init"))
        self.model = PredicateClassifier.init(spec, init_rng, dtype=np.dtype(cfg.dtype))
        self.assembler = StateAssembler(index, spec.slots)
        self.views = build_views(dataset, cfg.regime, cfg.seed)
        self.weights: Optional[dict[tuple[str, bool], float]] = None
        self.w: Optional[Weights] = None
        if cfg.weighting == "class_balanced":
            self.weights = cb_weights(view_counts(self.views, dataset), cfg.beta)
            self.w = proposition_weights(index, self.weights)
        self.optimizer = Adam(self.model.params, cfg.lr)
        self.shuffle_rng = np.random.default_rng(derive_seed(cfg.seed, "train/shuffle"))

    def _view_grad(self, view: View) -> tuple[float, dict[str, np.ndarray]]:
        obs = self.dataset.observation(view.row)
        y, cache = self.assembler.forward(self.model, obs, self.dataset.object_masks(obs))
        loss, gy = ce_dnf_grad(y, view.pos, view.neg, self.w)
        dlogits = self.assembler.gather_grad(gy, self.model.spec.predicates)
        return loss, self.model.backward(cache, dlogits)

    def _diagnostics(self, epoch: int, step: int) -> str:
        norms = ", ".join(f"{name}={float(np.abs(p).max()):.3g}" for name, p in self.model.params.items())
        return f"epoch {epoch}, step {step}, max |param|: {norms}"

    def step(self, batch: list[int], executor: ThreadPoolExecutor, epoch: int = 0) -> float:
        """Один шаг оптимизатора; возвращает среднюю потерю примера в батче"""
        views = [v for k in batch for v in self.views[k]]
        results = list(executor.map(self._view_grad, views))
        loss = sum(r[0] for r in results) / len(batch)
        if not np.isfinite(loss):
            raise DivergenceError(f"non-finite loss {loss} ({self._diagnostics(epoch, self.optimizer.t)})")
        grads = {name: np.zeros_like(p) for name, p in self.model.params.items()}
        for _, g in results:
            for name in PARAM_ORDER:
                grads[name] += g[name]
        for name in PARAM_ORDER:
            grads[name] /= len(batch)
        self.optimizer.step(self.model.params, grads)
        return loss

    def train_f1(self) -> float:
        """F1 на размеченных пропозициях фиксированного подмножества"""
        views = [v for group in self.views[: self.cfg.curve_subset] for v in group]
        tp = fp = fn = 0
        for view in views:
            obs = self.dataset.observation(view.row)
            y, _ = self.assembler.forward(self.model, obs, self.dataset.object_masks(obs))
            predicted = y > 0
            tp += int((predicted & view.pos).sum())
            fp += int((predicted & view.neg).sum())
            fn += int((~predicted & view.pos).sum())
        return score_counts("train", tp, fp, fn, 0, None).f1

    def test_f1(self) -> Optional[float]:
        if self.test is None or not self.test.has_states or len(self.test) == 0:
            return None
        perception = ModelPerception(self.model, self.test.renderer)
        predicted, truth = predict_matrix(perception, self.test, threads=self.threads)
        return evaluate_predictions(predicted, truth, self.test.index).f1

    def run(self) -> TrainResult:
        cfg = self.cfg
        result = TrainResult(self.model, weights=self.weights)
        if not self.views:
            raise LabelingError("training set is empty")
        logger.info(
            f"🔍 Обучение: режим {cfg.regime}, {len(self.views)} примеров, {cfg.epochs} эпох, "
            f"параметров {self.model.parameter_count}"
        )
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            for epoch in range(1, cfg.epochs + 1):
                order = self.shuffle_rng.permutation(len(self.views))
                losses = []
                for start in range(0, len(order), cfg.batch_size):
                    batch = [int(k) for k in order[start : start + cfg.batch_size]]
                    losses.append(self.step(batch, executor, epoch) * len(batch))
                curve = EpochCurve(epoch, sum(losses) / len(order), self.train_f1(), self.test_f1())
                result.curves.append(curve)
                test = "-" if curve.test_f1 is None else f"{curve.test_f1:.4f}"
                logger.info(f"⏱️ Эпоха {epoch}: потеря {curve.loss:.4f}, train F1 {curve.train_f1:.4f}, test F1 {test}")
        return result


@timing_decorator
def train(
    cfg: TrainConfig, dataset: PairDataset, test: Optional[PairDataset] = None, threads: Optional[int] = None
) -> TrainResult:
    return Trainer(cfg, dataset, test, threads).run()

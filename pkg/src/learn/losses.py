"""
Кросс-энтропия по свернутой ДНФ и class-balanced веса

Все функции работают с логитами, а не вероятностями: log σ(y) считается
через logaddexp и не переполняется при |y| до 1e4.
"""

from typing import Mapping, Optional

import numpy as np

from logic.core import PartialState, PropositionIndex
from utils.errors import DivergenceError, ShapeMismatchError

# (веса положительных меток, веса отрицательных меток), каждый длины N
Weights = tuple[np.ndarray, np.ndarray]


def sigmoid(y: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * y))


def softplus(y: np.ndarray) -> np.ndarray:
    """log(1 + e^y) = -log σ(-y)"""
    return np.logaddexp(0.0, y)


def label_masks(label: PartialState, dtype=np.float64) -> tuple[np.ndarray, np.ndarray]:
    pos, neg = label.to_arrays()
    return pos.astype(dtype), neg.astype(dtype)


def _check(y: np.ndarray, pos: np.ndarray, neg: np.ndarray) -> None:
    if y.shape != pos.shape or y.shape != neg.shape:
        raise ShapeMismatchError(f"logits {y.shape} and label masks {pos.shape}/{neg.shape} differ")
    if not np.isfinite(y).all():
        raise DivergenceError("non-finite logits")


def ce_dnf_grad(
    y: np.ndarray, pos: np.ndarray, neg: np.ndarray, w: Optional[Weights] = None
) -> tuple[float, np.ndarray]:
    """
    CE = Σ w⁺·s⁺·(-log σ(y)) + w⁻·s⁻·(-log σ(-y)) и ее градиент по y

    Неразмеченные пропозиции (вне s⁺ ∪ s⁻) дают ровно ноль и в потере, и в градиенте.
    """
    y = np.asarray(y)
    _check(y, pos, neg)
    w_pos, w_neg = (pos, neg) if w is None else (pos * w[0], neg * w[1])
    loss = float(np.sum(w_pos * softplus(-y)) + np.sum(w_neg * softplus(y)))
    s = sigmoid(y)
    grad = w_pos * (s - 1.0) + w_neg * s
    return loss, grad


def ce_dnf(y: np.ndarray, label: PartialState, w: Optional[Weights] = None) -> float:
    pos, neg = label_masks(label)
    return ce_dnf_grad(np.asarray(y, dtype=np.float64), pos, neg, w)[0]


def pair_loss_grad(
    y_pre: np.ndarray,
    y_post: np.ndarray,
    pre: tuple[np.ndarray, np.ndarray],
    post: tuple[np.ndarray, np.ndarray],
    w: Optional[Weights] = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    if np.shape(y_pre) != np.shape(y_post):
        raise ShapeMismatchError(f"pre logits {np.shape(y_pre)} and post logits {np.shape(y_post)} differ")
    loss_pre, g_pre = ce_dnf_grad(y_pre, *pre, w)
    loss_post, g_post = ce_dnf_grad(y_post, *post, w)
    return loss_pre + loss_post, g_pre, g_post


def pair_loss(
    y_pre: np.ndarray,
    y_post: np.ndarray,
    pre_label: PartialState,
    post_label: PartialState,
    w: Optional[Weights] = None,
) -> float:
    """CE_DNF(y_pre, ŝ_pre) + CE_DNF(y_post, ŝ_post)"""
    return pair_loss_grad(
        np.asarray(y_pre, dtype=np.float64),
        np.asarray(y_post, dtype=np.float64),
        label_masks(pre_label),
        label_masks(post_label),
        w,
    )[0]


def cb_weights(counts: Mapping[tuple[str, bool], int], beta: float) -> dict[tuple[str, bool], float]:
    """
    Веса по эффективному числу примеров (1-β)/(1-β^n) для каждой пары
    (предикат, полярность), нормированные к среднему 1 по встреченным классам

    Классы с n = 0 получают вес 0.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    raw = {key: (1.0 - beta) / (1.0 - beta ** n) if n > 0 else 0.0 for key, n in counts.items()}
    observed = [v for key, v in raw.items() if counts[key] > 0]
    if not observed:
        return {key: 0.0 for key in raw}
    mean = sum(observed) / len(observed)
    return {key: v / mean for key, v in raw.items()}


def proposition_weights(index: PropositionIndex, weights: Mapping[tuple[str, bool], float]) -> Weights:
    """Развернуть веса (предикат, полярность) в пару векторов длины N"""
    names = [index.predicates[index.predicate_of(i)].name for i in range(index.n)]
    w_pos = np.array([weights.get((name, True), 0.0) for name in names])
    w_neg = np.array([weights.get((name, False), 0.0) for name in names])
    return w_pos, w_neg

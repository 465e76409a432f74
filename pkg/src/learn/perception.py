"""
Восприятие: наблюдение -> логиты N пропозиций

ModelPerception использует обученный классификатор, OraclePerception -
точный декодер рендерера. Оценка и замкнутый цикл принимают любой из них.
"""

from typing import Protocol

import numpy as np

from gridworld.renderer import GridRenderer
from learn.model import PredicateClassifier, StateAssembler
from logic.core import ClosedState, PropositionIndex

DEFAULT_THRESHOLD = 0.5

# |логит| для насыщенных предсказаний оракула
SATURATED = 30.0


class Perception(Protocol):
    index: PropositionIndex

    def predict_logits(self, obs: np.ndarray) -> np.ndarray: ...


class ModelPerception:
    def __init__(self, model: PredicateClassifier, renderer: GridRenderer):
        self.model = model
        self.renderer = renderer
        self.index = renderer.index
        self.assembler = StateAssembler(self.index, model.spec.slots)

    def predict_logits(self, obs: np.ndarray) -> np.ndarray:
        y, _ = self.assembler.forward(self.model, obs, self.renderer.object_masks(obs))
        return y


class OraclePerception:
    def __init__(self, renderer: GridRenderer):
        self.renderer = renderer
        self.index = renderer.index

    def predict_logits(self, obs: np.ndarray) -> np.ndarray:
        truth = self.renderer.decode_oracle(obs).to_array()
        return np.where(truth, SATURATED, -SATURATED)


def threshold_logit(threshold: float) -> float:
    """σ(y) > t  <=>  y > log(t / (1 - t))"""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return float(np.log(threshold / (1.0 - threshold)))


def predict_state(perception: Perception, obs: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> ClosedState:
    return ClosedState.from_array(perception.predict_logits(obs) > threshold_logit(threshold))

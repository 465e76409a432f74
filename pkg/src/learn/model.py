"""
Классификатор предикатов: наблюдение ⊕ маски аргументов -> P логитов

Каждая клетка получает признаки (каналы наблюдения, M масок аргументов,
one-hot строки и столбца), дальше линейное вложение в hidden, ReLU,
усреднение по клеткам, скрытый слой с ReLU и линейная голова на P логитов.
Прямой и обратный проход написаны на numpy вручную.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from logic.core import PropositionIndex
from utils.errors import ShapeMismatchError

PARAM_ORDER = ("w_obs", "w_mask", "w_row", "w_col", "b1", "w2", "b2", "w3", "b3")


@dataclass(frozen=True)
class ModelSpec:
    height: int
    width: int
    channels: int
    slots: int
    predicates: int
    hidden: int = 128

    def shapes(self) -> dict[str, tuple[int, ...]]:
        h = self.hidden
        return {
            "w_obs": (self.channels, h),
            "w_mask": (self.slots, h),
            "w_row": (self.height, h),
            "w_col": (self.width, h),
            "b1": (h,),
            "w2": (h, h),
            "b2": (h,),
            "w3": (h, self.predicates),
            "b3": (self.predicates,),
        }


@dataclass
class ForwardCache:
    obs: np.ndarray  # (cells, C)
    masks: np.ndarray  # (T, M, cells)
    z1: np.ndarray
    pooled: np.ndarray
    z2: np.ndarray
    a2: np.ndarray


class PredicateClassifier:
    def __init__(self, spec: ModelSpec, params: dict[str, np.ndarray]):
        shapes = spec.shapes()
        for name in PARAM_ORDER:
            if params[name].shape != shapes[name]:
                raise ShapeMismatchError(f"parameter {name} has shape {params[name].shape}, expected {shapes[name]}")
        self.spec = spec
        self.params = {name: params[name] for name in PARAM_ORDER}

    @classmethod
    def init(cls, spec: ModelSpec, rng: np.random.Generator, dtype=np.float32) -> "PredicateClassifier":
        """Инициализация He для весов, нули для смещений"""
        params = {}
        # в клетке активны лишь несколько признаков первого слоя
        first = spec.channels + spec.slots + 2
        for name, shape in spec.shapes().items():
            if name.startswith("b"):
                params[name] = np.zeros(shape, dtype=dtype)
                continue
            fan_in = shape[0] if name in ("w2", "w3") else first
            params[name] = (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)
        return cls(spec, params)

    @classmethod
    def zeros(cls, spec: ModelSpec, dtype=np.float32) -> "PredicateClassifier":
        return cls(spec, {name: np.zeros(shape, dtype=dtype) for name, shape in spec.shapes().items()})

    @property
    def dtype(self):
        return self.params["w_obs"].dtype

    @property
    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def _check(self, obs: np.ndarray, masks: np.ndarray) -> None:
        s = self.spec
        if obs.shape != (s.height, s.width, s.channels):
            raise ShapeMismatchError(f"observation shape {obs.shape}, expected {(s.height, s.width, s.channels)}")
        if masks.ndim != 4 or masks.shape[1:] != (s.slots, s.height, s.width):
            raise ShapeMismatchError(f"argument masks shape {masks.shape}, expected (T, {s.slots}, {s.height}, {s.width})")

    def forward_tuples(self, obs: np.ndarray, masks: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
        """
        Прямой проход для T кортежей аргументов над одним наблюдением

        Args:
            obs: (H, W, C)
            masks: (T, M, H, W)

        Returns:
            логиты (T, P) и кэш для backward
        """
        obs = np.asarray(obs, dtype=self.dtype)
        masks = np.asarray(masks, dtype=self.dtype)
        self._check(obs, masks)
        p, s = self.params, self.spec
        cells = s.height * s.width

        flat = obs.reshape(cells, s.channels)
        flat_masks = masks.reshape(masks.shape[0], s.slots, cells)
        position = (p["w_row"][:, None, :] + p["w_col"][None, :, :]).reshape(cells, s.hidden)
        base = flat @ p["w_obs"] + position + p["b1"]
        z1 = base[None] + np.einsum("tmc,mh->tch", flat_masks, p["w_mask"])
        pooled = np.maximum(z1, 0).mean(axis=1)
        z2 = pooled @ p["w2"] + p["b2"]
        a2 = np.maximum(z2, 0)
        logits = a2 @ p["w3"] + p["b3"]
        return logits, ForwardCache(flat, flat_masks, z1, pooled, z2, a2)

    def backward(self, cache: ForwardCache, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        """Градиенты параметров по dL/dlogits формы (T, P)"""
        p, s = self.params, self.spec
        dlogits = np.asarray(dlogits, dtype=self.dtype)
        cells = s.height * s.width
        grads = {
            "w3": cache.a2.T @ dlogits,
            "b3": dlogits.sum(axis=0),
        }
        dz2 = (dlogits @ p["w3"].T) * (cache.z2 > 0)
        grads["w2"] = cache.pooled.T @ dz2
        grads["b2"] = dz2.sum(axis=0)
        dpooled = dz2 @ p["w2"].T
        dz1 = (dpooled[:, None, :] / cells) * (cache.z1 > 0)
        grads["w_mask"] = np.einsum("tmc,tch->mh", cache.masks, dz1)
        dbase = dz1.sum(axis=0)
        grads["w_obs"] = cache.obs.T @ dbase
        grads["b1"] = dbase.sum(axis=0)
        dposition = dbase.reshape(s.height, s.width, s.hidden)
        grads["w_row"] = dposition.sum(axis=1)
        grads["w_col"] = dposition.sum(axis=0)
        return {name: grads[name].astype(self.dtype, copy=False) for name in PARAM_ORDER}

    def forward(self, obs: np.ndarray, masks: np.ndarray) -> np.ndarray:
        """ỹ = f(I, m_1..m_M): P логитов для одного кортежа аргументов"""
        logits, _ = self.forward_tuples(obs, np.asarray(masks)[None])
        return logits[0]


class StateAssembler:
    """
    Сборка логитов всех N пропозиций: один проход на каждый кортеж аргументов
    подходящих типов, логит предиката φ кладется в слот пропозиции φ(o1..ok)
    """

    def __init__(self, index: PropositionIndex, slots: Optional[int] = None):
        self.index = index
        self.slots = index.max_arity if slots is None else slots
        groups = index.tuple_groups()
        self.tuple_args = np.full((len(groups), self.slots), -1, dtype=np.int64)
        self.tuple_of = np.zeros(index.n, dtype=np.int64)
        self.predicate_of = np.zeros(index.n, dtype=np.int64)
        for t, (args, members) in enumerate(groups):
            self.tuple_args[t, : len(args)] = args
            for predicate, i in members:
                self.tuple_of[i] = t
                self.predicate_of[i] = predicate

    @property
    def tuples(self) -> int:
        return len(self.tuple_args)

    def tuple_masks(self, object_masks: np.ndarray) -> np.ndarray:
        """(|O|, H, W) -> (T, M, H, W); пустые слоты - нулевые маски"""
        n_objects = len(self.index.objects)
        if object_masks.ndim != 3 or object_masks.shape[0] != n_objects:
            raise ShapeMismatchError(f"expected a mask for each of {n_objects} objects, got {object_masks.shape}")
        padded = np.concatenate([object_masks, np.zeros_like(object_masks[:1])], axis=0)
        return padded[self.tuple_args]

    def scatter(self, logits: np.ndarray) -> np.ndarray:
        return logits[self.tuple_of, self.predicate_of]

    def gather_grad(self, dy: np.ndarray, predicates: int) -> np.ndarray:
        dlogits = np.zeros((self.tuples, predicates), dtype=dy.dtype)
        dlogits[self.tuple_of, self.predicate_of] = dy
        return dlogits

    def forward(self, model: PredicateClassifier, obs: np.ndarray, object_masks: np.ndarray):
        logits, cache = model.forward_tuples(obs, self.tuple_masks(object_masks))
        return self.scatter(logits), cache


def assemble_state(
    model: PredicateClassifier, obs: np.ndarray, index: PropositionIndex, object_masks: np.ndarray
) -> np.ndarray:
    """Логиты всех N пропозиций индекса для одного наблюдения"""
    y, _ = StateAssembler(index, model.spec.slots).forward(model, obs, object_masks)
    return y

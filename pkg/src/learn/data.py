"""
Загрузка частей набора данных для обучения и оценки
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from gridworld.dataset import LABELED_FILE, MANIFEST_FILE, STATES_FILE, ObservationStore, parse_ref
from gridworld.renderer import GridRenderer
from logic.core import ClosedState, PropositionIndex
from models.records import LabeledRecord, ManifestRecord, StateRecord
from utils.errors import LabelingError, MalformedObservationError
from utils.io import check_index_hash, read_jsonl, read_meta
from utils.log_manager import get_log_manager

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("learn", logging.INFO)


def _rows(index: PropositionIndex, names_per_record: list[list[str]]) -> np.ndarray:
    if not names_per_record:
        return np.zeros((0, index.n), dtype=bool)
    return np.stack([ClosedState(index.bits_of(names), index.n).to_array() for names in names_per_record])


@dataclass
class PairDataset:
    """
    Пары наблюдений до/после с метками

    Метки хранятся плотными булевыми матрицами (K, N); полные состояния
    есть только у наборов из симулятора.
    """

    index: PropositionIndex
    store: ObservationStore
    renderer: GridRenderer
    ids: list[str]
    pre_rows: np.ndarray
    post_rows: np.ndarray
    pre_pos: Optional[np.ndarray] = None
    pre_neg: Optional[np.ndarray] = None
    post_pos: Optional[np.ndarray] = None
    post_neg: Optional[np.ndarray] = None
    pre_state: Optional[np.ndarray] = None
    post_state: Optional[np.ndarray] = None
    seed: int = 0

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def labeled(self) -> bool:
        return self.pre_pos is not None

    @property
    def has_states(self) -> bool:
        return self.pre_state is not None

    def subset(self, count: int) -> "PairDataset":
        """Первые count пар"""

        def head(a: Optional[np.ndarray]) -> Optional[np.ndarray]:
            return None if a is None else a[:count]

        return replace(
            self,
            ids=self.ids[:count],
            pre_rows=self.pre_rows[:count],
            post_rows=self.post_rows[:count],
            pre_pos=head(self.pre_pos),
            pre_neg=head(self.pre_neg),
            post_pos=head(self.post_pos),
            post_neg=head(self.post_neg),
            pre_state=head(self.pre_state),
            post_state=head(self.post_state),
        )

    def observation(self, row: int) -> np.ndarray:
        return self.store.row(int(row))

    def object_masks(self, obs: np.ndarray) -> np.ndarray:
        return self.renderer.object_masks(obs)


def load_split(directory: Path, index: PropositionIndex, labels: bool = True, states: bool = True) -> PairDataset:
    """
    Прочитать часть набора из каталога gen

    Args:
        labels: читать labeled.jsonl (иначе manifest.jsonl)
        states: читать states.jsonl, если он есть
    """
    directory = Path(directory)
    store = ObservationStore(directory)
    store.check_index(index)
    renderer = GridRenderer(index, store.meta.dims[1], store.meta.dims[2])
    if renderer.channel_names != store.meta.channel_names:
        raise MalformedObservationError(f"channel layout of {directory} does not match the renderer")

    source = directory / (LABELED_FILE if labels else MANIFEST_FILE)
    if not source.exists():
        raise FileNotFoundError(f"{source} not found (run `pgk label` first)" if labels else f"{source} not found")
    check_index_hash(read_meta(source).get("index_hash"), index.digest(), str(source))
    records = read_jsonl(source, LabeledRecord if labels else ManifestRecord)

    dataset = PairDataset(
        index=index,
        store=store,
        renderer=renderer,
        ids=[r.id for r in records],
        pre_rows=np.array([parse_ref(r.pre_obs)[1] for r in records], dtype=np.int64),
        post_rows=np.array([parse_ref(r.post_obs)[1] for r in records], dtype=np.int64),
        seed=store.meta.seed,
    )
    if labels:
        dataset.pre_pos = _rows(index, [r.pre_pos for r in records])
        dataset.pre_neg = _rows(index, [r.pre_neg for r in records])
        dataset.post_pos = _rows(index, [r.post_pos for r in records])
        dataset.post_neg = _rows(index, [r.post_neg for r in records])

    states_file = directory / STATES_FILE
    if states and states_file.exists():
        check_index_hash(read_meta(states_file).get("index_hash"), index.digest(), str(states_file))
        by_id = {s.id: s for s in read_jsonl(states_file, StateRecord)}
        missing = [i for i in dataset.ids if i not in by_id]
        if missing:
            raise LabelingError(f"{len(missing)} examples have no full state in {states_file}")
        dataset.pre_state = _rows(index, [by_id[i].pre_state for i in dataset.ids])
        dataset.post_state = _rows(index, [by_id[i].post_state for i in dataset.ids])

    logger.info(f"✅ Загружено {len(dataset)} пар из {directory} (метки: {labels}, состояния: {dataset.has_states})")
    return dataset

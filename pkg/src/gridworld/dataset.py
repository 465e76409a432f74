"""
Генерация наборов данных Gridworld и хранилище наблюдений (memmap + JSON)
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from gridworld.environment import Gridworld, make_pair, sample_state
from gridworld.renderer import GridRenderer
from logic.core import PropositionIndex
from models.records import GridConfig, ManifestRecord, StateRecord, StoreMeta
from utils.errors import MalformedObservationError
from utils.io import check_index_hash, write_jsonl, write_meta
from utils.log_manager import get_log_manager
from utils.settings import derive_seed, get_settings
from utils.timing_decorator import timing_decorator

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("gridworld", logging.INFO)

OBS_FILE = "observations.f32"
OBS_META = "observations.json"
MANIFEST_FILE = "manifest.jsonl"
STATES_FILE = "states.jsonl"
LABELED_FILE = "labeled.jsonl"

CHUNK = 256


def parse_ref(ref: str) -> tuple[str, int]:
    """'observations.f32#12' -> ('observations.f32', 12)"""
    name, sep, row = ref.rpartition("#")
    if not sep or not row.isdigit():
        raise MalformedObservationError(f"bad observation reference '{ref}'")
    return name, int(row)


class ObservationStore:
    """Двоичный файл little-endian float32 (строки, H, W, C) с JSON-описанием"""

    def __init__(self, directory: Path, mode: str = "r", meta: Optional[StoreMeta] = None):
        self.directory = Path(directory)
        meta_file = self.directory / OBS_META
        if meta is None:
            if not meta_file.exists():
                raise MalformedObservationError(f"no observation store in {self.directory}")
            meta = StoreMeta.model_validate_json(meta_file.read_text(encoding="utf-8"))
        else:
            self.directory.mkdir(parents=True, exist_ok=True)
            meta_file.write_text(meta.model_dump_json(indent=2) + "\n", encoding="utf-8")
        self.meta = meta
        self.data = np.memmap(self.directory / OBS_FILE, dtype=meta.dtype, mode=mode, shape=tuple(meta.dims))

    @classmethod
    def create(cls, directory: Path, meta: StoreMeta) -> "ObservationStore":
        return cls(directory, mode="w+", meta=meta)

    def __len__(self) -> int:
        return self.meta.dims[0]

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < len(self):
            raise MalformedObservationError(f"observation row {i} out of range 0..{len(self) - 1}")
        return np.asarray(self.data[i], dtype=np.float32)

    def get(self, ref: str) -> np.ndarray:
        name, row = parse_ref(ref)
        if name != OBS_FILE:
            raise MalformedObservationError(f"reference '{ref}' points outside {OBS_FILE}")
        return self.row(row)

    def check_index(self, index: PropositionIndex) -> None:
        check_index_hash(self.meta.index_hash, index.digest(), f"observation store {self.directory}")

    def flush(self) -> None:
        self.data.flush()


def example_rng(seed: int, split: str, i: int) -> np.random.Generator:
    """Независимый поток случайности для каждого примера"""
    return np.random.default_rng([derive_seed(seed, f"gen/{split}"), i])


@dataclass(frozen=True)
class GeneratedExample:
    record: ManifestRecord
    state: StateRecord
    pre_obs: np.ndarray
    post_obs: np.ndarray


def generate_example(world: Gridworld, renderer: GridRenderer, cfg: GridConfig, split: str, i: int) -> GeneratedExample:
    rng = example_rng(cfg.seed, split, i)
    index = world.index
    action = world.actions[int(rng.integers(len(world.actions)))]
    s0 = sample_state(cfg, rng, index.n)
    s_pre, s_post = make_pair(s0, action)
    record = ManifestRecord(
        id=f"{split}-{i:06d}",
        action=action.schema,
        args=list(action.args),
        pre_obs=f"{OBS_FILE}#{2 * i}",
        post_obs=f"{OBS_FILE}#{2 * i + 1}",
    )
    state = StateRecord(id=record.id, pre_state=index.names_of(s_pre.bits), post_state=index.names_of(s_post.bits))
    return GeneratedExample(record, state, renderer.render(s_pre, rng), renderer.render(s_post, rng))


@timing_decorator
def gen_dataset(
    world: Gridworld,
    cfg: GridConfig,
    count: int,
    split: str,
    out_dir: Path,
    threads: Optional[int] = None,
) -> Path:
    """
    Сгенерировать count примеров: действие, s0, пара до/после, два наблюдения

    Пишет manifest.jsonl, states.jsonl и хранилище наблюдений в out_dir.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    out_dir = Path(out_dir)
    renderer = GridRenderer(world.index, cfg.height, cfg.width)
    index_hash = world.index.digest()
    store = ObservationStore.create(
        out_dir,
        StoreMeta(
            dims=[2 * count, cfg.height, cfg.width, renderer.channels],
            channel_names=renderer.channel_names,
            index_hash=index_hash,
            seed=cfg.seed,
            split=split,
        ),
    )

    records: list[ManifestRecord] = []
    states: list[StateRecord] = []
    threads = threads or get_settings().threads
    with ThreadPoolExecutor(max_workers=threads) as executor:
        for start in range(0, count, CHUNK):
            indices = range(start, min(start + CHUNK, count))
            for i, example in zip(indices, executor.map(lambda j: generate_example(world, renderer, cfg, split, j), indices)):
                store.data[2 * i] = example.pre_obs
                store.data[2 * i + 1] = example.post_obs
                records.append(example.record)
                states.append(example.state)
    store.flush()

    manifest = out_dir / MANIFEST_FILE
    write_jsonl(manifest, records)
    write_jsonl(out_dir / STATES_FILE, states)
    write_meta(manifest, index_hash, cfg.seed, split=split, count=count)
    write_meta(out_dir / STATES_FILE, index_hash, cfg.seed, split=split, count=count)
    logger.info(f"✅ Набор '{split}': {count} примеров, {2 * count} наблюдений -> {out_dir}")
    return manifest

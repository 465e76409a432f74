"""
Чекпоинт модели: model.json (формы, порядок параметров, конфигурация, хэш
индекса) и model.f32 (параметры подряд, little-endian float32)
"""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from learn.model import PARAM_ORDER, ModelSpec, PredicateClassifier
from logic.core import PropositionIndex
from models.records import TrainConfig
from utils.errors import ShapeMismatchError
from utils.io import check_index_hash
from utils.log_manager import get_log_manager

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("learn", logging.INFO)

HEADER_FILE = "model.json"
BLOB_FILE = "model.f32"
BLOB_DTYPE = "<f4"


def save_model(
    model: PredicateClassifier,
    directory: Path,
    config: TrainConfig,
    index_hash: str,
    channel_names: list[str],
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    spec = model.spec
    header = {
        "spec": {
            "height": spec.height,
            "width": spec.width,
            "channels": spec.channels,
            "slots": spec.slots,
            "predicates": spec.predicates,
            "hidden": spec.hidden,
        },
        "params": [[name, list(model.params[name].shape)] for name in PARAM_ORDER],
        "parameter_count": model.parameter_count,
        "config": config.model_dump(),
        "index_hash": index_hash,
        "seed": config.seed,
        "channel_names": channel_names,
        "blob": BLOB_FILE,
        "dtype": BLOB_DTYPE,
    }
    blob = np.concatenate([model.params[name].astype(BLOB_DTYPE).ravel() for name in PARAM_ORDER])
    blob.tofile(directory / BLOB_FILE)
    (directory / HEADER_FILE).write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"✅ Модель сохранена в {directory} ({model.parameter_count} параметров)")
    return directory / HEADER_FILE


def load_header(directory: Path) -> dict:
    path = Path(directory) / HEADER_FILE
    if not path.exists():
        raise FileNotFoundError(f"no model checkpoint in {directory}")
    return json.loads(path.read_text(encoding="utf-8"))


def load_model(directory: Path, index: Optional[PropositionIndex] = None, dtype=np.float32) -> PredicateClassifier:
    """
    Прочитать чекпоинт; при переданном индексе сверить его хэш

    Raises:
        IndexMismatchError: модель обучена на другом индексе пропозиций
    """
    directory = Path(directory)
    header = load_header(directory)
    if index is not None:
        check_index_hash(header["index_hash"], index.digest(), f"model {directory}")
    spec = ModelSpec(**header["spec"])
    blob = np.fromfile(directory / header["blob"], dtype=header["dtype"])
    expected = sum(int(np.prod(shape)) for _, shape in header["params"])
    if blob.size != expected:
        raise ShapeMismatchError(f"checkpoint blob holds {blob.size} values, header expects {expected}")
    params, offset = {}, 0
    for name, shape in header["params"]:
        size = int(np.prod(shape))
        params[name] = blob[offset : offset + size].reshape(shape).astype(dtype)
        offset += size
    return PredicateClassifier(spec, params)

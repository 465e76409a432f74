"""
Конфигурация pytest и общие фикстуры для тестов pgk.
"""

import json
import logging
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

# Добавляем src в путь для импортов
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

FIXTURES = Path(__file__).parent / "fixtures"

# Логи тестов пишем во временную папку, а не в src/log
_TEST_LOG_DIR = tempfile.mkdtemp(prefix="pgk-test-logs-")

# Переменные окружения для тестов
os.environ.update(
    {
        "PGK_LOG_DIR": _TEST_LOG_DIR,
        "PGK_THREADS": "2",
        "PGK_DNF_CAP": "4096",
        "LOG_RETENTION_DAYS": "7",
    }
)


def pytest_sessionfinish(session, exitstatus):
    shutil.rmtree(_TEST_LOG_DIR, ignore_errors=True)


@pytest.fixture
def temp_log_dir():
    """Создать временную директорию для логов для тестирования."""
    temp_dir = tempfile.mkdtemp()
    try:
        yield Path(temp_dir)
    finally:
        # Закрываем файловые обработчики, открытые в этой директории
        for logger_name in list(logging.Logger.manager.loggerDict.keys()):
            logger = logging.getLogger(logger_name)
            for handler in logger.handlers[:]:
                if isinstance(handler, logging.FileHandler) and handler.baseFilename.startswith(temp_dir):
                    handler.close()
                    logger.removeHandler(handler)
        shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def rng():
    """Генератор случайных чисел с фиксированным сидом."""
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def gridworld():
    """Встроенный Gridworld: домен, каноническая задача и все действия."""
    from gridworld.environment import load_gridworld

    return load_gridworld()


@pytest.fixture(scope="session")
def grid_index(gridworld):
    return gridworld.index


@pytest.fixture(scope="session")
def grid_renderer(gridworld):
    from gridworld.renderer import GridRenderer

    return GridRenderer(gridworld.index, 16, 16)


@pytest.fixture(scope="session")
def gridworld_legend():
    """Замороженная легенда индекса пропозиций Gridworld."""
    return json.loads((FIXTURES / "gridworld_legend.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def pick_world():
    """Игрушечный домен pick(a) и задача с одной чашкой."""
    from parser.pddl_parser import load_domain, load_problem

    domain = load_domain(FIXTURES / "pick_domain.pddl")
    return domain, load_problem(FIXTURES / "pick_problem.pddl", domain)


@pytest.fixture(scope="session")
def toggle_world():
    """Домен с единственным условным эффектом."""
    from parser.pddl_parser import load_domain, load_problem

    domain = load_domain(FIXTURES / "toggle_domain.pddl")
    return domain, load_problem(FIXTURES / "toggle_problem.pddl", domain)


@pytest.fixture(scope="session")
def small_index():
    """Индекс из 12 унарных пропозиций p(o0)..p(o11) для переборных проверок."""
    from logic.core import ObjectSym, PredicateDef, enumerate_propositions

    objects = [ObjectSym(i, f"o{i}") for i in range(12)]
    return enumerate_propositions([PredicateDef("p", (("?x", "object"),))], objects)


@pytest.fixture(scope="session")
def tiny_split(tmp_path_factory, gridworld):
    """Небольшой сгенерированный и размеченный набор Gridworld (train и test)."""
    from gridworld.dataset import LABELED_FILE, MANIFEST_FILE, gen_dataset
    from labeler.labeler import Labeler
    from models.records import GridConfig

    root = tmp_path_factory.mktemp("split")
    cfg = GridConfig(seed=3)
    gen_dataset(gridworld, cfg, 24, "train", root / "train")
    gen_dataset(gridworld, cfg, 12, "test", root / "test")
    labeler = Labeler(gridworld.domain, gridworld.index, gridworld.actions)
    labeler.label_dataset(root / "train" / MANIFEST_FILE, root / "train" / LABELED_FILE)
    return root

"""
Настройки окружения (.env) и производные сиды
"""

import hashlib
import os
from pathlib import Path
from typing import Optional

import psutil
from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Загружаем переменные окружения
load_dotenv()


class Settings(BaseModel):
    """Параметры процесса, читаются из переменных окружения"""

    threads: int = Field(..., ge=1, description="Верхняя граница числа рабочих потоков (PGK_THREADS)")
    log_dir: Optional[Path] = Field(None, description="Папка логов (PGK_LOG_DIR)")
    log_retention_days: int = Field(30, ge=0, description="Срок хранения логов в днях")
    dnf_cap: int = Field(4096, ge=1, description="Предел числа конъюнкций в ДНФ (PGK_DNF_CAP)")


def get_settings() -> Settings:
    """Собрать настройки из окружения"""
    default_threads = psutil.cpu_count(logical=True) or 1
    log_dir = os.getenv("PGK_LOG_DIR")
    return Settings(
        threads=int(os.getenv("PGK_THREADS", str(default_threads))),
        log_dir=Path(log_dir) if log_dir else None,
        log_retention_days=int(os.getenv("LOG_RETENTION_DAYS", "30")),
        dnf_cap=int(os.getenv("PGK_DNF_CAP", "4096")),
    )


def derive_seed(root_seed: int, stream: str) -> int:
    """
    Именованный подпоток случайности: один корневой сид на весь запуск,
    у каждого этапа свой независимый сид.
    """
    digest = hashlib.sha256(f"{root_seed}:{stream}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")

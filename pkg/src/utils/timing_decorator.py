"""
Декоратор для измерения времени выполнения этапов конвейера
"""

import functools
import logging
import time
from typing import Any, Callable

import psutil

from utils.log_manager import get_log_manager

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("timing", logging.INFO)


def _format_duration(seconds: float) -> str:
    if seconds < 1:
        return f"{seconds * 1000:.2f}ms"
    return f"{seconds:.2f}s"


def _rss_mb() -> float:
    return psutil.Process().memory_info().rss / (1024 * 1024)


def timing_decorator(func: Callable) -> Callable:
    """
    Декоратор для измерения времени выполнения функции

    Пишет в лог длительность и резидентную память процесса после вызова.

    Args:
        func: Функция для обертывания

    Returns:
        Обернутая функция с измерением времени
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> Any:
        start_time = time.time()

        try:
            result = func(*args, **kwargs)
        except Exception as e:
            time_str = _format_duration(time.time() - start_time)
            logger.error(f"❌ {func.__name__}() завершилась с ошибкой за {time_str}: {e}")
            raise

        time_str = _format_duration(time.time() - start_time)
        logger.info(f"⏱️  {func.__name__}() выполнилась за {time_str} (RSS {_rss_mb():.1f} MB)")
        return result

    return wrapper

"""
Менеджер логирования с ежедневными файлами и автоудалением старых логов
"""

import glob
import logging
import os
from datetime import datetime, timedelta
from pathlib import Path
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class LogManager:
    """Менеджер для управления логами с ежедневными файлами"""

    def __init__(self, log_dir: Path, retention_days: int = 30):
        """
        Инициализация менеджера логов

        Args:
            log_dir: Папка для хранения логов
            retention_days: Количество дней хранения логов
        """
        self.log_dir = log_dir
        self.retention_days = retention_days
        self.console_level: Optional[int] = None
        self.log_dir.mkdir(parents=True, exist_ok=True)

        # Очищаем старые логи при инициализации
        self.cleanup_old_logs()

    def get_daily_log_file(self, log_type: str = "pgk") -> Path:
        """
        Получить путь к файлу лога для текущего дня

        Args:
            log_type: Тип лога (grounding, learn, cli, etc.)

        Returns:
            Path к файлу лога
        """
        today = datetime.now().strftime("%Y-%m-%d")
        return self.log_dir / f"{log_type}_{today}.log"

    def can_write_to_log_dir(self) -> bool:
        """Проверить, можем ли мы писать в папку логов"""
        try:
            test_file = self.log_dir / "test_write.tmp"
            test_file.touch()
            test_file.unlink()
            return True
        except OSError:
            return False

    def setup_logging(self, log_type: str = "pgk", level: int = logging.DEBUG) -> logging.Logger:
        """
        Настроить логирование для указанного типа

        Args:
            log_type: Тип лога
            level: Уровень логирования

        Returns:
            Настроенный логгер
        """
        if not self.can_write_to_log_dir():
            # Если не можем писать в файл, используем только консоль
            return self._setup_console_only_logging(log_type, level)

        logger = logging.getLogger(log_type)
        logger.setLevel(level)
        logger.handlers.clear()

        formatter = logging.Formatter(LOG_FORMAT)

        log_file = self.get_daily_log_file(log_type)
        try:
            file_handler = logging.FileHandler(log_file, encoding="utf-8")
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError as e:
            print(f"Не удалось создать файловый обработчик для {log_file}: {e}")

        logger.addHandler(self._console_handler(level, formatter))

        # Отключаем распространение на корневой логгер
        logger.propagate = False
        return logger

    def _setup_console_only_logging(self, log_type: str, level: int) -> logging.Logger:
        """Настроить логирование только в консоль"""
        logger = logging.getLogger(log_type)
        logger.setLevel(level)
        logger.handlers.clear()
        logger.addHandler(self._console_handler(level, logging.Formatter(LOG_FORMAT)))
        logger.propagate = False
        return logger

    def _console_handler(self, level: int, formatter: logging.Formatter) -> logging.Handler:
        console_handler = logging.StreamHandler()
        console_handler.setLevel(max(level, self.console_level or level))
        console_handler.setFormatter(formatter)
        console_handler.set_name("console")
        return console_handler

    def set_console_level(self, level: int) -> None:
        """
        Поменять уровень консольного вывода у всех уже созданных логгеров (флаг --quiet).
        Файловые обработчики не трогаем: в файле остается полная запись.
        """
        self.console_level = level
        for name in list(logging.Logger.manager.loggerDict.keys()):
            for handler in logging.getLogger(name).handlers:
                if handler.get_name() == "console":
                    handler.setLevel(level)

    def cleanup_old_logs(self) -> int:
        """
        Удалить старые файлы логов

        Returns:
            Количество удаленных файлов
        """
        if not self.log_dir.exists():
            return 0

        try:
            cutoff_date = datetime.now() - timedelta(days=self.retention_days)
        except (OverflowError, ValueError):
            # Слишком большой срок хранения: ничего не удаляем
            return 0

        deleted_count = 0
        for log_file in glob.glob(str(self.log_dir / "*.log")):
            try:
                file_time = datetime.fromtimestamp(os.path.getctime(log_file))
                if file_time < cutoff_date:
                    os.remove(log_file)
                    deleted_count += 1
            except (OSError, ValueError):
                continue

        return deleted_count

    def get_log_files(self, log_type: Optional[str] = None) -> list[Path]:
        """Получить список файлов логов (всех или одного типа)"""
        if not self.log_dir.exists():
            return []
        pattern = f"{log_type}_*.log" if log_type else "*.log"
        return sorted(Path(f) for f in glob.glob(str(self.log_dir / pattern)))


_log_manager: Optional[LogManager] = None


def get_log_manager() -> LogManager:
    """
    Получить экземпляр менеджера логов с настройками из окружения

    Returns:
        Настроенный LogManager (один на процесс)
    """
    global _log_manager

    log_dir = Path(os.getenv("PGK_LOG_DIR") or Path(__file__).parent.parent / "log")
    retention_days = int(os.getenv("LOG_RETENTION_DAYS", "30"))

    if _log_manager is None or _log_manager.log_dir != log_dir:
        _log_manager = LogManager(log_dir, retention_days)
    return _log_manager

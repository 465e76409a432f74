"""
Точка входа pgk: разметка частичных состояний, обучение классификатора
предикатов и планирование на Gridworld
"""

import logging
import sys

from cli.commands import main as cli_main
from utils.log_manager import get_log_manager

# Получаем менеджер логов
log_manager = get_log_manager()

# Настройка логгера
logger = log_manager.setup_logging("main", logging.INFO)


def main() -> None:
    """Основная функция"""
    logger.debug(f"🚀 pgk {' '.join(sys.argv[1:])}")
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()

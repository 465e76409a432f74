"""
Исключения пакета pgk
"""

from typing import Optional


class PgkError(Exception):
    """Базовое исключение всех этапов конвейера"""


class PddlError(PgkError):
    """Ошибка разбора PDDL с позицией (строка и столбец считаются с 1)"""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, col {col})")


class PddlSyntaxError(PddlError):
    """Лексическая или синтаксическая ошибка"""


class PddlSemanticError(PddlError):
    """Неизвестный предикат/тип/объект, несовпадение арности и т.п."""


class ContradictionError(PgkError, ValueError):
    """Попытка построить противоречивое частичное состояние (pos ∧ neg ≠ ∅)"""


class UnboundVariableError(PgkError):
    """Переменная без связывающего квантора или параметра действия"""


class UnknownPropositionError(PgkError):
    """Атом не входит в перечисленный индекс пропозиций"""


class UnsatisfiableError(PgkError):
    """Пустая ДНФ: формула невыполнима"""

    def __init__(self, message: str, source: Optional[str] = None):
        self.source = source
        super().__init__(f"{message} [{source}]" if source else message)


class UnsatisfiablePrecondition(UnsatisfiableError):
    """Предусловие действия невыполнимо: такое действие никогда не применимо"""


class DnfBlowupError(PgkError):
    """Число конъюнкций превысило допустимый предел"""

    def __init__(self, source: Optional[str], cap: int):
        self.source = source
        self.cap = cap
        super().__init__(f"DNF exceeds {cap} conjunctions while compiling {source or 'formula'}")


class IllTypedArgumentError(PgkError, ValueError):
    """Аргументы действия не подходят к типам параметров схемы"""


class MalformedEffectError(PgkError, ValueError):
    """Условный эффект вне формулы эффекта или эффект не из литералов"""


class PreconditionError(PgkError):
    """Предусловие действия не выполнено в текущем состоянии"""


class PlanningError(PgkError):
    """Планировщик не нашел план"""


class SearchBudgetExceeded(PlanningError):
    """Исчерпан бюджет раскрытых вершин"""


class GoalUnsatisfiable(PlanningError):
    """ДНФ цели пуста"""


class ShapeMismatchError(PgkError, ValueError):
    """Несогласованные размеры тензоров"""


class MalformedObservationError(PgkError):
    """Наблюдение не могло быть получено рендерером"""


class DivergenceError(PgkError):
    """Функция потерь стала нечисловой во время обучения"""


class IndexMismatchError(PgkError):
    """Хэш индекса пропозиций не совпадает между этапами"""


class LabelingError(PgkError):
    """Запись манифеста нельзя разметить"""


class StageError(PgkError):
    """Ошибка одного из этапов эксперимента"""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")

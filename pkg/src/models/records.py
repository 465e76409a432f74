"""
Модели Pydantic: конфигурации запусков и записи JSONL-файлов конвейера
"""

from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class GridConfig(BaseModel):
    """Параметры симулятора Gridworld"""

    height: int = Field(16, ge=8, description="Высота сетки H")
    width: int = Field(16, ge=8, description="Ширина сетки W")
    prior: float = Field(0.05, gt=0.0, lt=1.0, description="Вероятность истинности каждой пропозиции в s0")
    seed: int = Field(0, ge=0, description="Сид генерации")


class TrainConfig(BaseModel):
    """Гиперпараметры обучения классификатора предикатов"""

    epochs: int = Field(20, ge=1, description="Число эпох")
    batch_size: int = Field(32, ge=1, description="Размер минибатча (примеров-пар)")
    lr: float = Field(1e-3, gt=0, description="Шаг Adam")
    seed: int = Field(0, ge=0, description="Сид инициализации и перемешивания")
    weighting: Literal["uniform", "class_balanced"] = Field("uniform", description="Взвешивание классов")
    beta: float = Field(0.999, gt=0, lt=1, description="β для class-balanced весов")
    regime: Literal["dnf", "oracle", "half_dnf"] = Field("dnf", description="Режим обучения")
    hidden: int = Field(128, ge=1, description="Ширина скрытого слоя")
    dtype: Literal["float32", "float64"] = Field("float32", description="Тип параметров")
    curve_subset: int = Field(256, ge=1, description="Размер фиксированного подмножества для train F1")


class RunConfig(BaseModel):
    """Параметры одного вызова CLI"""

    command: str = Field(..., description="Подкоманда")
    domain: Optional[Path] = Field(None, description="Файл домена PDDL")
    problem: Optional[Path] = Field(None, description="Файл задачи PDDL")
    data: Optional[Path] = Field(None, description="Каталог набора данных")
    model: Optional[Path] = Field(None, description="Каталог чекпоинта")
    manifest: Optional[Path] = Field(None, description="Манифест JSONL")
    out: Path = Field(Path("out"), description="Каталог или файл результата")
    seed: int = Field(7, ge=0, description="Корневой сид")
    count: int = Field(100, ge=1, description="Число примеров")
    regime: Literal["dnf", "oracle", "half_dnf"] = Field("dnf", description="Режим обучения")
    epochs: int = Field(20, ge=1, description="Число эпох")
    episodes: int = Field(50, ge=0, description="Число эпизодов замкнутого цикла")
    horizon: int = Field(100, ge=0, description="Горизонт эпизода")

    @model_validator(mode="after")
    def validate_paths(self):
        """Все входные пути должны существовать до запуска"""
        for name in ("domain", "problem", "data", "model", "manifest"):
            path = getattr(self, name)
            if path is not None and not path.exists():
                raise ValueError(f"{name} path does not exist: {path}")
        return self


class ManifestRecord(BaseModel):
    """Строка манифеста: действие и ссылки на наблюдения до/после"""

    id: str = Field(..., description="Идентификатор примера")
    action: str = Field(..., description="Имя схемы действия")
    args: list[str] = Field(default_factory=list, description="Аргументы действия (имена объектов)")
    pre_obs: str = Field(..., description="Ссылка на наблюдение до действия (файл#строка)")
    post_obs: str = Field(..., description="Ссылка на наблюдение после действия")
    masks: Optional[list[str]] = Field(None, description="Ссылки на маски аргументов")

    model_config = ConfigDict(extra="ignore")


class LabeledRecord(ManifestRecord):
    """Строка манифеста с частичными метками до/после"""

    pre_pos: list[str] = Field(default_factory=list, description="Истинные до действия")
    pre_neg: list[str] = Field(default_factory=list, description="Ложные до действия")
    post_pos: list[str] = Field(default_factory=list, description="Истинные после действия")
    post_neg: list[str] = Field(default_factory=list, description="Ложные после действия")
    advisories: list[str] = Field(default_factory=list, description="Коды предупреждений о пустых метках")


class StateRecord(BaseModel):
    """Полные состояния примера (только для оценки и режима oracle)"""

    id: str = Field(..., description="Идентификатор примера")
    pre_state: list[str] = Field(..., description="Истинные пропозиции до действия")
    post_state: list[str] = Field(..., description="Истинные пропозиции после действия")


class GroundActionRecord(BaseModel):
    """Строка результата `pgk ground`"""

    action: str = Field(..., description="Имя схемы")
    args: list[str] = Field(..., description="Аргументы")
    pre_pos: list[str] = Field(..., description="Положительная часть метки до")
    pre_neg: list[str] = Field(..., description="Отрицательная часть метки до")
    post_pos: list[str] = Field(..., description="Положительная часть метки после")
    post_neg: list[str] = Field(..., description="Отрицательная часть метки после")
    advisories: list[str] = Field(default_factory=list, description="Коды предупреждений")


class StoreMeta(BaseModel):
    """JSON-сопровождение двоичного файла наблюдений"""

    dims: list[int] = Field(..., description="Размеры (строки, H, W, C)")
    channel_names: list[str] = Field(..., description="Имена каналов")
    dtype: str = Field("<f4", description="Тип элементов")
    index_hash: str = Field(..., description="Хэш индекса пропозиций")
    seed: int = Field(..., description="Сид генерации")
    split: str = Field(..., description="Имя части (train/test)")


class LoopStep(BaseModel):
    """Один шаг замкнутого цикла восприятие-план-действие"""

    episode: int = Field(..., description="Номер эпизода")
    step: int = Field(..., description="Номер шага")
    observation: str = Field(..., description="Ссылка на наблюдение (эпизод#шаг)")
    predicted: list[str] = Field(..., description="Предсказанное состояние")
    action: Optional[str] = Field(None, description="Голова плана")
    executed: bool = Field(..., description="Действие выполнено в симуляторе")
    true_state: list[str] = Field(..., description="Истинное состояние после шага")
    goal_satisfied: bool = Field(..., description="Цель достигнута")
    plan_length: Optional[int] = Field(None, description="Длина плана от предсказанного состояния")

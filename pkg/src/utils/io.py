"""
Чтение/запись артефактов: JSONL с pydantic-записями, JSON-сопровождение,
CSV с заголовком-комментарием (хэш индекса и сид)
"""

import csv
import json
from pathlib import Path
from typing import Iterable, Iterator, Optional, Type, TypeVar

from pydantic import BaseModel

from utils.errors import IndexMismatchError

T = TypeVar("T", bound=BaseModel)


def meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_meta(path: Path, index_hash: str, seed: int, **extra) -> None:
    payload = {"index_hash": index_hash, "seed": seed, **extra}
    meta_path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_meta(path: Path) -> dict:
    sidecar = meta_path(path)
    if not sidecar.exists():
        return {}
    return json.loads(sidecar.read_text(encoding="utf-8"))


def check_index_hash(found: Optional[str], expected: str, what: str) -> None:
    """Сверить хэш индекса пропозиций между этапами"""
    if found is not None and found != expected:
        raise IndexMismatchError(f"{what} was built for index {found}, current index is {expected}")


def write_jsonl(path: Path, records: Iterable[BaseModel]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
            count += 1
    return count


def iter_jsonl_lines(path: Path) -> Iterator[tuple[int, str]]:
    """Непустые строки файла с номерами (с 1)"""
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if line.strip():
                yield number, line


def read_jsonl(path: Path, model: Type[T]) -> list[T]:
    return [model.model_validate_json(line) for _, line in iter_jsonl_lines(path)]


def write_csv(path: Path, header: list[str], rows: Iterable[list], index_hash: str, seed: int) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# index_hash={index_hash}, seed={seed}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path: Path) -> tuple[dict, list[dict]]:
    """(метаданные из комментария, строки)"""
    with open(path, encoding="utf-8", newline="") as f:
        first = f.readline()
        meta = {}
        if first.startswith("#"):
            for part in first[1:].split(","):
                key, _, value = part.strip().partition("=")
                meta[key] = value
        else:
            f.seek(0)
        return meta, list(csv.DictReader(f))

"""
Разметка манифестов действий частичными метками состояний до/после
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from grounding.actions import GroundAction, ground_action
from logic.core import PartialState, PropositionIndex
from models.records import LabeledRecord, ManifestRecord
from parser.pddl_parser import Domain
from utils.errors import LabelingError, PgkError
from utils.io import check_index_hash, iter_jsonl_lines, read_meta, write_jsonl, write_meta
from utils.log_manager import get_log_manager
from utils.settings import get_settings
from utils.timing_decorator import timing_decorator

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("labeler", logging.INFO)


@dataclass
class LabelSummary:
    """Итоги разметки: счетчики меток по предикатам и предупреждений"""

    records: int = 0
    labeled: int = 0
    skipped: int = 0
    positives: Counter = field(default_factory=Counter)
    negatives: Counter = field(default_factory=Counter)
    advisories: Counter = field(default_factory=Counter)
    labeled_props: int = 0
    n: int = 0

    @property
    def labeled_fraction(self) -> float:
        """Средняя доля размеченных пропозиций на одно наблюдение"""
        if not self.labeled or not self.n:
            return 0.0
        return self.labeled_props / (2 * self.labeled * self.n)

    @property
    def exit_code(self) -> int:
        return 1 if self.skipped > max(1, 0.01 * self.records) else 0

    def add(self, pre: PartialState, post: PartialState, advisories: Sequence[str], index: PropositionIndex) -> None:
        self.labeled += 1
        for label in (pre, post):
            for i in label.pos_indices():
                self.positives[index.predicates[index.predicate_of(i)].name] += 1
            for i in label.neg_indices():
                self.negatives[index.predicates[index.predicate_of(i)].name] += 1
            self.labeled_props += label.size()
        self.advisories.update(advisories)

    def to_dict(self) -> dict:
        return {
            "records": self.records,
            "labeled": self.labeled,
            "skipped": self.skipped,
            "positives": dict(sorted(self.positives.items())),
            "negatives": dict(sorted(self.negatives.items())),
            "advisories": dict(sorted(self.advisories.items())),
            "labeled_fraction": round(self.labeled_fraction, 6),
        }


class Labeler:
    """Метки примера = свернутые ДНФ заземленного действия"""

    def __init__(self, domain: Domain, index: PropositionIndex, actions: Sequence[GroundAction] = ()):
        self.domain = domain
        self.index = index
        # кэш заземленных действий этого разметчика
        self._cache: dict[tuple[str, tuple[str, ...]], GroundAction] = {(a.schema, a.args): a for a in actions}

    def ground(self, schema_name: str, args: tuple[str, ...]) -> GroundAction:
        key = (schema_name, args)
        action = self._cache.get(key)
        if action is None:
            schema = self.domain.action(schema_name)
            if schema is None:
                raise LabelingError(f"unknown action '{schema_name}'")
            action = self._cache.setdefault(key, ground_action(schema, args, self.index))
        return action

    def label_example(self, record: ManifestRecord) -> LabeledRecord:
        """
        Присоединить к записи ŝ_pre и ŝ_post действия

        Raises:
            LabelingError: неизвестное действие
            IllTypedArgumentError: аргументы не подходят к параметрам
        """
        action = self.ground(record.action, tuple(record.args))
        for code in action.advisories:
            logger.warning(f"⚠️ {record.id}: {code} для {action.name}")
        return LabeledRecord(
            **record.model_dump(),
            pre_pos=self.index.names_of(action.pre_label.pos),
            pre_neg=self.index.names_of(action.pre_label.neg),
            post_pos=self.index.names_of(action.post_label.pos),
            post_neg=self.index.names_of(action.post_label.neg),
            advisories=list(action.advisories),
        )

    def _label_line(self, item: tuple[int, str]) -> tuple[Optional[LabeledRecord], Optional[str]]:
        number, line = item
        try:
            record = ManifestRecord.model_validate_json(line)
            return self.label_example(record), None
        except ValidationError as e:
            return None, f"line {number}: malformed record ({e.error_count()} errors)"
        except PgkError as e:
            return None, f"line {number}: {e}"

    @timing_decorator
    def label_dataset(self, manifest: Path, out: Path, threads: Optional[int] = None) -> LabelSummary:
        """
        Разметить манифест построчно; плохие записи пропускаются с записью в лог

        Порядок вывода совпадает с порядком манифеста.
        """
        manifest, out = Path(manifest), Path(out)
        meta = read_meta(manifest)
        check_index_hash(meta.get("index_hash"), self.index.digest(), f"manifest {manifest}")

        summary = LabelSummary(n=self.index.n)
        labeled: list[LabeledRecord] = []
        threads = threads or get_settings().threads
        with ThreadPoolExecutor(max_workers=threads) as executor:
            for record, reason in executor.map(self._label_line, iter_jsonl_lines(manifest)):
                summary.records += 1
                if record is None:
                    summary.skipped += 1
                    logger.warning(f"⏭️ Пропуск записи: {reason}")
                    continue
                labeled.append(record)
                action = self.ground(record.action, tuple(record.args))
                summary.add(action.pre_label, action.post_label, action.advisories, self.index)

        write_jsonl(out, labeled)
        write_meta(out, self.index.digest(), int(meta.get("seed", 0)), summary=summary.to_dict())
        logger.info(
            f"✅ Размечено {summary.labeled} из {summary.records} (пропущено {summary.skipped}), "
            f"доля размеченных пропозиций {summary.labeled_fraction:.3f}"
        )
        return summary

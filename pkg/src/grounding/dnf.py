"""
Заземление формул, компиляция в ДНФ и свертка ДНФ в частичное состояние
"""

import functools
import logging
import operator
from dataclasses import dataclass
from typing import Optional

import numpy as np

from logic.core import ClosedState, PartialState, PropositionIndex
from logic.formula import And, Atom, Exists, Forall, Formula, Imply, Not, Or, When, is_variable
from utils.errors import DnfBlowupError, MalformedEffectError, UnboundVariableError, UnsatisfiableError
from utils.log_manager import get_log_manager
from utils.settings import get_settings

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("grounding", logging.INFO)

# предел для переборного оракула determined_set
MAX_ORACLE_N = 20


@dataclass(frozen=True)
class Dnf:
    """
    Дизъюнкция конъюнкций литералов; каждая конъюнкция - PartialState

    Пустой список - невыполнимая формула, пустая конъюнкция - тавтология.
    """

    conjunctions: tuple[PartialState, ...]
    n: int

    def __len__(self) -> int:
        return len(self.conjunctions)

    @property
    def is_unsatisfiable(self) -> bool:
        return not self.conjunctions

    @property
    def is_tautology(self) -> bool:
        return any(c.is_empty for c in self.conjunctions)

    def satisfied_by(self, state: ClosedState) -> bool:
        return any(c.satisfied_by(state) for c in self.conjunctions)

    @classmethod
    def from_pairs(cls, pairs, n: int) -> "Dnf":
        return cls(tuple(PartialState(pos, neg, n) for pos, neg in pairs), n)


def ground(f: Formula, index: PropositionIndex, binding: Optional[dict[str, str]] = None) -> Formula:
    """
    Раскрыть кванторы по объектам подходящего типа и подставить параметры

    forall -> and, exists -> or; узлы when сохраняются.
    """
    binding = binding or {}
    if isinstance(f, Atom):
        terms = tuple(binding.get(t, t) for t in f.terms)
        for term in terms:
            if is_variable(term):
                raise UnboundVariableError(f"unbound variable {term} in {f}")
        return Atom(f.predicate, terms)
    if isinstance(f, Not):
        return Not(ground(f.arg, index, binding))
    if isinstance(f, And):
        return And(tuple(ground(a, index, binding) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(ground(a, index, binding) for a in f.args))
    if isinstance(f, Imply):
        return Imply(ground(f.antecedent, index, binding), ground(f.consequent, index, binding))
    if isinstance(f, When):
        return When(ground(f.condition, index, binding), ground(f.effect, index, binding))
    if isinstance(f, (Forall, Exists)):
        objects = index.objects_of_type(f.type_name)
        if not objects:
            kind = "forall" if isinstance(f, Forall) else "exists"
            logger.warning(f"⚠️ {kind} {f.var} - {f.type_name}: нет объектов этого типа, раскрытие пустое")
        parts = tuple(ground(f.body, index, {**binding, f.var: o.name}) for o in objects)
        return And(parts) if isinstance(f, Forall) else Or(parts)
    raise TypeError(f"not a formula node: {f!r}")


class _DnfBuilder:
    """Перевод в ДНФ через отрицательную нормальную форму с ограничением размера"""

    def __init__(self, index: PropositionIndex, cap: int, effect: bool, source: Optional[str]):
        self.index = index
        self.cap = cap
        self.effect = effect
        self.source = source

    def _bounded(self, pairs) -> list[tuple[int, int]]:
        seen: dict[tuple[int, int], None] = {}
        for pair in pairs:
            seen[pair] = None
            if len(seen) > self.cap:
                raise DnfBlowupError(self.source, self.cap)
        return list(seen)

    def _product(self, parts: list[list[tuple[int, int]]]) -> list[tuple[int, int]]:
        result = [(0, 0)]
        for part in parts:
            result = self._bounded(
                (p1 | p2, n1 | n2)
                for p1, n1 in result
                for p2, n2 in part
                # противоречивые конъюнкции отбрасываем
                if not ((p1 | p2) & (n1 | n2))
            )
            if not result:
                break
        return result

    def _union(self, parts: list[list[tuple[int, int]]]) -> list[tuple[int, int]]:
        return self._bounded(pair for part in parts for pair in part)

    def build(self, f: Formula, negated: bool = False) -> list[tuple[int, int]]:
        if isinstance(f, Atom):
            bit = 1 << self.index.atom_index(f.predicate, f.terms)
            return [(0, bit)] if negated else [(bit, 0)]
        if isinstance(f, Not):
            return self.build(f.arg, not negated)
        if isinstance(f, And):
            parts = [self.build(a, negated) for a in f.args]
            return self._union(parts) if negated else self._product(parts)
        if isinstance(f, Or):
            parts = [self.build(a, negated) for a in f.args]
            return self._product(parts) if negated else self._union(parts)
        if isinstance(f, Imply):
            return self.build(Or((Not(f.antecedent), f.consequent)), negated)
        if isinstance(f, When):
            if not self.effect or negated:
                raise MalformedEffectError(f"conditional effect outside an effect formula [{self.source}]")
            # действие может ничего не изменить: добавляем пустую конъюнкцию
            return self._union([self.build(f.effect), [(0, 0)]])
        if isinstance(f, (Forall, Exists)):
            raise UnboundVariableError(f"quantifier over {f.var} must be grounded first [{self.source}]")
        raise TypeError(f"not a formula node: {f!r}")


def to_dnf(
    f: Formula,
    index: PropositionIndex,
    cap: Optional[int] = None,
    effect: bool = False,
    source: Optional[str] = None,
) -> Dnf:
    """
    Скомпилировать заземленную формулу без кванторов в ДНФ

    Args:
        f: формула
        index: индекс пропозиций
        cap: предел числа конъюнкций (по умолчанию PGK_DNF_CAP)
        effect: формула эффекта, в ней разрешен when
        source: имя действия для диагностики

    Raises:
        DnfBlowupError: число конъюнкций превысило cap
        MalformedEffectError: when вне формулы эффекта
    """
    cap = cap if cap is not None else get_settings().dnf_cap
    pairs = _DnfBuilder(index, cap, effect, source).build(f)
    return Dnf.from_pairs(pairs, index.n)


def collapse(d: Dnf, source: Optional[str] = None) -> PartialState:
    """Свертка ДНФ: пересечение всех положительных и всех отрицательных множеств"""
    if d.is_unsatisfiable:
        raise UnsatisfiableError("formula has no satisfiable conjunction", source)
    pos = functools.reduce(operator.and_, (c.pos for c in d.conjunctions))
    neg = functools.reduce(operator.and_, (c.neg for c in d.conjunctions))
    return PartialState(pos, neg, d.n)


def determined_set(d: Dnf) -> PartialState:
    """
    Переборный оракул для collapse: какие пропозиции одинаковы во всех
    состояниях, удовлетворяющих ДНФ. Только для N <= 20.
    """
    if d.n > MAX_ORACLE_N:
        raise ValueError(f"determined_set enumerates 2^N states, N={d.n} is too large")
    states = np.arange(1 << d.n, dtype=np.uint32)
    satisfied = np.zeros(states.shape, dtype=bool)
    for c in d.conjunctions:
        pos, neg = np.uint32(c.pos), np.uint32(c.neg)
        satisfied |= ((states & pos) == pos) & ((states & neg) == 0)
    models = states[satisfied]
    if models.size == 0:
        raise UnsatisfiableError("no state satisfies the DNF")
    mask = np.uint32((1 << d.n) - 1)
    pos = int(np.bitwise_and.reduce(models))
    neg = int(np.bitwise_and.reduce(~models & mask))
    return PartialState(pos, neg, d.n)

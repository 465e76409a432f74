"""
Поиск плана по заземленным действиям: жадный best-first с эвристикой
goal-count и поиск в ширину как эталон для малых задач
"""

import heapq
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from grounding.actions import GroundAction, apply, check_pre
from grounding.dnf import Dnf, ground, to_dnf
from logic.core import ClosedState, PropositionIndex
from logic.formula import Formula
from utils.errors import GoalUnsatisfiable, PreconditionError, SearchBudgetExceeded
from utils.log_manager import get_log_manager

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("planner", logging.INFO)

DEFAULT_BUDGET = 100_000


@dataclass(frozen=True)
class Plan:
    actions: tuple[GroundAction, ...]
    expanded: int = 0

    @property
    def depth(self) -> int:
        return len(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def names(self) -> list[str]:
        return [a.name for a in self.actions]


def compile_goal(goal: Formula, index: PropositionIndex) -> Dnf:
    """
    Raises:
        GoalUnsatisfiable: ДНФ цели пуста
    """
    dnf = to_dnf(ground(goal, index), index, source="goal")
    if dnf.is_unsatisfiable:
        raise GoalUnsatisfiable("goal has no satisfiable conjunction")
    return dnf


def goal_count(goal: Dnf, state: ClosedState) -> int:
    """Наименьшее по конъюнкциям цели число невыполненных литералов"""
    return min((c.pos & ~state.bits).bit_count() + (c.neg & state.bits).bit_count() for c in goal.conjunctions)


def _extract(parents: dict[int, tuple[Optional[int], Optional[int]]], bits: int, actions) -> tuple[GroundAction, ...]:
    path = []
    while True:
        parent, action = parents[bits]
        if parent is None:
            break
        path.append(actions[action])
        bits = parent
    return tuple(reversed(path))


def _successors(state: ClosedState, actions: Sequence[GroundAction]):
    for i, action in enumerate(actions):
        if check_pre(action, state):
            yield i, apply(action, state)


def greedy_best_first(
    init: ClosedState, goal: Dnf, actions: Sequence[GroundAction], budget: int = DEFAULT_BUDGET
) -> Plan:
    """
    Жадный best-first: очередь по (h, порядок вставки), повторы отсекаются
    по битам состояния при порождении

    Raises:
        SearchBudgetExceeded: раскрыто больше budget вершин без цели
    """
    counter = itertools.count()
    parents: dict[int, tuple[Optional[int], Optional[int]]] = {init.bits: (None, None)}
    frontier = [(goal_count(goal, init), next(counter), init.bits)]
    expanded = 0
    while frontier:
        _, _, bits = heapq.heappop(frontier)
        state = ClosedState(bits, init.n)
        if goal.satisfied_by(state):
            return Plan(_extract(parents, bits, actions), expanded)
        if expanded >= budget:
            raise SearchBudgetExceeded(f"no plan within {budget} expanded nodes")
        expanded += 1
        for i, successor in _successors(state, actions):
            if successor.bits in parents:
                continue
            parents[successor.bits] = (bits, i)
            heapq.heappush(frontier, (goal_count(goal, successor), next(counter), successor.bits))
    raise SearchBudgetExceeded(f"state space exhausted after {expanded} expansions without reaching the goal")


def breadth_first(init: ClosedState, goal: Dnf, actions: Sequence[GroundAction], budget: int = DEFAULT_BUDGET) -> Plan:
    """Поиск в ширину: эталон оптимальной длины для небольших задач"""
    parents: dict[int, tuple[Optional[int], Optional[int]]] = {init.bits: (None, None)}
    queue = deque([init.bits])
    expanded = 0
    while queue:
        bits = queue.popleft()
        state = ClosedState(bits, init.n)
        if goal.satisfied_by(state):
            return Plan(_extract(parents, bits, actions), expanded)
        if expanded >= budget:
            raise SearchBudgetExceeded(f"no plan within {budget} expanded nodes")
        expanded += 1
        for i, successor in _successors(state, actions):
            if successor.bits not in parents:
                parents[successor.bits] = (bits, i)
                queue.append(successor.bits)
    raise SearchBudgetExceeded(f"state space exhausted after {expanded} expansions without reaching the goal")


def plan(
    init: ClosedState,
    goal: Formula,
    actions: Sequence[GroundAction],
    index: PropositionIndex,
    budget: int = DEFAULT_BUDGET,
) -> Plan:
    """
    Найти план из init в состояние, удовлетворяющее goal

    Raises:
        GoalUnsatisfiable: ДНФ цели пуста
        SearchBudgetExceeded: бюджет исчерпан
    """
    goal_dnf = compile_goal(goal, index)
    result = greedy_best_first(init, goal_dnf, actions, budget)
    logger.debug(f"🔍 План длины {result.depth}, раскрыто {result.expanded}")
    return result


def execute(init: ClosedState, actions: Sequence[GroundAction]) -> ClosedState:
    state = init
    for action in actions:
        state = apply(action, state)
    return state


def validate_plan(init: ClosedState, result: Plan, goal: Dnf) -> bool:
    """Проиграть план через apply и проверить цель; неприменимое действие - провал"""
    try:
        return goal.satisfied_by(execute(init, result.actions))
    except PreconditionError:
        return False

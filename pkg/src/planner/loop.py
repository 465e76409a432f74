"""
Замкнутый цикл восприятие-план-действие против симулятора Gridworld
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from gridworld.environment import Disturbance, Gridworld, no_disturbance, random_trophy_state, relock_door
from gridworld.renderer import GridRenderer
from grounding.actions import GroundAction, apply, check_pre
from grounding.dnf import Dnf
from learn.perception import DEFAULT_THRESHOLD, Perception, predict_state
from logic.core import ClosedState
from models.records import LoopStep
from planner.search import DEFAULT_BUDGET, compile_goal, greedy_best_first
from utils.errors import PlanningError
from utils.log_manager import get_log_manager
from utils.settings import derive_seed

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("planner", logging.INFO)


@dataclass
class LoopTrace:
    episode: int
    steps: list[LoopStep] = field(default_factory=list)
    success: bool = False

    @property
    def plan_lengths(self) -> list[int]:
        return [s.plan_length for s in self.steps if s.plan_length is not None]


@dataclass
class LoopReport:
    traces: list[LoopTrace]
    baseline: list[bool]

    @property
    def success_rate(self) -> float:
        return sum(t.success for t in self.traces) / len(self.traces) if self.traces else 0.0

    @property
    def baseline_rate(self) -> float:
        return sum(self.baseline) / len(self.baseline) if self.baseline else 0.0

    def summary(self) -> dict:
        return {
            "episodes": len(self.traces),
            "success_rate": round(self.success_rate, 6),
            "baseline_success_rate": round(self.baseline_rate, 6),
            "mean_steps": round(float(np.mean([len(t.steps) for t in self.traces])), 3) if self.traces else 0.0,
        }


class CachedPlanner:
    """
    Планы по битам предсказанного состояния; найденный план кладет в кэш
    свои суффиксы для всех состояний вдоль пути
    """

    def __init__(self, goal: Dnf, actions: Sequence[GroundAction], budget: int = DEFAULT_BUDGET):
        self.goal = goal
        self.actions = actions
        self.budget = budget
        self.cache: dict[int, Optional[tuple[GroundAction, ...]]] = {}

    def __call__(self, state: ClosedState) -> Optional[tuple[GroundAction, ...]]:
        if state.bits in self.cache:
            return self.cache[state.bits]
        try:
            found = greedy_best_first(state, self.goal, self.actions, self.budget)
        except PlanningError as e:
            logger.debug(f"⚠️ План не найден: {e}")
            self.cache[state.bits] = None
            return None
        current = state
        for k, action in enumerate(found.actions):
            self.cache.setdefault(current.bits, found.actions[k:])
            current = apply(action, current)
        self.cache.setdefault(current.bits, ())
        return self.cache[state.bits]


def closed_loop(
    state: ClosedState,
    perception: Perception,
    renderer: GridRenderer,
    goal: Dnf,
    actions: Sequence[GroundAction],
    horizon: int,
    rng: np.random.Generator,
    disturbance: Disturbance = no_disturbance,
    episode: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    planner: Optional[CachedPlanner] = None,
) -> LoopTrace:
    """
    Каждый шаг: отрисовать истинное состояние, предсказать символьное
    состояние, спланировать от него и выполнить первое действие, если его
    предусловие верно в истинном состоянии. Иначе шаг записывается как
    неудачный и цикл заново воспринимает среду.
    """
    index = renderer.index
    planner = planner or CachedPlanner(goal, actions)
    trace = LoopTrace(episode)
    for step in range(horizon):
        obs = renderer.render(state, rng)
        predicted = predict_state(perception, obs, threshold)
        steps = planner(predicted)
        length = None if steps is None else len(steps)
        head = steps[0] if steps else None

        executed = head is not None and check_pre(head, state)
        if executed:
            state = apply(head, state)
        state = disturbance(state, step)
        satisfied = goal.satisfied_by(state)
        trace.steps.append(
            LoopStep(
                episode=episode,
                step=step,
                observation=f"episode-{episode:04d}#{step}",
                predicted=index.names_of(predicted.bits),
                action=None if head is None else head.name,
                executed=executed,
                true_state=index.names_of(state.bits),
                goal_satisfied=satisfied,
                plan_length=length,
            )
        )
        if satisfied:
            trace.success = True
            break
    return trace


def random_actions(
    state: ClosedState,
    goal: Dnf,
    actions: Sequence[GroundAction],
    horizon: int,
    rng: np.random.Generator,
    disturbance: Disturbance = no_disturbance,
) -> bool:
    """Базовый уровень: равновероятное действие из всех заземленных каждый шаг"""
    for step in range(horizon):
        action = actions[int(rng.integers(len(actions)))]
        if check_pre(action, state):
            state = apply(action, state)
        state = disturbance(state, step)
        if goal.satisfied_by(state):
            return True
    return False


def _disturbance(index, disturb: bool, at_step: int) -> Disturbance:
    return relock_door(index, at_step) if disturb else no_disturbance


def run_episodes(
    world: Gridworld,
    perception: Perception,
    renderer: GridRenderer,
    episodes: int,
    horizon: int,
    seed: int,
    disturbed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> LoopReport:
    """
    Прогнать эпизоды на случайных разрешимых задачах с трофеем; первые
    disturbed эпизодов получают повторное запирание двери
    """
    index = world.index
    goal = compile_goal(world.problem.goal, index)
    planner = CachedPlanner(goal, world.actions, budget)
    traces, baseline = [], []
    for episode in range(episodes):
        rng = np.random.default_rng([derive_seed(seed, "loop"), episode])
        start = random_trophy_state(index, rng)
        at_step = int(rng.integers(2, 8))
        disturb = episode < disturbed

        trace = closed_loop(
            start, perception, renderer, goal, world.actions, horizon, rng,
            _disturbance(index, disturb, at_step), episode, planner=planner,
        )
        traces.append(trace)
        baseline_rng = np.random.default_rng([derive_seed(seed, "loop/random"), episode])
        baseline.append(
            random_actions(start, goal, world.actions, horizon, baseline_rng, _disturbance(index, disturb, at_step))
        )
        logger.info(
            f"{'✅' if trace.success else '❌'} Эпизод {episode}: шагов {len(trace.steps)}, "
            f"случайная политика {'успех' if baseline[-1] else 'неудача'}"
        )
    report = LoopReport(traces, baseline)
    logger.info(
        f"✅ Замкнутый цикл: успех {report.success_rate:.2%}, случайные действия {report.baseline_rate:.2%}"
    )
    return report

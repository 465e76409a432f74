"""
Симулятор Gridworld: загрузка домена, сэмплер состояний, пары до/после,
случайные разрешимые задачи и возмущения
"""

import functools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from gridworld.renderer import ROOM_TYPE
from grounding.actions import GroundAction, ground_all
from logic.core import ClosedState, PropositionIndex, apply_partial
from models.records import GridConfig
from parser.pddl_parser import Domain, Problem, load_domain, load_problem
from utils.log_manager import get_log_manager

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("gridworld", logging.INFO)

DATA_DIR = Path(__file__).parent / "data"
DOMAIN_PATH = DATA_DIR / "gridworld_domain.pddl"
PROBLEM_PATH = DATA_DIR / "trophy_problem.pddl"

Disturbance = Callable[[ClosedState, int], ClosedState]


@dataclass(frozen=True)
class Gridworld:
    """Домен, каноническая задача и все заземленные действия"""

    domain: Domain
    problem: Problem
    actions: tuple[GroundAction, ...]

    @property
    def index(self) -> PropositionIndex:
        return self.problem.index


@functools.lru_cache(maxsize=1)
def load_gridworld() -> Gridworld:
    domain = load_domain(DOMAIN_PATH)
    problem = load_problem(PROBLEM_PATH, domain)
    actions = tuple(ground_all(domain, problem.index))
    logger.info(f"✅ Gridworld: N={problem.index.n}, действий {len(actions)}")
    return Gridworld(domain, problem, actions)


def sample_state(cfg: GridConfig, rng: np.random.Generator, n: int) -> ClosedState:
    """Каждая из N пропозиций истинна независимо с вероятностью cfg.prior"""
    return ClosedState.from_array(rng.random(n) < cfg.prior)


def make_pair(s0: ClosedState, action: GroundAction) -> tuple[ClosedState, ClosedState]:
    """s_pre = s0 ⊕ метка до, s_post = s_pre ⊕ метка после"""
    s_pre = apply_partial(s0, action.pre_label)
    s_post = apply_partial(s_pre, action.post_label)
    return s_pre, s_post


def random_trophy_state(index: PropositionIndex, rng: np.random.Generator) -> ClosedState:
    """
    Случайное разрешимое начальное состояние задачи с трофеем

    Ключ от двери всегда в комнате агента, ключ от сундука лежит в любой
    комнате, сундук заперт или нет, дверь заперта или нет.
    """
    rooms = ["room_a", "room_b"]
    home = rooms[int(rng.integers(2))]
    facts = [
        f"in(agent,{home})",
        "in(door,room_a)",
        "in(door,room_b)",
        f"in(door_key,{home})",
        f"in(chest,{rooms[int(rng.integers(2))]})",
        f"in(chest_key,{rooms[int(rng.integers(2))]})",
        "in(trophy,chest)",
        "connects(door,room_a,room_b)",
        "connects(door,room_b,room_a)",
        "matches(door_key,door)",
        "matches(chest_key,chest)",
    ]
    for lockable in ("door", "chest"):
        state = int(rng.integers(3))
        # 0 - открыт, 1 - закрыт, 2 - закрыт и заперт
        if state >= 1:
            facts.append(f"closed({lockable})")
        if state == 2:
            facts.append(f"locked({lockable})")
    return ClosedState(index.bits_of(facts), index.n)


def relock_door(index: PropositionIndex, at_step: int) -> Disturbance:
    """
    Возмущение: начиная с шага at_step симулятор один раз закрывает и запирает
    дверь, как только ключ от двери у агента или лежит в его комнате
    """
    closed, locked = index.lookup("closed(door)"), index.lookup("locked(door)")
    held = index.lookup("in(door_key,agent)")
    rooms = [
        (index.lookup(f"in(agent,{room.name})"), index.lookup(f"in(door_key,{room.name})"))
        for room in index.objects_of_type(ROOM_TYPE)
    ]
    fired = False

    def disturb(state: ClosedState, step: int) -> ClosedState:
        nonlocal fired
        if fired or step < at_step:
            return state
        if held not in state and not any(agent in state and key in state for agent, key in rooms):
            return state
        fired = True
        logger.info(f"🔒 Шаг {step}: дверь снова заперта")
        return ClosedState(state.bits | (1 << closed) | (1 << locked), state.n)

    return disturb


def no_disturbance(state: ClosedState, step: int) -> ClosedState:
    return state


def action_by_name(world: Gridworld, name: str) -> Optional[GroundAction]:
    return next((a for a in world.actions if a.name == name), None)

"""
Заземленные действия: метки до/после, проверка предусловия и применение эффекта
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from grounding.dnf import Dnf, collapse, ground, to_dnf
from logic.core import ClosedState, PartialState, PropositionIndex
from logic.formula import And, Atom, Formula, Not, When
from parser.pddl_parser import ActionSchema, Domain
from utils.errors import IllTypedArgumentError, MalformedEffectError, PreconditionError, UnsatisfiablePrecondition
from utils.log_manager import get_log_manager
from utils.settings import get_settings
from utils.timing_decorator import timing_decorator

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("grounding", logging.INFO)

PRE_LABEL_EMPTY = "pre_label_empty"
POST_LABEL_EMPTY = "post_label_empty"


@dataclass(frozen=True)
class EffectRule:
    """Условное правило эффекта: если condition верно в состоянии до действия"""

    condition: Dnf
    add: int
    delete: int


@dataclass(frozen=True)
class GroundAction:
    schema: str
    args: tuple[str, ...]
    pre_dnf: Dnf
    eff_dnf: Dnf
    pre_label: PartialState
    post_label: PartialState
    rules: tuple[EffectRule, ...]
    advisories: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        return f"{self.schema}({','.join(self.args)})"


def _literals(f: Formula, index: PropositionIndex, source: str) -> tuple[int, int]:
    """(add, delete) для конъюнкции литералов"""
    if isinstance(f, Atom):
        return 1 << index.atom_index(f.predicate, f.terms), 0
    if isinstance(f, Not) and isinstance(f.arg, Atom):
        return 0, 1 << index.atom_index(f.arg.predicate, f.arg.terms)
    if isinstance(f, And):
        add = delete = 0
        for arg in f.args:
            a, d = _literals(arg, index, source)
            add, delete = add | a, delete | d
        return add, delete
    raise MalformedEffectError(f"effect of {source} is not a conjunction of literals: {f!r}")


def compile_effect_rules(effect: Formula, index: PropositionIndex, cap: int, source: str) -> tuple[EffectRule, ...]:
    """Разложить заземленный эффект на безусловное правило и правила when"""
    unconditional_add = unconditional_delete = 0
    rules: list[EffectRule] = []
    stack = [effect]
    while stack:
        node = stack.pop()
        if isinstance(node, And):
            stack.extend(reversed(node.args))
        elif isinstance(node, When):
            add, delete = _literals(node.effect, index, source)
            condition = to_dnf(node.condition, index, cap=cap, source=source)
            rules.append(EffectRule(condition, add, delete))
        else:
            add, delete = _literals(node, index, source)
            unconditional_add |= add
            unconditional_delete |= delete
    always = Dnf((PartialState.empty(index.n),), index.n)
    return (EffectRule(always, unconditional_add, unconditional_delete),) + tuple(rules)


def _check_arguments(schema: ActionSchema, args: Sequence[str], index: PropositionIndex) -> None:
    if len(args) != len(schema.params):
        raise IllTypedArgumentError(f"{schema.name} takes {len(schema.params)} arguments, got {len(args)}")
    for arg, (var, type_name) in zip(args, schema.params):
        if not index.has_object(arg):
            raise IllTypedArgumentError(f"{schema.name}: unknown object '{arg}'")
        obj = index.objects[index.object_id(arg)]
        if not index.types.conforms(obj.type_name, type_name):
            raise IllTypedArgumentError(f"{schema.name}: '{arg}' of type {obj.type_name} does not fit {var} - {type_name}")


def ground_action(
    schema: ActionSchema,
    args: Sequence[str],
    index: PropositionIndex,
    cap: Optional[int] = None,
) -> GroundAction:
    """
    Заземлить схему действия и свернуть ДНФ пред- и постусловий в метки

    Raises:
        IllTypedArgumentError: аргументы не подходят к параметрам
        UnsatisfiablePrecondition: предусловие невыполнимо
        UnsatisfiableError: эффект противоречив
        DnfBlowupError: ДНФ больше cap
    """
    cap = cap if cap is not None else get_settings().dnf_cap
    args = tuple(args)
    _check_arguments(schema, args, index)
    name = f"{schema.name}({','.join(args)})"
    binding = {var: arg for (var, _), arg in zip(schema.params, args)}

    precondition = ground(schema.precondition, index, binding)
    effect = ground(schema.effect, index, binding)

    pre_dnf = to_dnf(precondition, index, cap=cap, source=name)
    if pre_dnf.is_unsatisfiable:
        raise UnsatisfiablePrecondition("precondition is unsatisfiable", name)
    eff_dnf = to_dnf(effect, index, cap=cap, effect=True, source=name)

    pre_label = collapse(pre_dnf, source=name)
    post_label = collapse(eff_dnf, source=name)

    advisories = []
    if pre_label.is_empty:
        advisories.append(PRE_LABEL_EMPTY)
        logger.warning(f"⚠️ {name}: {PRE_LABEL_EMPTY} (предусловия слишком общие, метки до действия нет)")
    if post_label.is_empty:
        advisories.append(POST_LABEL_EMPTY)
        logger.warning(f"⚠️ {name}: {POST_LABEL_EMPTY} (эффект может не изменить ничего, метки после действия нет)")

    return GroundAction(
        schema=schema.name,
        args=args,
        pre_dnf=pre_dnf,
        eff_dnf=eff_dnf,
        pre_label=pre_label,
        post_label=post_label,
        rules=compile_effect_rules(effect, index, cap, name),
        advisories=tuple(advisories),
    )


def check_pre(action: GroundAction, state: ClosedState) -> bool:
    return action.pre_dnf.satisfied_by(state)


def apply(action: GroundAction, state: ClosedState) -> ClosedState:
    """
    Применить действие: условия when проверяются в состоянии до действия,
    сначала удаления, потом добавления
    """
    if not check_pre(action, state):
        raise PreconditionError(f"precondition of {action.name} does not hold")
    add = delete = 0
    for rule in action.rules:
        if rule.condition.satisfied_by(state):
            add |= rule.add
            delete |= rule.delete
    return ClosedState((state.bits & ~delete) | add, state.n)


def _candidate_args(schema: ActionSchema, index: PropositionIndex) -> list[tuple[str, ...]]:
    pools = [[o.name for o in index.objects_of_type(type_name)] for _, type_name in schema.params]
    return [tuple(args) for args in itertools.product(*pools)]


@timing_decorator
def ground_all(domain: Domain, index: PropositionIndex, threads: Optional[int] = None) -> list[GroundAction]:
    """
    Заземлить все схемы на все кортежи объектов подходящих типов

    Порядок: схемы в порядке объявления, кортежи в порядке объектов.
    Экземпляры с невыполнимым предусловием пропускаются.
    """
    settings = get_settings()
    threads = threads or settings.threads
    jobs = [(schema, args) for schema in domain.actions for args in _candidate_args(schema, index)]

    def _job(job):
        schema, args = job
        try:
            return ground_action(schema, args, index, cap=settings.dnf_cap)
        except UnsatisfiablePrecondition as e:
            logger.debug(f"⏭️ Пропускаем {e.source}: предусловие невыполнимо")
            return None

    with ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(executor.map(_job, jobs))

    actions = [a for a in results if a is not None]
    logger.info(f"✅ Заземлено действий: {len(actions)} из {len(jobs)} (пропущено {len(jobs) - len(actions)})")
    return actions


def find_action(actions: Sequence[GroundAction], schema: str, args: Sequence[str]) -> Optional[GroundAction]:
    return next((a for a in actions if a.schema == schema and a.args == tuple(args)), None)

"""
Дерево формул первого порядка (предусловия, эффекты, цели) и их вычисление
"""

from dataclasses import dataclass
from typing import Iterator, Union

from logic.core import ClosedState, PropositionIndex
from utils.errors import UnboundVariableError


def is_variable(term: str) -> bool:
    return term.startswith("?")


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"({' '.join((self.predicate,) + self.terms)})"


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    # And(()) - истина
    args: tuple["Formula", ...] = ()


@dataclass(frozen=True)
class Or:
    # Or(()) - ложь
    args: tuple["Formula", ...] = ()


@dataclass(frozen=True)
class Imply:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    type_name: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    type_name: str
    body: "Formula"


@dataclass(frozen=True)
class When:
    condition: "Formula"
    effect: "Formula"


Formula = Union[Atom, Not, And, Or, Imply, Forall, Exists, When]

TRUE = And(())
FALSE = Or(())


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Atom):
        return ()
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Imply):
        return (f.antecedent, f.consequent)
    if isinstance(f, (Forall, Exists)):
        return (f.body,)
    if isinstance(f, When):
        return (f.condition, f.effect)
    raise TypeError(f"not a formula node: {f!r}")


def walk(f: Formula) -> Iterator[Formula]:
    """Обход в глубину, сначала сам узел"""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def contains_when(f: Formula) -> bool:
    return any(isinstance(node, When) for node in walk(f))


def free_variables(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {t for t in f.terms if is_variable(t)}
    if isinstance(f, (Forall, Exists)):
        return free_variables(f.body) - {f.var}
    found: set[str] = set()
    for child in children(f):
        found |= free_variables(child)
    return found


def atoms(f: Formula) -> list[Atom]:
    return [node for node in walk(f) if isinstance(node, Atom)]


def eval_formula(f: Formula, state: ClosedState, index: PropositionIndex) -> bool:
    """
    Вычислить заземленную формулу без кванторов в полном состоянии

    Пропозиции, не указанные в состоянии, ложны (closed world).
    """
    if isinstance(f, Atom):
        return index.atom_index(f.predicate, f.terms) in state
    if isinstance(f, Not):
        return not eval_formula(f.arg, state, index)
    if isinstance(f, And):
        return all(eval_formula(arg, state, index) for arg in f.args)
    if isinstance(f, Or):
        return any(eval_formula(arg, state, index) for arg in f.args)
    if isinstance(f, Imply):
        return not eval_formula(f.antecedent, state, index) or eval_formula(f.consequent, state, index)
    if isinstance(f, (Forall, Exists)):
        raise UnboundVariableError(f"quantifier over {f.var} must be grounded before evaluation")
    if isinstance(f, When):
        raise ValueError("conditional effect cannot be evaluated as a condition")
    raise TypeError(f"not a formula node: {f!r}")


def substitute(f: Formula, binding: dict[str, str]) -> Formula:
    """Подстановка объектов вместо переменных (связанные квантором не трогаем)"""
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(binding.get(t, t) for t in f.terms))
    if isinstance(f, Not):
        return Not(substitute(f.arg, binding))
    if isinstance(f, And):
        return And(tuple(substitute(a, binding) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(substitute(a, binding) for a in f.args))
    if isinstance(f, Imply):
        return Imply(substitute(f.antecedent, binding), substitute(f.consequent, binding))
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in binding.items() if k != f.var}
        return type(f)(f.var, f.type_name, substitute(f.body, inner))
    if isinstance(f, When):
        return When(substitute(f.condition, binding), substitute(f.effect, binding))
    raise TypeError(f"not a formula node: {f!r}")

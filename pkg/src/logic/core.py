"""
Символьный словарь: типы, объекты, предикаты, пропозиции и состояния

Состояния хранятся как битовые множества на int: бит i соответствует
пропозиции с номером i в PropositionIndex.
"""

import hashlib
import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from utils.errors import ContradictionError, UnboundVariableError, UnknownPropositionError

OBJECT_TYPE = "object"


@dataclass(frozen=True)
class TypeHierarchy:
    """Иерархия типов PDDL с одиночным наследованием"""

    # (тип, родитель) в порядке объявления; корень object не хранится
    parents: tuple[tuple[str, str], ...] = ()

    @cached_property
    def _parent_of(self) -> dict[str, str]:
        return dict(self.parents)

    @property
    def names(self) -> tuple[str, ...]:
        return (OBJECT_TYPE,) + tuple(name for name, _ in self.parents)

    def declared(self, type_name: str) -> bool:
        return type_name == OBJECT_TYPE or type_name in self._parent_of

    def parent(self, type_name: str) -> Optional[str]:
        return self._parent_of.get(type_name)

    def ancestors(self, type_name: str) -> list[str]:
        """Цепочка от типа до object включительно"""
        chain = [type_name]
        seen = {type_name}
        current = type_name
        while current != OBJECT_TYPE:
            current = self._parent_of.get(current, OBJECT_TYPE)
            if current in seen:
                raise ValueError(f"cyclic type hierarchy at '{current}'")
            seen.add(current)
            chain.append(current)
        return chain

    def conforms(self, type_name: str, expected: str) -> bool:
        """Совпадает ли тип с ожидаемым или является его подтипом"""
        return expected in self.ancestors(type_name)

    def validate(self) -> None:
        for name, _ in self.parents:
            self.ancestors(name)


@dataclass(frozen=True)
class ObjectSym:
    id: int
    name: str
    type_name: str = OBJECT_TYPE


@dataclass(frozen=True)
class PredicateDef:
    name: str
    # упорядоченные пары (имя параметра, тип)
    params: tuple[tuple[str, str], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Proposition:
    predicate: int
    args: tuple[int, ...] = ()


@dataclass(frozen=True)
class ClosedState:
    """Полное (closed-world) состояние: неуказанные пропозиции ложны"""

    bits: int
    n: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"state bits out of range for N={self.n}")

    @classmethod
    def empty(cls, n: int) -> "ClosedState":
        return cls(0, n)

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> "ClosedState":
        bits = 0
        for i in indices:
            bits |= 1 << i
        return cls(bits, n)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "ClosedState":
        values = np.asarray(values, dtype=bool).ravel()
        packed = np.packbits(values, bitorder="little").tobytes()
        return cls(int.from_bytes(packed, "little"), int(values.size))

    def __contains__(self, i: int) -> bool:
        return bool((self.bits >> i) & 1)

    def true_indices(self) -> list[int]:
        return [i for i in range(self.n) if (self.bits >> i) & 1]

    def count(self) -> int:
        return self.bits.bit_count()

    def to_array(self) -> np.ndarray:
        raw = np.frombuffer(self.bits.to_bytes((self.n + 7) // 8, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.n].astype(bool)


@dataclass(frozen=True)
class PartialState:
    """Частичное (open-world) состояние ŝ = (s⁺, s⁻)"""

    pos: int
    neg: int
    n: int

    def __post_init__(self):
        if self.pos < 0 or self.neg < 0 or (self.pos | self.neg) >> self.n:
            raise ValueError(f"partial state bits out of range for N={self.n}")
        if self.pos & self.neg:
            raise ContradictionError("proposition is both positive and negative in a partial state")

    @classmethod
    def empty(cls, n: int) -> "PartialState":
        return cls(0, 0, n)

    @classmethod
    def from_indices(cls, n: int, pos: Iterable[int] = (), neg: Iterable[int] = ()) -> "PartialState":
        return cls(ClosedState.from_indices(n, pos).bits, ClosedState.from_indices(n, neg).bits, n)

    @classmethod
    def full(cls, state: ClosedState) -> "PartialState":
        """Полная метка: все N пропозиций определены"""
        mask = (1 << state.n) - 1
        return cls(state.bits, mask & ~state.bits, state.n)

    @property
    def is_empty(self) -> bool:
        return self.pos == 0 and self.neg == 0

    def size(self) -> int:
        return self.pos.bit_count() + self.neg.bit_count()

    def satisfied_by(self, state: ClosedState) -> bool:
        return (state.bits & self.pos) == self.pos and not (state.bits & self.neg)

    def pos_indices(self) -> list[int]:
        return ClosedState(self.pos, self.n).true_indices()

    def neg_indices(self) -> list[int]:
        return ClosedState(self.neg, self.n).true_indices()

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return ClosedState(self.pos, self.n).to_array(), ClosedState(self.neg, self.n).to_array()


def apply_partial(state: ClosedState, delta: PartialState) -> ClosedState:
    """s' = (s ∪ δ⁺) − δ⁻"""
    if state.n != delta.n:
        raise ValueError(f"length mismatch: state N={state.n}, partial N={delta.n}")
    return ClosedState((state.bits | delta.pos) & ~delta.neg, state.n)


class PropositionIndex:
    """Биекция между заземленными пропозициями и числами 0..N-1"""

    def __init__(
        self,
        predicates: Sequence[PredicateDef],
        objects: Sequence[ObjectSym],
        types: TypeHierarchy,
        propositions: Sequence[Proposition],
    ):
        self.predicates = tuple(predicates)
        self.objects = tuple(objects)
        self.types = types
        self._inverse = tuple(propositions)
        self._forward = {prop: i for i, prop in enumerate(self._inverse)}
        self._predicate_ids = {p.name: i for i, p in enumerate(self.predicates)}
        self._object_ids = {o.name: o.id for o in self.objects}

    def __len__(self) -> int:
        return len(self._inverse)

    @property
    def n(self) -> int:
        return len(self._inverse)

    @property
    def max_arity(self) -> int:
        return max(p.arity for p in self.predicates)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropositionIndex):
            return NotImplemented
        return (self.predicates, self.objects, self.types, self._inverse) == (
            other.predicates,
            other.objects,
            other.types,
            other._inverse,
        )

    def __hash__(self) -> int:
        return hash(self._inverse)

    def index(self, prop: Proposition) -> int:
        try:
            return self._forward[prop]
        except KeyError:
            raise UnknownPropositionError(f"proposition {prop} is not enumerable") from None

    def inverse(self, i: int) -> Proposition:
        return self._inverse[i]

    def __contains__(self, prop: Proposition) -> bool:
        return prop in self._forward

    def predicate_id(self, name: str) -> int:
        try:
            return self._predicate_ids[name]
        except KeyError:
            raise UnknownPropositionError(f"unknown predicate '{name}'") from None

    def object_id(self, name: str) -> int:
        try:
            return self._object_ids[name]
        except KeyError:
            raise UnknownPropositionError(f"unknown object '{name}'") from None

    def has_object(self, name: str) -> bool:
        return name in self._object_ids

    def objects_of_type(self, type_name: str) -> list[ObjectSym]:
        return [o for o in self.objects if self.types.conforms(o.type_name, type_name)]

    def atom_index(self, predicate: str, terms: Sequence[str]) -> int:
        """Номер пропозиции для заземленного атома pred(obj...)"""
        for term in terms:
            if term.startswith("?"):
                raise UnboundVariableError(f"unbound variable {term} in ({predicate} {' '.join(terms)})")
        prop = Proposition(self.predicate_id(predicate), tuple(self.object_id(t) for t in terms))
        return self.index(prop)

    def name(self, i: int) -> str:
        prop = self._inverse[i]
        args = ",".join(self.objects[a].name for a in prop.args)
        return f"{self.predicates[prop.predicate].name}({args})"

    def names(self) -> list[str]:
        return [self.name(i) for i in range(self.n)]

    @cached_property
    def _by_name(self) -> dict[str, int]:
        return {self.name(i): i for i in range(self.n)}

    def lookup(self, text: str) -> int:
        """Обратное к name(): 'in(trophy,agent)' -> номер"""
        try:
            return self._by_name[text.replace(" ", "")]
        except KeyError:
            raise UnknownPropositionError(f"unknown proposition '{text}'") from None

    def names_of(self, bits: int) -> list[str]:
        """Отсортированный список имен установленных битов"""
        return sorted(self.name(i) for i in ClosedState(bits, self.n).true_indices())

    def bits_of(self, names: Iterable[str]) -> int:
        bits = 0
        for text in names:
            bits |= 1 << self.lookup(text)
        return bits

    def predicate_of(self, i: int) -> int:
        return self._inverse[i].predicate

    def tuple_groups(self) -> list[tuple[tuple[int, ...], list[tuple[int, int]]]]:
        """
        Различные кортежи аргументов в порядке первого появления и для каждого
        список (номер предиката, номер пропозиции)
        """
        groups: dict[tuple[int, ...], list[tuple[int, int]]] = {}
        for i, prop in enumerate(self._inverse):
            groups.setdefault(prop.args, []).append((prop.predicate, i))
        return list(groups.items())

    def to_json(self) -> str:
        return json.dumps(self.names(), ensure_ascii=False)

    def digest(self) -> str:
        """Хэш легенды: им помечаются все артефакты конвейера"""
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()[:16]


def enumerate_propositions(
    predicates: Sequence[PredicateDef],
    objects: Sequence[ObjectSym],
    types: Optional[TypeHierarchy] = None,
) -> PropositionIndex:
    """
    Перечислить все корректно типизированные пропозиции

    Порядок: предикаты в порядке объявления, внутри предиката кортежи
    номеров объектов в лексикографическом порядке.
    """
    types = types or TypeHierarchy()
    if not predicates:
        raise ValueError("predicate table is empty")
    if not objects:
        raise ValueError("object list is empty")

    for label, names in (("predicate", [p.name for p in predicates]), ("object", [o.name for o in objects])):
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate {label} names: {', '.join(duplicates)}")
    if [o.id for o in objects] != list(range(len(objects))):
        raise ValueError("object ids must be dense 0..|O|-1 in declaration order")

    propositions: list[Proposition] = []
    for p_id, predicate in enumerate(predicates):
        candidates = [
            [o.id for o in objects if types.conforms(o.type_name, param_type)] for _, param_type in predicate.params
        ]
        for args in itertools.product(*candidates):
            propositions.append(Proposition(p_id, tuple(args)))

    if not propositions:
        raise ValueError("no well-typed propositions")
    return PropositionIndex(predicates, objects, types, propositions)


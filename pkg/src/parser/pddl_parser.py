"""
Парсер подмножества PDDL (домен + задача) в структуры logic
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

from pyparsing import Forward, ParseBaseException, StringEnd, Suppress, Word, ZeroOrMore, col, lineno, printables, rest_of_line

from logic.core import (
    OBJECT_TYPE,
    ClosedState,
    ObjectSym,
    PredicateDef,
    PropositionIndex,
    TypeHierarchy,
    enumerate_propositions,
)
from logic.formula import TRUE, And, Atom, Exists, Forall, Formula, Not, Or, When, is_variable
from utils.errors import PddlError, PddlSemanticError, PddlSyntaxError, UnknownPropositionError
from utils.log_manager import get_log_manager

# Получаем менеджер логов
log_manager = get_log_manager()

# Настраиваем логирование
logger = log_manager.setup_logging("parser", logging.INFO)

SUPPORTED_REQUIREMENTS = (
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":existential-preconditions",
    ":universal-preconditions",
    ":conditional-effects",
)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]
    precondition: Formula
    effect: Formula


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...]
    types: TypeHierarchy
    predicates: tuple[PredicateDef, ...]
    actions: tuple[ActionSchema, ...]

    def predicate(self, name: str) -> Optional[PredicateDef]:
        return next((p for p in self.predicates if p.name == name), None)

    def action(self, name: str) -> Optional[ActionSchema]:
        return next((a for a in self.actions if a.name == name), None)


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[ObjectSym, ...]
    init: ClosedState
    goal: Formula
    index: PropositionIndex = field(compare=False, repr=False)


@dataclass
class SExpr:
    """Узел S-выражения с позицией начала (строка и столбец с 1)"""

    value: Union[str, list["SExpr"]]
    line: int
    col: int

    @property
    def is_list(self) -> bool:
        return isinstance(self.value, list)

    @property
    def keyword(self) -> str:
        """Голова списка в нижнем регистре (или пустая строка)"""
        if self.is_list and self.value and not self.value[0].is_list:
            return self.value[0].value.lower()
        return ""


def _build_grammar():
    token = Word(printables, exclude_chars="();")
    token.set_parse_action(lambda s, loc, toks: SExpr(toks[0], lineno(loc, s), col(loc, s)))
    nested = Forward()
    nested <<= Suppress("(") + ZeroOrMore(token | nested) + Suppress(")")
    nested.set_parse_action(lambda s, loc, toks: SExpr(list(toks), lineno(loc, s), col(loc, s)))
    document = nested + StringEnd()
    document.ignore(";" + rest_of_line)
    return document


_GRAMMAR = _build_grammar()


def read_sexpr(text: str) -> SExpr:
    """Лексический и скобочный разбор в дерево SExpr"""
    try:
        return _GRAMMAR.parse_string(text, parse_all=True)[0]
    except ParseBaseException as e:
        raise PddlSyntaxError(f"malformed s-expression: {e.msg}", e.lineno, e.col) from None
    except RecursionError:
        raise PddlSyntaxError("nesting too deep") from None


def _fail(node: SExpr, message: str) -> PddlSemanticError:
    return PddlSemanticError(message, node.line, node.col)


def _token(node: SExpr, what: str) -> str:
    if node.is_list:
        raise PddlSyntaxError(f"expected {what}, got a list", node.line, node.col)
    return node.value


def _items(node: SExpr, what: str) -> list[SExpr]:
    if not node.is_list:
        raise PddlSyntaxError(f"expected {what}, got '{node.value}'", node.line, node.col)
    return node.value


class PddlReader:
    """Разбор деревьев SExpr в Domain и Problem с разрешением всех ссылок"""

    def __init__(self, domain: Optional[Domain] = None):
        self.domain = domain
        self.requirements: set[str] = set(domain.requirements) if domain else set()
        self.types = domain.types if domain else TypeHierarchy()
        self.predicates: dict[str, PredicateDef] = {p.name: p for p in domain.predicates} if domain else {}
        # объекты задачи: имя -> тип; в домене констант нет
        self.objects: dict[str, str] = {}

    # --- общие части ---

    def _require(self, flag: str, node: SExpr) -> None:
        if flag not in self.requirements:
            raise _fail(node, f"construct needs requirement {flag}")

    def _header(self, root: SExpr, kind: str) -> tuple[str, list[SExpr]]:
        items = _items(root, "(define ...)")
        if not items or items[0].is_list or items[0].value.lower() != "define":
            raise PddlSyntaxError("expected (define ...)", root.line, root.col)
        if len(items) < 2 or items[1].keyword != kind or len(items[1].value) != 2:
            raise PddlSyntaxError(f"expected ({kind} <name>)", root.line, root.col)
        return _token(items[1].value[1], f"{kind} name"), items[2:]

    def _typed_list(self, nodes: list[SExpr], what: str) -> list[tuple[str, str, SExpr]]:
        """Список 'a b - t c' -> [(a, t), (b, t), (c, object)]"""
        result: list[tuple[str, str, SExpr]] = []
        pending: list[SExpr] = []
        i = 0
        while i < len(nodes):
            node = nodes[i]
            name = _token(node, what)
            if name == "-":
                self._require(":typing", node)
                if i + 1 >= len(nodes) or not pending:
                    raise PddlSyntaxError("dangling '-' in typed list", node.line, node.col)
                type_name = _token(nodes[i + 1], "type name")
                result.extend((_token(p, what), type_name, p) for p in pending)
                pending = []
                i += 2
                continue
            pending.append(node)
            i += 1
        result.extend((_token(p, what), OBJECT_TYPE, p) for p in pending)
        return result

    def _check_type(self, type_name: str, node: SExpr) -> None:
        if not self.types.declared(type_name):
            raise _fail(node, f"unknown type '{type_name}'")

    # --- домен ---

    def read_domain(self, root: SExpr) -> Domain:
        name, sections = self._header(root, "domain")
        actions: list[ActionSchema] = []
        self.requirements = {":strips"}
        for section in sections:
            keyword = section.keyword
            if keyword == ":requirements":
                self._read_requirements(section)
            elif keyword == ":types":
                self._read_types(section)
            elif keyword == ":predicates":
                self._read_predicates(section)
            elif keyword == ":action":
                action = self._read_action(section)
                if any(a.name == action.name for a in actions):
                    raise _fail(section, f"duplicate action '{action.name}'")
                actions.append(action)
            elif keyword == ":constants":
                raise _fail(section, "domain constants are not supported")
            else:
                raise PddlSyntaxError(f"unsupported domain section '{keyword or '?'}'", section.line, section.col)

        return Domain(
            name=name,
            requirements=tuple(r for r in SUPPORTED_REQUIREMENTS if r in self.requirements),
            types=self.types,
            predicates=tuple(self.predicates.values()),
            actions=tuple(actions),
        )

    def _read_requirements(self, section: SExpr) -> None:
        for node in section.value[1:]:
            flag = _token(node, "requirement flag").lower()
            if flag not in SUPPORTED_REQUIREMENTS:
                raise _fail(node, f"unsupported requirement {flag}")
            self.requirements.add(flag)

    def _read_types(self, section: SExpr) -> None:
        self._require(":typing", section)
        explicit: dict[str, str] = {}
        for name, parent, node in self._typed_list(section.value[1:], "type name"):
            if name == OBJECT_TYPE:
                raise _fail(node, "type 'object' cannot be redeclared")
            if name in explicit and explicit[name] != parent:
                raise _fail(node, f"type '{name}' declared with two parents")
            explicit[name] = parent
        # родитель без собственного объявления - потомок object
        for parent in list(explicit.values()):
            if parent != OBJECT_TYPE and parent not in explicit:
                explicit[parent] = OBJECT_TYPE
        types = TypeHierarchy(tuple(explicit.items()))
        try:
            types.validate()
        except ValueError as e:
            raise _fail(section, str(e)) from None
        self.types = types

    def _read_predicates(self, section: SExpr) -> None:
        for node in section.value[1:]:
            items = _items(node, "predicate declaration")
            if not items:
                raise PddlSyntaxError("empty predicate declaration", node.line, node.col)
            name = _token(items[0], "predicate name")
            if name in self.predicates:
                raise _fail(node, f"duplicate predicate '{name}'")
            params = []
            for var, type_name, var_node in self._typed_list(items[1:], "parameter"):
                if not is_variable(var):
                    raise PddlSyntaxError(f"parameter '{var}' must start with '?'", var_node.line, var_node.col)
                self._check_type(type_name, var_node)
                params.append((var, type_name))
            self.predicates[name] = PredicateDef(name, tuple(params))

    def _read_action(self, section: SExpr) -> ActionSchema:
        items = section.value
        if len(items) < 2:
            raise PddlSyntaxError("action without a name", section.line, section.col)
        name = _token(items[1], "action name")
        fields: dict[str, SExpr] = {}
        rest = items[2:]
        if len(rest) % 2:
            raise PddlSyntaxError(f"action '{name}': keyword without value", section.line, section.col)
        for key_node, value in zip(rest[::2], rest[1::2]):
            key = _token(key_node, "action keyword").lower()
            if key not in (":parameters", ":precondition", ":effect"):
                raise PddlSyntaxError(f"unknown action keyword '{key}'", key_node.line, key_node.col)
            fields[key] = value

        params: list[tuple[str, str]] = []
        if ":parameters" in fields:
            for var, type_name, var_node in self._typed_list(_items(fields[":parameters"], "parameter list"), "parameter"):
                if not is_variable(var):
                    raise PddlSyntaxError(f"parameter '{var}' must start with '?'", var_node.line, var_node.col)
                if any(v == var for v, _ in params):
                    raise _fail(var_node, f"duplicate parameter {var}")
                self._check_type(type_name, var_node)
                params.append((var, type_name))

        scope = dict(params)
        precondition = self._formula(fields[":precondition"], scope) if ":precondition" in fields else TRUE
        effect = self._effect(fields[":effect"], scope, in_when=False) if ":effect" in fields else TRUE
        return ActionSchema(name, tuple(params), precondition, effect)

    # --- формулы ---

    def _quantified(self, node: SExpr, scope: dict[str, str]) -> tuple[list[tuple[str, str]], SExpr]:
        items = node.value
        if len(items) != 3:
            raise PddlSyntaxError(f"({items[0].value} (vars) body) expected", node.line, node.col)
        bound = []
        for var, type_name, var_node in self._typed_list(_items(items[1], "variable list"), "variable"):
            if not is_variable(var):
                raise PddlSyntaxError(f"quantified '{var}' must start with '?'", var_node.line, var_node.col)
            self._check_type(type_name, var_node)
            bound.append((var, type_name))
        if not bound:
            raise PddlSyntaxError("quantifier binds no variables", node.line, node.col)
        return bound, items[2]

    def _formula(self, node: SExpr, scope: dict[str, str]) -> Formula:
        """Условие: предусловие, цель или условие when"""
        items = _items(node, "formula")
        if not items:
            return TRUE
        keyword = node.keyword
        args = items[1:]
        if keyword == "and":
            return And(tuple(self._formula(a, scope) for a in args))
        if keyword == "or":
            self._require(":disjunctive-preconditions", node)
            return Or(tuple(self._formula(a, scope) for a in args))
        if keyword == "not":
            if len(args) != 1:
                raise PddlSyntaxError("(not f) takes one argument", node.line, node.col)
            self._require(":negative-preconditions", node)
            return Not(self._formula(args[0], scope))
        if keyword == "imply":
            self._require(":disjunctive-preconditions", node)
            if len(args) != 2:
                raise PddlSyntaxError("(imply a b) takes two arguments", node.line, node.col)
            return Or((Not(self._formula(args[0], scope)), self._formula(args[1], scope)))
        if keyword in ("forall", "exists"):
            self._require(":universal-preconditions" if keyword == "forall" else ":existential-preconditions", node)
            bound, body_node = self._quantified(node, scope)
            body = self._formula(body_node, {**scope, **dict(bound)})
            node_type = Forall if keyword == "forall" else Exists
            for var, type_name in reversed(bound):
                body = node_type(var, type_name, body)
            return body
        if keyword == "when":
            raise _fail(node, "'when' is only allowed inside effects")
        return self._atom(node, scope)

    def _effect(self, node: SExpr, scope: dict[str, str], in_when: bool) -> Formula:
        items = _items(node, "effect")
        if not items:
            return TRUE
        keyword = node.keyword
        args = items[1:]
        if keyword == "and":
            return And(tuple(self._effect(a, scope, in_when) for a in args))
        if keyword == "not":
            if len(args) != 1:
                raise PddlSyntaxError("(not f) takes one argument", node.line, node.col)
            return Not(self._atom(args[0], scope))
        if keyword == "forall" and not in_when:
            self._require(":conditional-effects", node)
            bound, body_node = self._quantified(node, scope)
            body = self._effect(body_node, {**scope, **dict(bound)}, in_when)
            for var, type_name in reversed(bound):
                body = Forall(var, type_name, body)
            return body
        if keyword == "when" and not in_when:
            self._require(":conditional-effects", node)
            if len(args) != 2:
                raise PddlSyntaxError("(when condition effect) expected", node.line, node.col)
            return When(self._formula(args[0], scope), self._effect(args[1], scope, in_when=True))
        if keyword in ("or", "imply", "exists", "forall", "when"):
            raise _fail(node, f"'{keyword}' is not allowed here in an effect")
        return self._atom(node, scope)

    def _atom(self, node: SExpr, scope: dict[str, str]) -> Atom:
        items = _items(node, "atom")
        if not items:
            raise PddlSyntaxError("empty atom", node.line, node.col)
        name = _token(items[0], "predicate name")
        if name == "=":
            raise _fail(node, "equality is not supported")
        predicate = self.predicates.get(name)
        if predicate is None:
            raise _fail(items[0], f"unknown predicate '{name}'")
        if len(items) - 1 != predicate.arity:
            raise _fail(node, f"predicate '{name}' takes {predicate.arity} arguments, got {len(items) - 1}")
        terms = []
        for term_node, (_, param_type) in zip(items[1:], predicate.params):
            term = _token(term_node, "term")
            if is_variable(term):
                if term not in scope:
                    raise _fail(term_node, f"unbound variable {term}")
                term_type = scope[term]
            elif term in self.objects:
                term_type = self.objects[term]
            else:
                raise _fail(term_node, f"unknown object '{term}'")
            if not self.types.conforms(term_type, param_type):
                raise _fail(term_node, f"'{term}' of type {term_type} does not fit {param_type} in '{name}'")
            terms.append(term)
        return Atom(name, tuple(terms))

    # --- задача ---

    def read_problem(self, root: SExpr) -> Problem:
        name, sections = self._header(root, "problem")
        domain_name: Optional[str] = None
        init_nodes: list[SExpr] = []
        goal_node: Optional[SExpr] = None
        objects_read = False
        for section in sections:
            keyword = section.keyword
            if keyword == ":domain":
                if len(section.value) != 2:
                    raise PddlSyntaxError("(:domain <name>) expected", section.line, section.col)
                domain_name = _token(section.value[1], "domain name")
                if domain_name != self.domain.name:
                    raise _fail(section, f"problem is for domain '{domain_name}', not '{self.domain.name}'")
            elif keyword == ":objects":
                for obj, type_name, node in self._typed_list(section.value[1:], "object name"):
                    if is_variable(obj):
                        raise PddlSyntaxError(f"object name '{obj}' cannot start with '?'", node.line, node.col)
                    if obj in self.objects:
                        raise _fail(node, f"duplicate object '{obj}'")
                    self._check_type(type_name, node)
                    self.objects[obj] = type_name
                objects_read = True
            elif keyword == ":requirements":
                self._read_requirements(section)
            elif keyword == ":init":
                init_nodes = section.value[1:]
            elif keyword == ":goal":
                if len(section.value) != 2:
                    raise PddlSyntaxError("(:goal <formula>) expected", section.line, section.col)
                goal_node = section.value[1]
            else:
                raise PddlSyntaxError(f"unsupported problem section '{keyword or '?'}'", section.line, section.col)

        if domain_name is None:
            raise PddlSyntaxError("problem has no (:domain ...) section", root.line, root.col)
        if not objects_read or not self.objects:
            raise _fail(root, "problem declares no objects")

        objects = tuple(ObjectSym(i, obj, t) for i, (obj, t) in enumerate(self.objects.items()))
        try:
            index = enumerate_propositions(self.domain.predicates, objects, self.types)
        except ValueError as e:
            raise _fail(root, str(e)) from None

        bits = 0
        for node in init_nodes:
            atom = self._atom(node, {})
            try:
                bits |= 1 << index.atom_index(atom.predicate, atom.terms)
            except UnknownPropositionError as e:
                raise _fail(node, f"init atom not enumerable: {e}") from None
        goal = self._formula(goal_node, {}) if goal_node is not None else TRUE

        return Problem(
            name=name,
            domain_name=domain_name,
            objects=objects,
            init=ClosedState(bits, index.n),
            goal=goal,
            index=index,
        )


def parse_domain(text: str) -> Domain:
    """
    Разобрать текст домена PDDL

    Raises:
        PddlError: любая лексическая/синтаксическая/семантическая ошибка с позицией
    """
    root = read_sexpr(text)
    try:
        domain = PddlReader().read_domain(root)
    except RecursionError:
        raise PddlSyntaxError("formula nesting too deep", root.line, root.col) from None
    logger.info(f"✅ Домен '{domain.name}': {len(domain.predicates)} предикатов, {len(domain.actions)} действий")
    return domain


def parse_problem(text: str, domain: Domain) -> Problem:
    """Разобрать текст задачи PDDL для уже разобранного домена"""
    root = read_sexpr(text)
    try:
        problem = PddlReader(domain).read_problem(root)
    except RecursionError:
        raise PddlSyntaxError("formula nesting too deep", root.line, root.col) from None
    logger.info(f"✅ Задача '{problem.name}': {len(problem.objects)} объектов, N={problem.index.n}")
    return problem


def load_domain(path) -> Domain:
    with open(path, encoding="utf-8") as f:
        return parse_domain(f.read())


def load_problem(path, domain: Domain) -> Problem:
    with open(path, encoding="utf-8") as f:
        return parse_problem(f.read(), domain)


__all__ = [
    "ActionSchema",
    "Domain",
    "PddlError",
    "PddlReader",
    "Problem",
    "SUPPORTED_REQUIREMENTS",
    "load_domain",
    "load_problem",
    "parse_domain",
    "parse_problem",
]

"""
Печать Domain / Problem обратно в текст PDDL

Повторный разбор напечатанного текста дает структурно тот же объект.
"""

from logic.core import PropositionIndex
from logic.formula import And, Atom, Exists, Forall, Formula, Not, Or, When
from parser.pddl_parser import ActionSchema, Domain, Problem


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return str(f)
    if isinstance(f, Not):
        return f"(not {format_formula(f.arg)})"
    if isinstance(f, And):
        return "(and" + "".join(" " + format_formula(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or" + "".join(" " + format_formula(a) for a in f.args) + ")"
    if isinstance(f, (Forall, Exists)):
        keyword = "forall" if isinstance(f, Forall) else "exists"
        return f"({keyword} ({f.var} - {f.type_name}) {format_formula(f.body)})"
    if isinstance(f, When):
        return f"(when {format_formula(f.condition)} {format_formula(f.effect)})"
    # Imply не доживает до печати: парсер переписывает его в or
    raise TypeError(f"cannot print formula node {f!r}")


def _typed(pairs, typing: bool) -> str:
    if not typing:
        return " ".join(name for name, _ in pairs)
    return " ".join(f"{name} - {type_name}" for name, type_name in pairs)


def _format_action(action: ActionSchema, typing: bool) -> str:
    return (
        f"  (:action {action.name}\n"
        f"    :parameters ({_typed(action.params, typing)})\n"
        f"    :precondition {format_formula(action.precondition)}\n"
        f"    :effect {format_formula(action.effect)})"
    )


def format_domain(domain: Domain) -> str:
    typing = ":typing" in domain.requirements
    lines = [f"(define (domain {domain.name})", f"  (:requirements {' '.join(domain.requirements)})"]
    if domain.types.parents:
        lines.append(f"  (:types {_typed(domain.types.parents, True)})")
    lines.append("  (:predicates")
    for predicate in domain.predicates:
        params = _typed(predicate.params, typing)
        lines.append(f"    ({predicate.name}{' ' + params if params else ''})")
    lines[-1] += ")"
    lines.extend(_format_action(action, typing) for action in domain.actions)
    return "\n".join(lines) + ")\n"


def format_problem(problem: Problem, domain: Domain) -> str:
    typing = ":typing" in domain.requirements
    index: PropositionIndex = problem.index
    objects = [(o.name, o.type_name) for o in problem.objects]
    lines = [
        f"(define (problem {problem.name})",
        f"  (:domain {problem.domain_name})",
        f"  (:objects {_typed(objects, typing)})",
        "  (:init",
    ]
    for i in problem.init.true_indices():
        prop = index.inverse(i)
        args = [index.objects[a].name for a in prop.args]
        lines.append(f"    {Atom(index.predicates[prop.predicate].name, tuple(args))}")
    lines[-1] += ")"
    lines.append(f"  (:goal {format_formula(problem.goal)}))")
    return "\n".join(lines) + "\n"

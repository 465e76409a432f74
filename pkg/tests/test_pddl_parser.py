"""
Тесты разбора PDDL и обратной печати
"""

import numpy as np
import pytest

from gridworld.environment import DOMAIN_PATH, PROBLEM_PATH
from logic.core import ClosedState
from logic.formula import And, Atom, Not, Or, When, walk
from parser.pddl_parser import parse_domain, parse_problem, read_sexpr
from parser.pddl_writer import format_domain, format_problem
from utils.errors import PddlError, PddlSemanticError, PddlSyntaxError

MINIMAL = """
(define (domain minimal)
  (:requirements :strips)
  (:predicates (ready ?x))
  (:action go
    :parameters (?x)
    :precondition (ready ?x)
    :effect (not (ready ?x))))
"""


@pytest.fixture(scope="module")
def grid_texts():
    return DOMAIN_PATH.read_text(encoding="utf-8"), PROBLEM_PATH.read_text(encoding="utf-8")


class TestReadSexpr:
    def test_positions_are_one_based(self):
        root = read_sexpr("(a\n  (b c))")

        assert (root.line, root.col) == (1, 1)
        inner = root.value[1]
        assert (inner.line, inner.col) == (2, 3)
        assert inner.value[1].value == "c"

    def test_nested_lists_and_tokens(self):
        root = read_sexpr("(a (b c)\n\t(?x - obj) :effect)")

        assert root.value[0].value == "a"
        assert [n.value for n in root.value[1].value] == ["b", "c"]
        assert [n.value for n in root.value[2].value] == ["?x", "-", "obj"]
        assert root.value[3].value == ":effect"

    def test_comments_ignored(self):
        root = read_sexpr("; header\n(a b) ; tail")

        assert [n.value for n in root.value] == ["a", "b"]

    def test_unbalanced(self):
        with pytest.raises(PddlSyntaxError):
            read_sexpr("(define (domain d)")

    def test_trailing_garbage(self):
        with pytest.raises(PddlSyntaxError):
            read_sexpr("(a) b")


class TestParseDomain:
    def test_minimal(self):
        domain = parse_domain(MINIMAL)

        assert domain.name == "minimal"
        assert len(domain.predicates) == 1
        assert len(domain.actions) == 1
        assert domain.actions[0].effect == Not(Atom("ready", ("?x",)))

    def test_gridworld(self, grid_texts):
        domain = parse_domain(grid_texts[0])

        assert len(domain.predicates) == 6
        assert [a.name for a in domain.actions] == ["goto", "enter", "pick", "place", "open", "close", "unlock", "lock"]
        assert domain.types.conforms("door", "container")
        assert domain.predicate("connects").arity == 3

    def test_when_inside_effect(self, grid_texts):
        domain = parse_domain(grid_texts[0])

        assert any(isinstance(node, When) for node in walk(domain.action("open").effect))

    def test_keywords_case_insensitive(self):
        domain = parse_domain(MINIMAL.replace(":action", ":ACTION").replace("define", "DEFINE"))

        assert domain.action("go") is not None

    def test_imply_desugars_to_or(self):
        text = MINIMAL.replace(":strips", ":strips :disjunctive-preconditions :negative-preconditions").replace(
            ":precondition (ready ?x)", ":precondition (imply (ready ?x) (ready ?x))"
        )
        pre = parse_domain(text).actions[0].precondition

        assert pre == Or((Not(Atom("ready", ("?x",))), Atom("ready", ("?x",))))

    def test_unknown_predicate_positioned(self):
        text = MINIMAL.replace(":precondition (ready ?x)", ":precondition (steady ?x)")

        with pytest.raises(PddlSemanticError, match="unknown predicate 'steady'") as e:
            parse_domain(text)
        assert e.value.line == 7

    def test_arity_mismatch(self):
        with pytest.raises(PddlSemanticError, match="takes 1 arguments"):
            parse_domain(MINIMAL.replace(":effect (not (ready ?x))", ":effect (not (ready ?x ?x))"))

    def test_unsupported_requirement(self):
        with pytest.raises(PddlSemanticError, match="unsupported requirement :fluents"):
            parse_domain(MINIMAL.replace(":strips", ":strips :fluents"))

    def test_construct_needs_requirement(self):
        text = MINIMAL.replace(":precondition (ready ?x)", ":precondition (or (ready ?x) (ready ?x))")

        with pytest.raises(PddlSemanticError, match=":disjunctive-preconditions"):
            parse_domain(text)

    def test_when_outside_effect(self):
        text = MINIMAL.replace(":strips", ":strips :conditional-effects").replace(
            ":precondition (ready ?x)", ":precondition (when (ready ?x) (ready ?x))"
        )

        with pytest.raises(PddlSemanticError, match="only allowed inside effects"):
            parse_domain(text)

    def test_unbound_variable(self):
        with pytest.raises(PddlSemanticError, match="unbound variable \\?y"):
            parse_domain(MINIMAL.replace(":precondition (ready ?x)", ":precondition (ready ?y)"))

    def test_unknown_type(self):
        text = MINIMAL.replace(":strips", ":strips :typing").replace("(ready ?x)", "(ready ?x - gadget)", 1)

        with pytest.raises(PddlSemanticError, match="unknown type 'gadget'"):
            parse_domain(text)

    def test_domain_constants_rejected(self):
        text = MINIMAL.replace("(:predicates", "(:constants a)\n  (:predicates")

        with pytest.raises(PddlSemanticError):
            parse_domain(text)


class TestParseProblem:
    def test_gridworld_problem(self, grid_texts):
        domain = parse_domain(grid_texts[0])
        problem = parse_problem(grid_texts[1], domain)

        assert problem.index.n == 63
        assert problem.goal == Atom("in", ("trophy", "agent"))
        assert problem.index.lookup("locked(door)") in problem.init
        assert problem.init.count() == 15

    def test_empty_init_is_closed_world(self):
        domain = parse_domain(MINIMAL)
        problem = parse_problem("(define (problem p) (:domain minimal) (:objects a b) (:init) (:goal (ready a)))", domain)

        assert problem.init == ClosedState.empty(2)

    def test_undeclared_object_type(self, grid_texts):
        domain = parse_domain(grid_texts[0])
        text = grid_texts[1].replace("trophy - item", "trophy - prize")

        with pytest.raises(PddlSemanticError, match="unknown type 'prize'"):
            parse_problem(text, domain)

    def test_unknown_object_in_init(self, grid_texts):
        domain = parse_domain(grid_texts[0])

        with pytest.raises(PddlSemanticError, match="unknown object 'cellar'"):
            parse_problem(grid_texts[1].replace("(in chest room_b)", "(in chest cellar)"), domain)

    def test_wrong_domain(self):
        domain = parse_domain(MINIMAL)

        with pytest.raises(PddlSemanticError, match="not 'minimal'"):
            parse_problem("(define (problem p) (:domain other) (:objects a) (:init))", domain)

    def test_goal_conjunction(self):
        domain = parse_domain(MINIMAL)
        problem = parse_problem(
            "(define (problem p) (:domain minimal) (:objects a b) (:init (ready a)) (:goal (and (ready a) (ready b))))",
            domain,
        )

        assert problem.goal == And((Atom("ready", ("a",)), Atom("ready", ("b",))))


class TestRoundTrip:
    def test_gridworld_round_trip(self, grid_texts):
        domain = parse_domain(grid_texts[0])
        problem = parse_problem(grid_texts[1], domain)

        again = parse_domain(format_domain(domain))
        assert again == domain
        assert parse_problem(format_problem(problem, again), again) == problem

    def test_toy_round_trip(self, pick_world, toggle_world):
        for domain, problem in (pick_world, toggle_world):
            again = parse_domain(format_domain(domain))

            assert again == domain
            assert parse_problem(format_problem(problem, again), again) == problem


def _mutate(text: str, rng: np.random.Generator) -> str:
    alphabet = "()?-: \nabcdefghijklmnopqrstuvwxyz"
    chars = list(text)
    for _ in range(int(rng.integers(1, 4))):
        i = int(rng.integers(len(chars)))
        kind = int(rng.integers(3))
        if kind == 0:
            del chars[i]
        elif kind == 1:
            chars.insert(i, alphabet[int(rng.integers(len(alphabet)))])
        else:
            j = int(rng.integers(len(chars)))
            chars[i], chars[j] = chars[j], chars[i]
    return "".join(chars)


@pytest.mark.slow
class TestParserTotality:
    def test_mutated_inputs_fail_with_position(self, grid_texts):
        """Любой вход дает результат или PddlError с позицией, но не падение."""
        rng = np.random.default_rng(2024)
        domain = parse_domain(grid_texts[0])
        for k in range(10_000):
            try:
                if k % 2:
                    parse_problem(_mutate(grid_texts[1], rng), domain)
                else:
                    parse_domain(_mutate(grid_texts[0], rng))
            except PddlError as e:
                assert e.line >= 1 and e.col >= 1

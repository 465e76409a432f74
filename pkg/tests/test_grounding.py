"""
Тесты заземления, компиляции в ДНФ, свертки и семантики действий
"""

import numpy as np
import pytest

from gridworld.environment import random_trophy_state
from grounding.actions import (
    POST_LABEL_EMPTY,
    PRE_LABEL_EMPTY,
    apply,
    check_pre,
    find_action,
    ground_action,
    ground_all,
)
from grounding.dnf import Dnf, collapse, determined_set, ground, to_dnf
from logic.core import ClosedState, PartialState, apply_partial
from logic.formula import And, Atom, Exists, Forall, Imply, Not, Or, When, eval_formula
from parser.pddl_parser import parse_domain, parse_problem
from utils.errors import (
    DnfBlowupError,
    MalformedEffectError,
    PgkError,
    PreconditionError,
    UnsatisfiableError,
    UnsatisfiablePrecondition,
)

N_SMALL = 12
STATES = np.arange(1 << N_SMALL, dtype=np.uint32)


def p(i: int) -> Atom:
    return Atom("p", (f"o{i}",))


def random_formula(rng: np.random.Generator, depth: int) -> object:
    """Случайная формула без кванторов над p(o0)..p(o11)"""
    if depth == 0 or rng.random() < 0.25:
        atom = p(int(rng.integers(N_SMALL)))
        return Not(atom) if rng.random() < 0.4 else atom
    kind = int(rng.integers(4))
    if kind == 3:
        return Imply(random_formula(rng, depth - 1), random_formula(rng, depth - 1))
    if kind == 2:
        return Not(random_formula(rng, depth - 1))
    args = tuple(random_formula(rng, depth - 1) for _ in range(int(rng.integers(2, 4))))
    return And(args) if kind == 0 else Or(args)


def truth_table(f, index) -> np.ndarray:
    """Значение формулы во всех 2^N состояниях (независимо от to_dnf)"""
    if isinstance(f, Atom):
        return (STATES >> np.uint32(index.atom_index(f.predicate, f.terms))) & np.uint32(1) == 1
    if isinstance(f, Not):
        return ~truth_table(f.arg, index)
    if isinstance(f, And):
        return np.logical_and.reduce([truth_table(a, index) for a in f.args] + [np.ones(STATES.shape, bool)])
    if isinstance(f, Or):
        return np.logical_or.reduce([truth_table(a, index) for a in f.args] + [np.zeros(STATES.shape, bool)])
    if isinstance(f, Imply):
        return ~truth_table(f.antecedent, index) | truth_table(f.consequent, index)
    raise TypeError(f)


def dnf_table(d: Dnf) -> np.ndarray:
    satisfied = np.zeros(STATES.shape, dtype=bool)
    for c in d.conjunctions:
        pos, neg = np.uint32(c.pos), np.uint32(c.neg)
        satisfied |= ((STATES & pos) == pos) & ((STATES & neg) == 0)
    return satisfied


@pytest.fixture(scope="module")
def corpus(small_index):
    """1000 случайных формул и их ДНФ"""
    rng = np.random.default_rng(7)
    formulas = [random_formula(rng, 3) for _ in range(1000)]
    return [(f, to_dnf(f, small_index)) for f in formulas]


class TestGround:
    def test_forall_over_keys(self, grid_index):
        f = Forall("?x", "key", Atom("reachable", ("?x",)))

        assert ground(f, grid_index) == And((Atom("reachable", ("chest_key",)), Atom("reachable", ("door_key",))))

    def test_exists_over_rooms(self, grid_index):
        f = Exists("?x", "room", Atom("in", ("agent", "?x")))

        assert ground(f, grid_index) == Or((Atom("in", ("agent", "room_a")), Atom("in", ("agent", "room_b"))))

    def test_nested_forall_exists(self, grid_index):
        f = Forall("?k", "key", Exists("?r", "room", Atom("in", ("?k", "?r"))))
        grounded = ground(f, grid_index)

        assert isinstance(grounded, And) and len(grounded.args) == 2
        assert all(isinstance(c, Or) and len(c.args) == 2 for c in grounded.args)

    def test_binding_substituted(self, grid_index):
        f = Atom("in", ("?a", "?b"))

        assert ground(f, grid_index, {"?a": "trophy", "?b": "chest"}) == Atom("in", ("trophy", "chest"))

    def test_empty_type_expands_to_constants(self, small_index):
        assert ground(Forall("?x", "gadget", p(0)), small_index) == And(())
        assert ground(Exists("?x", "gadget", p(0)), small_index) == Or(())


class TestToDnf:
    def test_distribution(self, small_index):
        # p ∧ (q ∨ ¬r)
        d = to_dnf(And((p(0), Or((p(1), Not(p(2)))))), small_index)

        assert {(c.pos, c.neg) for c in d.conjunctions} == {(0b011, 0), (0b001, 0b100)}

    def test_contradiction_is_empty(self, small_index):
        d = to_dnf(And((p(0), Not(p(0)))), small_index)

        assert d.is_unsatisfiable
        with pytest.raises(UnsatisfiableError):
            collapse(d, source="test")

    def test_when_adds_empty_conjunction(self, small_index):
        d = to_dnf(When(p(0), p(1)), small_index, effect=True)

        assert d.is_tautology
        assert {(c.pos, c.neg) for c in d.conjunctions} == {(0b10, 0), (0, 0)}
        assert collapse(d).is_empty

    def test_when_outside_effect(self, small_index):
        with pytest.raises(MalformedEffectError, match="outside an effect") as e:
            to_dnf(When(p(0), p(1)), small_index)
        assert isinstance(e.value, PgkError)

    def test_negated_when(self, small_index):
        with pytest.raises(MalformedEffectError):
            to_dnf(Not(When(p(0), p(1))), small_index, effect=True)

    def test_blowup_names_source(self, small_index):
        f = And(tuple(Or((p(2 * k), p(2 * k + 1))) for k in range(5)))

        with pytest.raises(DnfBlowupError, match="exceeds 16 conjunctions while compiling act") as e:
            to_dnf(f, small_index, cap=16, source="act")
        assert e.value.cap == 16

    def test_duplicates_removed(self, small_index):
        d = to_dnf(Or((p(0), p(0), And((p(0),)))), small_index)

        assert len(d) == 1

    def test_equivalence_on_all_states(self, small_index, corpus):
        for f, d in corpus:
            assert np.array_equal(dnf_table(d), truth_table(f, small_index))

    def test_truth_table_matches_eval(self, small_index, corpus):
        rng = np.random.default_rng(1)
        for f, _ in corpus[:50]:
            table = truth_table(f, small_index)
            for bits in rng.integers(1 << N_SMALL, size=20):
                assert table[bits] == eval_formula(f, ClosedState(int(bits), N_SMALL), small_index)


class TestCollapse:
    def test_single_conjunction(self):
        c = PartialState.from_indices(3, pos=[0], neg=[2])

        assert collapse(Dnf((c,), 3)) == c

    def test_two_conjunctions(self):
        d = Dnf.from_pairs([(0b011, 0), (0b001, 0b100)], 3)

        assert collapse(d) == PartialState(0b001, 0, 3)
        assert determined_set(d) == PartialState(0b001, 0, 3)

    def test_tautology_determines_nothing(self, small_index):
        d = to_dnf(Or((p(0), Not(p(0)))), small_index)

        assert collapse(d).is_empty
        assert determined_set(d).is_empty

    def test_determined_set_single(self):
        assert determined_set(Dnf.from_pairs([(0b01, 0)], 2)) == PartialState(0b01, 0, 2)

    def test_determined_set_limits(self):
        with pytest.raises(ValueError):
            determined_set(Dnf.from_pairs([(1, 0)], 21))
        with pytest.raises(UnsatisfiableError):
            determined_set(Dnf((), 3))

    def test_matches_determined_set(self, corpus):
        """Свертка совпадает с переборным оракулом на всех выполнимых формулах."""
        checked = 0
        for _, d in corpus:
            if d.is_unsatisfiable:
                continue
            assert collapse(d) == determined_set(d)
            checked += 1
        assert checked > 500

    def test_every_model_satisfies_collapse(self, corpus):
        for _, d in corpus:
            if d.is_unsatisfiable:
                continue
            label = collapse(d)
            models = STATES[dnf_table(d)]
            pos, neg = np.uint32(label.pos), np.uint32(label.neg)
            assert ((models & pos) == pos).all()
            assert ((models & neg) == 0).all()

    def test_undetermined_take_both_values(self, corpus):
        for _, d in corpus:
            if d.is_unsatisfiable:
                continue
            label = collapse(d)
            models = STATES[dnf_table(d)]
            for i in range(N_SMALL):
                if (label.pos | label.neg) >> i & 1:
                    continue
                values = (models >> np.uint32(i)) & np.uint32(1)
                assert values.min() == 0 and values.max() == 1

    def test_superset_pruning_changes_nothing(self, corpus):
        for _, d in corpus:
            if len(d) < 2:
                continue
            kept = [
                c
                for c in d.conjunctions
                if not any(
                    o != c and (o.pos & ~c.pos) == 0 and (o.neg & ~c.neg) == 0 for o in d.conjunctions
                )
            ]
            assert collapse(Dnf(tuple(kept), d.n)) == collapse(d)


TOY = """
(define (domain toy)
  (:requirements :strips :negative-preconditions :conditional-effects)
  (:predicates (p ?x) (q ?x))
  (:action free :parameters (?x) :precondition (and) :effect (p ?x))
  (:action broken :parameters (?x) :precondition (q ?x) :effect (and (p ?x) (not (p ?x))))
  (:action never :parameters (?x) :precondition (and (q ?x) (not (q ?x))) :effect (p ?x))
  (:action cond :parameters (?x) :precondition (q ?x) :effect (and (not (q ?x)) (when (p ?x) (not (p ?x))))))
"""


@pytest.fixture(scope="module")
def toy():
    domain = parse_domain(TOY)
    problem = parse_problem("(define (problem t) (:domain toy) (:objects a) (:init))", domain)
    return domain, problem.index


class TestGroundAction:
    def test_open_door_labels(self, gridworld, grid_index):
        action = find_action(gridworld.actions, "open", ("door",))

        assert grid_index.lookup("closed(door)") in action.post_label.neg_indices()
        assert set(grid_index.names_of(action.pre_label.pos)) == {"reachable(door)", "closed(door)"}
        assert grid_index.names_of(action.pre_label.neg) == ["locked(door)"]

    def test_labels_are_collapsed_dnfs(self, gridworld):
        for action in gridworld.actions:
            assert action.pre_label == collapse(action.pre_dnf)
            assert action.post_label == collapse(action.eff_dnf)

    def test_pick_toy(self, pick_world):
        domain, problem = pick_world
        index = problem.index
        action = ground_action(domain.action("pick"), ("cup",), index)

        assert index.names_of(action.pre_label.pos) == ["onsurface(cup)", "visible(cup)"]
        assert index.names_of(action.pre_label.neg) == ["in(cup,hand)"]
        assert index.names_of(action.post_label.pos) == ["in(cup,hand)"]
        assert index.names_of(action.post_label.neg) == ["onsurface(cup)"]
        assert action.advisories == ()

    def test_single_when_gives_advisory(self, toggle_world):
        domain, problem = toggle_world
        action = ground_action(domain.action("toggle"), ("lamp",), problem.index)

        assert action.post_label.is_empty
        assert action.advisories == (POST_LABEL_EMPTY,)

    def test_tautological_precondition(self, toy):
        domain, index = toy
        action = ground_action(domain.action("free"), ("a",), index)

        assert action.pre_label.is_empty
        assert PRE_LABEL_EMPTY in action.advisories

    def test_contradictory_effect(self, toy):
        domain, index = toy

        with pytest.raises(UnsatisfiableError, match="broken"):
            ground_action(domain.action("broken"), ("a",), index)

    def test_unsatisfiable_precondition(self, toy):
        domain, index = toy

        with pytest.raises(UnsatisfiablePrecondition):
            ground_action(domain.action("never"), ("a",), index)

    def test_ill_typed_arguments(self, gridworld, grid_index):
        from utils.errors import IllTypedArgumentError

        with pytest.raises(IllTypedArgumentError):
            ground_action(gridworld.domain.action("open"), ("trophy",), grid_index)
        with pytest.raises(IllTypedArgumentError):
            ground_action(gridworld.domain.action("open"), ("door", "chest"), grid_index)

    def test_ground_all_gridworld(self, gridworld):
        names = [a.name for a in gridworld.actions]

        assert len(names) == 54
        assert len(set(names)) == 54
        assert names.index("goto(door_key,room_a)") < names.index("pick(door_key,room_a)")


class TestApply:
    def test_pick_trophy(self, gridworld, grid_index):
        action = find_action(gridworld.actions, "pick", ("trophy", "room_a"))
        state = ClosedState(grid_index.bits_of(["reachable(trophy)", "in(trophy,room_a)", "in(agent,room_a)"]), 63)

        after = apply(action, state)

        assert grid_index.lookup("in(trophy,agent)") in after
        assert grid_index.lookup("in(trophy,room_a)") not in after

    def test_precondition_enforced(self, gridworld):
        action = find_action(gridworld.actions, "open", ("door",))

        with pytest.raises(PreconditionError):
            apply(action, ClosedState.empty(63))

    def test_when_false_condition(self, toy):
        domain, index = toy
        action = ground_action(domain.action("cond"), ("a",), index)
        state = ClosedState(index.bits_of(["q(a)"]), index.n)

        assert apply(action, state) == ClosedState.empty(index.n)

    def test_when_true_condition(self, toy):
        domain, index = toy
        action = ground_action(domain.action("cond"), ("a",), index)
        state = ClosedState(index.bits_of(["q(a)", "p(a)"]), index.n)

        assert apply(action, state) == ClosedState.empty(index.n)
        assert check_pre(action, state)
        assert not check_pre(action, ClosedState.empty(index.n))

    def test_conditions_read_pre_state(self, gridworld, grid_index):
        # goto сбрасывает достижимость прежних целей, но не новой
        action = find_action(gridworld.actions, "goto", ("chest", "room_b"))
        state = ClosedState(
            grid_index.bits_of(["in(agent,room_b)", "in(chest,room_b)", "in(chest_key,room_b)", "reachable(chest_key)"]),
            63,
        )

        after = grid_index.names_of(apply(action, state).bits)

        assert "reachable(chest)" in after
        assert "reachable(chest_key)" not in after

    def test_labels_sound_on_reachable_states(self, gridworld, grid_index):
        """В состояниях, где действие применимо, верны метка до и метка после."""
        rng = np.random.default_rng(11)
        visited = 0
        for _ in range(40):
            state = random_trophy_state(grid_index, rng)
            for _ in range(25):
                applicable = [a for a in gridworld.actions if check_pre(a, state)]
                if not applicable:
                    break
                action = applicable[int(rng.integers(len(applicable)))]
                after = apply(action, state)

                assert action.pre_label.satisfied_by(state)
                assert action.post_label.satisfied_by(after)
                assert apply_partial(after, action.post_label) == after
                state = after
                visited += 1
        assert visited > 300

    def test_check_pre_matches_formula(self, gridworld, grid_index):
        rng = np.random.default_rng(5)
        for action in gridworld.actions[::5]:
            schema = gridworld.domain.action(action.schema)
            binding = {var: arg for (var, _), arg in zip(schema.params, action.args)}
            formula = ground(schema.precondition, grid_index, binding)
            for _ in range(30):
                state = apply_partial(ClosedState.from_array(rng.random(63) < 0.2), action.pre_label)
                assert check_pre(action, state) == eval_formula(formula, state, grid_index)

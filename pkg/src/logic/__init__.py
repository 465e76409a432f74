"""
Символьный словарь: пропозиции, состояния и формулы
"""

from logic.core import (
    ClosedState,
    ObjectSym,
    PartialState,
    PredicateDef,
    Proposition,
    PropositionIndex,
    TypeHierarchy,
    apply_partial,
    enumerate_propositions,
)
from logic.formula import FALSE, TRUE, And, Atom, Exists, Forall, Formula, Imply, Not, Or, When, eval_formula

__all__ = [
    "And",
    "Atom",
    "ClosedState",
    "Exists",
    "FALSE",
    "Forall",
    "Formula",
    "Imply",
    "Not",
    "ObjectSym",
    "Or",
    "PartialState",
    "PredicateDef",
    "Proposition",
    "PropositionIndex",
    "TRUE",
    "TypeHierarchy",
    "When",
    "apply_partial",
    "enumerate_propositions",
    "eval_formula",
]

"""Forest automata, forest algebras and relational substitutions at leaves."""

from .automata import Dfa, Nfa
from .decide import Decision
from .forest import Context, Tree, parse_context, parse_forest, print_forest
from .substitution import SaturatedSubstitution, Substitution

__version__ = "0.1.0"

__all__ = [
    "Context",
    "Decision",
    "Dfa",
    "Nfa",
    "SaturatedSubstitution",
    "Substitution",
    "Tree",
    "parse_context",
    "parse_forest",
    "print_forest",
]

"""Simplification of boolean expressions modulo an equational theory,
using a collection of structures to hold many equivalent terms at once."""

from .axioms import Axiom, AxiomSet, extended_axioms, load, standard_axioms
from .collection import Collection, GcMode
from .simplifier import Config, SimplifyResult, preset, simplify
from .term import Term, parse, polish_size, to_string

__all__ = [
    "Axiom", "AxiomSet", "Collection", "Config", "GcMode", "SimplifyResult", "Term",
    "extended_axioms", "load", "parse", "polish_size", "preset", "simplify",
    "standard_axioms", "to_string",
]

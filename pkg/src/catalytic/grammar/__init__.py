"""Compilation of step tables into finite positive polynomial systems."""

from .difference import DifferenceSystem, build_difference_system
from .finite import (
    DecompositionRules,
    Extender,
    build_finite_system,
    closure_system,
    extend_function,
    finite_index_bounds,
    finite_roots,
)
from .primewalks import (
    EXPLICIT,
    UNKNOWN,
    ZERO,
    PrimeWalkBounds,
    PrimeWalkClassification,
    WalkStatus,
    classify_prime_walks,
    compute_prime_walk_bounds,
)
from .text import emit_grammar, parse_grammar
from .variables import AbarVar, AVar, BVar, DiffVar, DVar, FVar, Symbol, parse_variable_name

__all__ = [
    "DifferenceSystem",
    "build_difference_system",
    "DecompositionRules",
    "Extender",
    "build_finite_system",
    "closure_system",
    "extend_function",
    "finite_index_bounds",
    "finite_roots",
    "EXPLICIT",
    "UNKNOWN",
    "ZERO",
    "PrimeWalkBounds",
    "PrimeWalkClassification",
    "WalkStatus",
    "classify_prime_walks",
    "compute_prime_walk_bounds",
    "emit_grammar",
    "parse_grammar",
    "AbarVar",
    "AVar",
    "BVar",
    "DiffVar",
    "DVar",
    "FVar",
    "Symbol",
    "parse_variable_name",
]
